from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Optional

import torch

from config import get_config
from errors import DomainError
from params import SystemParams, ensure_valid
from response import coefficients, mechanical_response
from utils import as_real, centered_grid, fwhm

SpectrumKind = Literal['gain_signal', 'gain_fwm', 'noise_db', 'noise_raw']


@dataclass(frozen=True)
class ProbeConfig:
    delta_s: float
    alpha_s: complex = 1.0


@dataclass(frozen=True)
class SpectrumSeries:
    grid: torch.Tensor
    values: torch.Tensor
    kind: SpectrumKind
    params_snapshot: SystemParams
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grid.shape != self.values.shape:
            raise DomainError(f"grid and values differ in shape: {tuple(self.grid.shape)} vs {tuple(self.values.shape)}")
        if not torch.isfinite(self.values).all():
            raise DomainError(f"{self.kind} spectrum contains non-finite values")

    def fwhm(self) -> float:
        return fwhm(self.grid, self.values)

    def argmax(self) -> float:
        return self.grid[torch.argmax(self.values)].item()

    def max(self) -> float:
        return self.values.max().item()


class ReflectedAmplitudes(NamedTuple):
    signal: complex
    fwm: complex


class PeakGains(NamedTuple):
    r_s_peak: float
    r_c_peak: float
    center_signal: float    # on the delta_s axis
    center_fwm: float       # on the idler axis -delta_s
    gamma_eff: float


class GainEquivalence(NamedTuple):
    g_plus: float
    gamma_eff: float
    r_s_coupled: float      # (G+, gamma_m) as given
    r_s_balanced: float     # G+ = G-, gamma_m = gamma_eff
    relative_gap: float


def reflected_amplitudes(probe: ProbeConfig, p: SystemParams) -> ReflectedAmplitudes:
    ensure_valid(p)
    alpha = complex(probe.alpha_s)
    if alpha == 0:
        raise DomainError("alpha_s must be nonzero to form reflected amplitudes")
    at_signal = coefficients(probe.delta_s, p)
    at_idler = coefficients(-probe.delta_s, p)
    signal = (at_signal.A * p.kappa_ex - 1) * alpha
    fwm = at_idler.B * p.kappa_ex * alpha.conjugate()
    return ReflectedAmplitudes(complex(signal.item()), complex(fwm.item()))


def gain_signal(delta_s, p: SystemParams):
    # R_s = |A[delta_s] kex - 1|^2
    ensure_valid(p)
    c = coefficients(delta_s, p)
    return torch.abs(c.A * p.kappa_ex - 1) ** 2


def gain_fwm(delta_s, p: SystemParams):
    # R_c = |B[-delta_s] kex|^2
    ensure_valid(p)
    c = coefficients(-as_real(delta_s), p)
    return torch.abs(c.B * p.kappa_ex) ** 2


def peak_gains(p: SystemParams) -> PeakGains:
    ensure_valid(p)
    resp = mechanical_response(p)
    center = -resp.delta_m_eff
    return PeakGains(
        r_s_peak=gain_signal(center, p).item(),
        r_c_peak=gain_fwm(center, p).item(),
        center_signal=center,
        center_fwm=-center,
        gamma_eff=resp.gamma_eff,
    )


def default_gain_grid(p: SystemParams, which: Literal['signal', 'fwm'] = 'signal', config: Optional[dict] = None):
    config = config or get_config()
    ensure_valid(p)
    resp = mechanical_response(p)
    center = -resp.delta_m_eff if which == 'signal' else resp.delta_m_eff
    return centered_grid(center, config['gain_grid_halfwidth'] * resp.gamma_eff, config['gain_grid_points'])


def _check_grid(grid):
    x = as_real(grid)
    if x.ndim != 1 or x.numel() < 2:
        raise DomainError("a spectrum grid needs at least two points")
    if not (torch.diff(x) > 0).all():
        raise DomainError("grid must be strictly increasing")
    return x


def gain_spectrum(grid, p: SystemParams, which: Literal['signal', 'fwm'] = 'signal') -> SpectrumSeries:
    x = _check_grid(grid)
    if which == 'signal':
        values = gain_signal(x, p)
    elif which == 'fwm':
        # x is the idler axis, so the probe sits at -x
        values = gain_fwm(-x, p)
    else:
        raise ValueError(f"which must be 'signal' or 'fwm', got {which!r}")
    return SpectrumSeries(x, values, f'gain_{which}', p, {'axis': 'delta_s' if which == 'signal' else '-delta_s'})


def peak_gain_sweep(p: SystemParams, gamma_values) -> list:
    return [peak_gains(p.replace(gamma_m=float(g))) for g in as_real(gamma_values).tolist()]


def gain_equivalence(p: SystemParams, g_plus_values) -> list:
    # (G+, gamma_m) against the balanced G+ = G- system damped at the first one's gamma_eff
    out = []
    for g_plus in as_real(g_plus_values).tolist():
        coupled = p.replace(g_plus=g_plus)
        first = peak_gains(coupled)
        balanced = p.replace(g_plus=p.g_minus, gamma_m=first.gamma_eff)
        second = peak_gains(balanced)
        gap = abs(first.r_s_peak - second.r_s_peak) / second.r_s_peak
        out.append(GainEquivalence(g_plus, first.gamma_eff, first.r_s_peak, second.r_s_peak, gap))
    return out
