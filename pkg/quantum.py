"""Quadrature correlation spectra of the reflected signal and FWM fields.

The signal quadratures pair a[w - delta_s] with a^dag[w + delta_s], the FWM
quadratures the other way round. Combining them into X+ = (X_s + X_c)/sqrt2
and Y- = (Y_s - Y_c)/sqrt2 gives the two-colour correlation spectrum that
is compared with the shot-noise level 1/2.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import torch

from classical import SpectrumSeries
from config import get_config
from errors import DomainError
from params import SystemParams, ensure_valid
from response import coefficients, mechanical_response
from utils import as_real, centered_grid, width_above

SHOT_NOISE = 0.5

# |S| below this is indistinguishable from shot noise on a plotted curve
SHOT_NOISE_RESOLUTION_DB = 0.1

BANDWIDTH_DEFINITION = 'full width of the region around w = 0 where S[w] exceeds S_max/2 (both in dB)'


@dataclass(frozen=True)
class CorrelationTerms:
    omega: torch.Tensor
    delta_s: float
    s_ss: torch.Tensor
    s_cc: torch.Tensor
    s_sc: torch.Tensor
    s_cs: torch.Tensor

    # the phase-quadrature cross terms carry the opposite sign
    @property
    def s_sc_y(self):
        return -self.s_sc

    @property
    def s_cs_y(self):
        return -self.s_cs

    @property
    def s_xx_plus(self):
        return (self.s_ss + self.s_cc + self.s_sc + self.s_cs) / 2

    @property
    def s_yy_minus(self):
        return (self.s_ss + self.s_cc - self.s_sc_y - self.s_cs_y) / 2


@dataclass(frozen=True)
class QuadratureSpectra:
    grid: torch.Tensor
    s_xx_plus: torch.Tensor
    s_yy_minus: torch.Tensor
    s_db: torch.Tensor
    delta_s_used: float
    n_th_used: float
    imag_residual: float = 0.0
    params_snapshot: Optional[SystemParams] = None
    nonpositive_points: int = 0     # only the alternate thermal pairing produces these, s_db is nan there

    def to_series(self, kind='noise_db') -> SpectrumSeries:
        values = self.s_db if kind == 'noise_db' else self.s_xx_plus
        meta = {'delta_s': self.delta_s_used, 'n_th': self.n_th_used}
        return SpectrumSeries(self.grid, values, kind, self.params_snapshot, meta)


@dataclass(frozen=True)
class EntanglementReport:
    s_max_db: float
    bandwidth: float
    entangled: bool
    params_snapshot: SystemParams
    gamma_eff: float
    delta_s_used: float
    bandwidth_clipped: bool = False
    # a weak positive S_max, e.g. G- = 1.2e5 at room temperature (+0.012 dB), is reported
    # as entangled but flagged here
    near_shot_noise: bool = False
    bandwidth_definition: str = field(default=BANDWIDTH_DEFINITION)


def correlation_terms(omega, delta_s: float, p: SystemParams, printed: bool = False) -> CorrelationTerms:
    """Four correlation terms <X_i[w] X_j[-w]> of the signal (s) and FWM (c)
    amplitude quadratures, kept complex.

    printed=True swaps in an alternate pairing for three thermal products
    (P[w2]Q[-w2] in s_ss, C[w2]P[-w2] and P[w1]Q[-w1] in s_cc). Those do not
    follow from the operator pairings; the oracle reports how far they drift.
    """
    ensure_valid(p)
    w = as_real(omega)
    w1 = w - delta_s
    w2 = w + delta_s
    c1, c2 = coefficients(w1, p), coefficients(w2, p)
    m1, m2 = coefficients(-w1, p), coefficients(-w2, p)

    k, k0, g, n = p.kappa_ex, p.kappa_0, p.gamma_m, p.n_th

    def same(a, a_m, b, b_m, n_plus_ss):
        # <a[wi] a^dag[-wi]> + <a^dag[wj] a[-wj]>, wi from a, wj from b
        return 0.5 * (
            (a.A * k - 1) * (a_m.N * k - 1) + b.M * b_m.B * k ** 2
            + (a.A * a_m.N + b.M * b_m.B) * k * k0
            + k * g * (n_plus_ss * (n + 1) + (a.D * a_m.P + b.Q * b_m.C) * n)
        )

    def cross(a, a_m, b, b_m):
        # <a[wi] a[-wi]> + <a^dag[wj] a^dag[-wj]>
        return 0.5 * (
            ((a.A * k - 1) * a_m.B + b.M * (b_m.N * k - 1)) * k
            + (a.A * a_m.B + b.M * b_m.N) * k * k0
            + k * g * ((a.C * a_m.D + b.P * b_m.Q) * (n + 1) + (a.D * a_m.C + b.Q * b_m.P) * n)
        )

    if printed:
        thermal_ss = c1.C * m1.Q + c2.P * m2.Q
        thermal_cc = c2.C * m2.P + c1.P * m1.Q
    else:
        thermal_ss = c1.C * m1.Q + c2.P * m2.D
        thermal_cc = c2.C * m2.Q + c1.P * m1.D

    return CorrelationTerms(
        omega=w,
        delta_s=delta_s,
        s_ss=same(c1, m1, c2, m2, thermal_ss),
        s_cc=same(c2, m2, c1, m1, thermal_cc),
        s_sc=cross(c1, m1, c2, m2),
        s_cs=cross(c2, m2, c1, m1),
    )


def normalized_db(s_sq):
    # S = -10 log10(S_sq / S_sn), positive below shot noise
    if isinstance(s_sq, torch.Tensor):
        if (s_sq <= 0).any():
            raise DomainError("noise power must be positive to normalize")
        return -10 * torch.log10(s_sq / SHOT_NOISE)
    if s_sq <= 0:
        raise DomainError(f"noise power must be positive to normalize, got {s_sq}")
    return -10 * math.log10(s_sq / SHOT_NOISE)


def default_delta_s(p: SystemParams) -> float:
    # w = 0 sits on the peak of the signal gain
    return -mechanical_response(p).delta_m_eff


def combined_spectra(grid, delta_s: Optional[float], p: SystemParams, printed: bool = False) -> QuadratureSpectra:
    ensure_valid(p)
    if delta_s is None:
        delta_s = default_delta_s(p)
    terms = correlation_terms(grid, delta_s, p, printed)
    s_xx = terms.s_xx_plus
    s_yy = terms.s_yy_minus
    # imaginary leftovers measured against the size of what was summed
    scale = (terms.s_ss.abs() + terms.s_cc.abs() + terms.s_sc.abs() + terms.s_cs.abs()) / 2
    residual = (torch.maximum(s_xx.imag.abs(), s_yy.imag.abs()) / scale).max().item()
    variance = s_xx.real
    nonpositive = int((variance <= 0).sum().item())
    if printed and nonpositive:
        # the alternate pairing can drive the variance negative, which has no dB value
        s_db = torch.full_like(variance, float('nan'))
        s_db[variance > 0] = normalized_db(variance[variance > 0])
    else:
        s_db = normalized_db(variance)
    return QuadratureSpectra(
        grid=terms.omega,
        s_xx_plus=variance,
        s_yy_minus=s_yy.real,
        s_db=s_db,
        delta_s_used=delta_s,
        n_th_used=p.n_th,
        imag_residual=residual,
        params_snapshot=p,
        nonpositive_points=nonpositive,
    )


def noise_grid(p: SystemParams, config: Optional[dict] = None):
    config = config or get_config()
    ensure_valid(p)
    gamma_eff = mechanical_response(p).gamma_eff
    return centered_grid(0.0, config['noise_grid_halfwidth'] * gamma_eff, config['noise_grid_points'])


def s_max(p: SystemParams, delta_s: Optional[float] = None, config: Optional[dict] = None) -> EntanglementReport:
    config = config or get_config()
    ensure_valid(p)
    gamma_eff = mechanical_response(p).gamma_eff
    if delta_s is None:
        delta_s = default_delta_s(p)
    peak = combined_spectra([0.0], delta_s, p).s_db[0].item()

    bandwidth, clipped = 0.0, False
    if peak > 0:
        points = config['bandwidth_points'] | 1   # odd, so w = 0 is on the grid
        halfwidth = config['bandwidth_halfwidth'] * gamma_eff
        for _ in range(config['bandwidth_max_doublings'] + 1):
            grid = centered_grid(0.0, halfwidth, points)
            spectrum = combined_spectra(grid, delta_s, p)
            bandwidth, clipped = width_above(grid, spectrum.s_db, peak / 2, points // 2)
            if not clipped:
                break
            halfwidth *= 2

    return EntanglementReport(
        s_max_db=peak,
        bandwidth=bandwidth,
        entangled=peak > 0,
        params_snapshot=p,
        gamma_eff=gamma_eff,
        delta_s_used=delta_s,
        bandwidth_clipped=clipped,
        near_shot_noise=abs(peak) < SHOT_NOISE_RESOLUTION_DB,
    )
