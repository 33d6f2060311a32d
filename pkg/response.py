"""Frequency-domain linear response of the optomechanical system.

Fourier convention o[w] = int o(t) e^{iwt} dt, so d/dt -> -iw. Every
frequency argument may be a float, a list or a 1-D tensor; results are
complex128 tensors of the same shape.
"""
from dataclasses import dataclass
from typing import Literal, NamedTuple

import torch

from params import SystemParams
from utils import as_frequency

Convention = Literal['passive', 'printed']
CONVENTIONS = ('passive', 'printed')


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown susceptibility convention {convention!r}, expected one of {CONVENTIONS}")


def chi_c(omega, kappa: float, convention: Convention = 'passive'):
    _check_convention(convention)
    w = as_frequency(omega)
    if convention == 'printed':
        return -1.0 / (kappa / 2 + 1j * w)
    return 1.0 / (kappa / 2 - 1j * w)


def chi_m(omega, delta_m: float, gamma_m: float, convention: Convention = 'passive'):
    _check_convention(convention)
    w = as_frequency(omega)
    if convention == 'printed':
        return -1.0 / (gamma_m / 2 + 1j * (w - delta_m))
    return 1.0 / (gamma_m / 2 - 1j * (w - delta_m))


def chi_m_conj(omega, delta_m: float, gamma_m: float, convention: Convention = 'passive'):
    # chi_m*[-w], the susceptibility seen by b^dagger
    w = as_frequency(omega)
    return torch.conj_physical(chi_m(-w, delta_m, gamma_m, convention))


def self_energy(omega, p: SystemParams, convention: Convention = 'passive'):
    # Sigma[w] = chi_c[w] (G-^2 - G+^2); vanishes for balanced couplings
    return chi_c(omega, p.kappa, convention) * (p.g_minus ** 2 - p.g_plus ** 2)


def frequency_dependent_damping(omega, p: SystemParams):
    """Damping 2 Re Sigma[w] and shift Im Sigma[w] before the weak-coupling
    evaluation at w = delta_m. Returned as float64 tensors."""
    sigma = self_energy(omega, p)
    return 2 * sigma.real, sigma.imag


def _lorentz_denominator(p: SystemParams):
    return p.delta_m ** 2 + p.kappa ** 2 / 4


def opt_damping_wc(p: SystemParams) -> float:
    return p.kappa * (p.g_minus ** 2 - p.g_plus ** 2) / _lorentz_denominator(p)


def freq_shift_wc(p: SystemParams) -> float:
    return p.delta_m * (p.g_minus ** 2 - p.g_plus ** 2) / _lorentz_denominator(p)


@dataclass(frozen=True)
class MechanicalResponse:
    gamma_opt: float
    delta_omega_m: float
    gamma_eff: float
    delta_m_eff: float


def mechanical_response(p: SystemParams) -> MechanicalResponse:
    gamma_opt = opt_damping_wc(p)
    delta_omega_m = freq_shift_wc(p)
    return MechanicalResponse(
        gamma_opt=gamma_opt,
        delta_omega_m=delta_omega_m,
        gamma_eff=p.gamma_m + gamma_opt,
        delta_m_eff=p.delta_m + delta_omega_m,
    )


class StabilityMargin(NamedTuple):
    gamma_eff: float
    g_plus_max: float


def stability_margin(p: SystemParams) -> StabilityMargin:
    # root of gamma_eff(G+) = 0 with everything else held fixed
    g_plus_max = (p.g_minus ** 2 + p.gamma_m * _lorentz_denominator(p) / p.kappa) ** 0.5
    return StabilityMargin(mechanical_response(p).gamma_eff, g_plus_max)


@dataclass(frozen=True)
class CoefficientSet:
    """The eight transfer coefficients at one frequency grid.

    a_out[w] = (A kex - 1) a_in + A sqrt(kex k0) a_v + B kex a_in^dag + ...
    with (A, B, C, D) weighting (a_in, a_in^dag, eta, eta^dag) in a_out and
    (M, N, P, Q) the same inputs in a_out^dag.
    """
    omega: torch.Tensor
    A: torch.Tensor
    B: torch.Tensor
    C: torch.Tensor
    D: torch.Tensor
    M: torch.Tensor
    N: torch.Tensor
    P: torch.Tensor
    Q: torch.Tensor

    NAMES = ('A', 'B', 'C', 'D', 'M', 'N', 'P', 'Q')

    def as_dict(self):
        return {name: getattr(self, name) for name in self.NAMES}


def coefficients(omega, p: SystemParams, convention: Convention = 'passive') -> CoefficientSet:
    w = as_frequency(omega)
    gm, gp = p.g_minus, p.g_plus

    cc = chi_c(w, p.kappa, convention)
    cm = chi_m(w, p.delta_m, p.gamma_m, convention)
    ct = chi_m_conj(w, p.delta_m, p.gamma_m, convention)
    sigma = self_energy(w, p, convention)

    # mechanical branches dressed by the self-energy
    dm = 1 + cm * sigma
    dt = 1 + ct * sigma
    den = dm * dt

    B = cc ** 2 * gm * gp * (ct - cm) / den
    return CoefficientSet(
        omega=w.real,
        A=cc * (1 + cc * (gm ** 2 * ct - gp ** 2 * cm)) / den,
        B=B,
        C=-1j * cc * cm * gm / dm,
        D=-1j * cc * ct * gp / dt,
        M=-B,
        N=cc * (1 + cc * (gm ** 2 * cm - gp ** 2 * ct)) / den,
        P=1j * cc * cm * gp / dm,
        Q=1j * cc * ct * gm / dt,
    )
