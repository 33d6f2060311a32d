"""Direct numerical solution of the linearized Langevin equations.

Nothing here uses the closed-form coefficients or correlation terms: the
4x4 system for (a, a^dag, b, b^dag) is assembled from the rates, solved
against the six noise inputs (a_in, a_in^dag, a_v, a_v^dag, eta, eta^dag)
and contracted with their correlators. `compare` measures the closed forms
against it.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import torch

from config import get_config
from errors import DegenerateParametersError
from params import SystemParams, ensure_valid
from quantum import SHOT_NOISE, CorrelationTerms, QuadratureSpectra, combined_spectra, correlation_terms, default_delta_s, normalized_db
from response import CoefficientSet, coefficients, mechanical_response, stability_margin
from utils import CDTYPE, RDTYPE, as_frequency, as_real, relative_error

# index of each noise input in the 6-vector
A_IN, A_IN_DAG, A_V, A_V_DAG, ETA, ETA_DAG = range(6)


def noise_correlator(n_th: float):
    # <xi_j[w] xi_k[w']> = corr[j, k] delta(w + w')
    corr = torch.zeros(6, 6, dtype=CDTYPE)
    corr[A_IN, A_IN_DAG] = 1
    corr[A_V, A_V_DAG] = 1
    corr[ETA, ETA_DAG] = n_th + 1
    corr[ETA_DAG, ETA] = n_th
    return corr


def _system_matrix(w, p: SystemParams):
    # (G,) -> (G, 4, 4), unknowns ordered (a, a^dag, b, b^dag)
    g = w.shape[0]
    gm, gp = p.g_minus, p.g_plus
    m = torch.zeros(g, 4, 4, dtype=CDTYPE)
    m[:, 0, 0] = p.kappa / 2 - 1j * w
    m[:, 0, 2] = 1j * gm
    m[:, 0, 3] = 1j * gp
    m[:, 1, 1] = p.kappa / 2 - 1j * w
    m[:, 1, 2] = -1j * gp
    m[:, 1, 3] = -1j * gm
    m[:, 2, 0] = 1j * gm
    m[:, 2, 1] = 1j * gp
    m[:, 2, 2] = p.gamma_m / 2 + 1j * p.delta_m - 1j * w
    m[:, 3, 0] = -1j * gp
    m[:, 3, 1] = -1j * gm
    m[:, 3, 3] = p.gamma_m / 2 - 1j * p.delta_m - 1j * w
    return m


def _input_matrix(p: SystemParams):
    # (4, 6): how each noise input drives each unknown
    n = torch.zeros(4, 6, dtype=CDTYPE)
    n[0, A_IN] = math.sqrt(p.kappa_ex)
    n[0, A_V] = math.sqrt(p.kappa_0)
    n[1, A_IN_DAG] = math.sqrt(p.kappa_ex)
    n[1, A_V_DAG] = math.sqrt(p.kappa_0)
    n[2, ETA] = math.sqrt(p.gamma_m)
    n[3, ETA_DAG] = math.sqrt(p.gamma_m)
    return n


@dataclass(frozen=True)
class TransferMatrix:
    omega: torch.Tensor         # (G,)
    response: torch.Tensor      # (G, 4, 6) intracavity operators per noise input
    condition: torch.Tensor     # (G,) 2-norm condition number of the system

    @property
    def matrix(self):
        # (G, 4, 4) block for (a_in, a_in^dag, eta, eta^dag)
        return self.response[:, :, [A_IN, A_IN_DAG, ETA, ETA_DAG]]

    @property
    def vacuum(self):
        # (G, 4, 2) block for the loss port (a_v, a_v^dag)
        return self.response[:, :, [A_V, A_V_DAG]]


def transfer_matrix(omega, p: SystemParams, cond_limit: Optional[float] = None) -> TransferMatrix:
    if cond_limit is None:
        cond_limit = get_config()['oracle_cond_limit']
    w = as_frequency(omega).reshape(-1)
    system = _system_matrix(w, p)
    condition = torch.linalg.cond(system)
    worst = condition.max().item()
    if not math.isfinite(worst) or worst > cond_limit:
        raise DegenerateParametersError(worst, cond_limit)
    # expand so solve never reads the right-hand side as a batch of vectors
    rhs = _input_matrix(p).expand(w.shape[0], 4, 6)
    response = torch.linalg.solve(system, rhs)
    return TransferMatrix(w.real, response, condition)


def condition_numbers(omega, p: SystemParams):
    return torch.linalg.cond(_system_matrix(as_frequency(omega).reshape(-1), p))


class OutputRows(NamedTuple):
    a_out: torch.Tensor         # (G, 6)
    a_out_dag: torch.Tensor     # (G, 6)
    condition: torch.Tensor     # (G,)


def output_rows(omega, p: SystemParams, cond_limit: Optional[float] = None) -> OutputRows:
    # a_out = -a_in + sqrt(kappa_ex) a
    tm = transfer_matrix(omega, p, cond_limit)
    root = math.sqrt(p.kappa_ex)
    a_out = root * tm.response[:, 0, :]
    a_out_dag = root * tm.response[:, 1, :]
    a_out[:, A_IN] -= 1
    a_out_dag[:, A_IN_DAG] -= 1
    return OutputRows(a_out, a_out_dag, tm.condition)


def coefficients_via_matrix(omega, p: SystemParams, cond_limit: Optional[float] = None) -> CoefficientSet:
    rows = output_rows(omega, p, cond_limit)
    r, rd = rows.a_out, rows.a_out_dag
    k = p.kappa_ex
    kg = math.sqrt(p.kappa_ex * p.gamma_m)
    return CoefficientSet(
        omega=as_real(omega).reshape(-1),
        A=(r[:, A_IN] + 1) / k,
        B=r[:, A_IN_DAG] / k,
        C=r[:, ETA] / kg,
        D=r[:, ETA_DAG] / kg,
        M=rd[:, A_IN] / k,
        N=(rd[:, A_IN_DAG] + 1) / k,
        P=rd[:, ETA] / kg,
        Q=rd[:, ETA_DAG] / kg,
    )


def _correlate(first, second, corr):
    # <O1[v] O2[-v]> for output rows (G, 6) at v and -v
    return torch.einsum('gj,jk,gk->g', first, corr, second)


def _spectrum(plus, minus, corr):
    # quadratures are dicts keyed by pairing index, components at +v meet -v
    return sum(_correlate(plus[key], minus[key], corr) for key in plus)


def _combine(first, second, sign):
    return {key: (first[key] + sign * second[key]) / math.sqrt(2) for key in first}


class _Quadratures(NamedTuple):
    x_s: tuple
    x_c: tuple
    y_s: tuple
    y_c: tuple


def _quadratures(omega, delta_s, p, cond_limit):
    w = as_real(omega).reshape(-1)
    at = {
        'w1': output_rows(w - delta_s, p, cond_limit),
        'w2': output_rows(w + delta_s, p, cond_limit),
        '-w1': output_rows(-(w - delta_s), p, cond_limit),
        '-w2': output_rows(-(w + delta_s), p, cond_limit),
    }
    r2 = math.sqrt(2)

    def a(key):
        return at[key].a_out / r2

    def ad(key):
        return at[key].a_out_dag / r2

    # (quadrature at +w, its conjugate at -w)
    x_s = ({1: a('w1'), 2: ad('w2')}, {1: ad('-w1'), 2: a('-w2')})
    x_c = ({1: ad('w1'), 2: a('w2')}, {1: a('-w1'), 2: ad('-w2')})
    y_s = ({1: -1j * a('w1'), 2: 1j * ad('w2')}, {1: 1j * ad('-w1'), 2: -1j * a('-w2')})
    y_c = ({1: 1j * ad('w1'), 2: -1j * a('w2')}, {1: -1j * a('-w1'), 2: 1j * ad('-w2')})
    return w, _Quadratures(x_s, x_c, y_s, y_c)


def terms_via_matrix(omega, delta_s: float, p: SystemParams, cond_limit: Optional[float] = None) -> CorrelationTerms:
    w, q = _quadratures(omega, delta_s, p, cond_limit)
    corr = noise_correlator(p.n_th)
    return CorrelationTerms(
        omega=w,
        delta_s=delta_s,
        s_ss=_spectrum(q.x_s[0], q.x_s[1], corr),
        s_cc=_spectrum(q.x_c[0], q.x_c[1], corr),
        s_sc=_spectrum(q.x_s[0], q.x_c[1], corr),
        s_cs=_spectrum(q.x_c[0], q.x_s[1], corr),
    )


def spectra_via_matrix(grid, delta_s: Optional[float], p: SystemParams, cond_limit: Optional[float] = None) -> QuadratureSpectra:
    ensure_valid(p)
    if delta_s is None:
        delta_s = default_delta_s(p)
    w, q = _quadratures(grid, delta_s, p, cond_limit)
    corr = noise_correlator(p.n_th)

    x_plus = (_combine(q.x_s[0], q.x_c[0], 1), _combine(q.x_s[1], q.x_c[1], 1))
    y_minus = (_combine(q.y_s[0], q.y_c[0], -1), _combine(q.y_s[1], q.y_c[1], -1))
    s_xx = _spectrum(x_plus[0], x_plus[1], corr)
    s_yy = _spectrum(y_minus[0], y_minus[1], corr)
    residual = max(
        (torch.abs(s_xx.imag) / torch.abs(s_xx.real)).max().item(),
        (torch.abs(s_yy.imag) / torch.abs(s_yy.real)).max().item(),
    )
    return QuadratureSpectra(
        grid=w,
        s_xx_plus=s_xx.real,
        s_yy_minus=s_yy.real,
        s_db=normalized_db(s_xx.real),
        delta_s_used=delta_s,
        n_th_used=p.n_th,
        imag_residual=residual,
        params_snapshot=p,
    )


def _scaled(c: CoefficientSet, p: SystemParams):
    # dimensionless coefficients, as they enter the output field
    k = p.kappa_ex
    kg = math.sqrt(p.kappa_ex * p.gamma_m)
    return {
        'A': c.A * k, 'B': c.B * k, 'C': c.C * kg, 'D': c.D * kg,
        'M': c.M * k, 'N': c.N * k, 'P': c.P * kg, 'Q': c.Q * kg,
    }


@dataclass(frozen=True)
class OracleComparison:
    tol: float
    effective_tol: float
    condition_max: float
    coefficient_errors: dict        # name -> worst relative error
    spectrum_errors: dict           # s_xx_plus / s_yy_minus -> worst relative error
    printed_deviations: dict        # alternate-pairing terms vs the oracle, informational
    per_frequency: dict = field(default_factory=dict, repr=False)
    convention: str = 'passive'

    @property
    def max_error(self) -> float:
        return max(list(self.coefficient_errors.values()) + list(self.spectrum_errors.values()))

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_error) and self.max_error <= self.effective_tol

    def to_dict(self):
        return {
            'tol': self.tol,
            'effective_tol': self.effective_tol,
            'condition_max': self.condition_max,
            'convention': self.convention,
            'coefficient_errors': self.coefficient_errors,
            'spectrum_errors': self.spectrum_errors,
            'printed_deviations': self.printed_deviations,
            'max_error': self.max_error,
            'passed': self.passed,
        }


def compare(p: SystemParams, grid, tol: Optional[float] = None, convention: str = 'passive',
            config: Optional[dict] = None) -> OracleComparison:
    config = config or get_config()
    if tol is None:
        tol = config['oracle_tol']
    ensure_valid(p)
    w = as_real(grid).reshape(-1)
    cond_limit = config['oracle_cond_limit']

    exact = _scaled(coefficients_via_matrix(w, p, cond_limit), p)
    closed = _scaled(coefficients(w, p, convention), p)

    # coefficients far below the largest one in their row are compared absolutely
    row_a = torch.stack([exact[n].abs() for n in 'ABCD']).amax(dim=0)
    row_ad = torch.stack([exact[n].abs() for n in 'MNPQ']).amax(dim=0)
    per_frequency = {}
    for name in exact:
        scale = row_a if name in 'ABCD' else row_ad
        per_frequency[name] = relative_error(closed[name], exact[name], floor=1e-6 * scale)

    delta_s = default_delta_s(p)
    oracle_spectra = spectra_via_matrix(w, delta_s, p, cond_limit)
    closed_spectra = combined_spectra(w, delta_s, p)
    per_frequency['s_xx_plus'] = relative_error(closed_spectra.s_xx_plus, oracle_spectra.s_xx_plus)
    per_frequency['s_yy_minus'] = relative_error(closed_spectra.s_yy_minus, oracle_spectra.s_yy_minus)

    oracle_terms = terms_via_matrix(w, delta_s, p, cond_limit)
    printed_terms = correlation_terms(w, delta_s, p, printed=True)
    printed_deviations = {}
    for name in ('s_ss', 's_cc', 's_sc', 's_cs'):
        ref = getattr(oracle_terms, name)
        # cross terms vanish for some parameters, so measure against the shot-noise level
        err = relative_error(getattr(printed_terms, name), ref, floor=SHOT_NOISE * torch.ones_like(ref.real))
        printed_deviations[name] = err.max().item()

    # worst conditioning over every frequency the coefficients and spectra touch
    touched = torch.cat([w, w - delta_s, w + delta_s, delta_s - w, -w - delta_s])
    condition_max = condition_numbers(touched, p).max().item()
    eps = torch.finfo(RDTYPE).eps
    return OracleComparison(
        tol=tol,
        effective_tol=max(tol, 1e3 * eps * condition_max),
        condition_max=condition_max,
        coefficient_errors={name: per_frequency[name].max().item() for name in exact},
        spectrum_errors={name: per_frequency[name].max().item() for name in ('s_xx_plus', 's_yy_minus')},
        printed_deviations=printed_deviations,
        per_frequency=per_frequency,
        convention=convention,
    )


def random_stable_params(n: int, seed: Optional[int] = None) -> list:
    if seed is None:
        seed = get_config()['seed']
    gen = torch.Generator().manual_seed(seed)

    def uniform(lo, hi):
        return lo + (hi - lo) * torch.rand((), generator=gen, dtype=RDTYPE).item()

    out = []
    for _ in range(n):
        omega_m = 2 * math.pi * 10 ** uniform(5, 7)
        kappa = uniform(0.02, 0.2) * omega_m
        base = SystemParams(
            omega_m=omega_m,
            gamma_m=omega_m / 10 ** uniform(3, 5),
            kappa=kappa,
            kappa_ex=uniform(0.5, 1.0) * kappa,
            omega_0=uniform(0.9, 1.0) * omega_m,
            g_minus=uniform(0.005, 0.05) * kappa,
            g_plus=0.0,
            n_th=10 ** uniform(-1, 4),
        )
        g_plus = uniform(0.0, 0.95) * stability_margin(base).g_plus_max
        out.append(base.replace(g_plus=g_plus))
    return out


def random_frequencies(p: SystemParams, n: int, generator: Optional[torch.Generator] = None):
    # half near the mechanical features, the rest anywhere in |w| < 3 kappa
    resp = mechanical_response(p)
    sign = torch.sign(torch.rand(n, generator=generator, dtype=RDTYPE) - 0.5)
    near = sign * resp.delta_m_eff + 3 * resp.gamma_eff * torch.randn(n, generator=generator, dtype=RDTYPE)
    far = (2 * torch.rand(n, generator=generator, dtype=RDTYPE) - 1) * 3 * p.kappa
    pick = torch.rand(n, generator=generator, dtype=RDTYPE) < 0.5
    return torch.where(pick, near, far)
