# Every rate and frequency is stored in rad/s; ingestion converts hz_cycles on the way in.
import math
from dataclasses import dataclass, asdict, replace
from typing import Literal, Optional

import scipy.constants as sc
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from errors import ConfigError, DomainError, InvalidParametersError, UnstableParametersError

# CODATA values
PHYSICAL_CONSTANTS = {
    'hbar': sc.hbar,    # J s
    'k_B': sc.k,        # J/K
}
HBAR = PHYSICAL_CONSTANTS['hbar']
K_B = PHYSICAL_CONSTANTS['k_B']

# regime thresholds used by validate
RESOLVED_SIDEBAND_LIMIT = 0.2   # kappa / omega_m
WEAK_COUPLING_LIMIT = 0.1       # max(G-, G+) / kappa

RATE_FIELDS = ('omega_m', 'gamma_m', 'kappa', 'kappa_ex', 'omega_0', 'g_minus', 'g_plus')


@dataclass(frozen=True)
class SystemParams:
    omega_m: float      # mechanical resonance
    gamma_m: float      # intrinsic mechanical damping
    kappa: float        # total cavity decay
    kappa_ex: float     # input-mirror decay
    omega_0: float      # two-tone modulation frequency
    g_minus: float      # beam-splitter coupling G-
    g_plus: float       # two-mode-squeezing coupling G+
    n_th: float = 0.0   # bath phonon occupation

    @property
    def delta_m(self):
        return self.omega_m - self.omega_0

    @property
    def kappa_0(self):
        return self.kappa - self.kappa_ex

    @property
    def sigma(self):
        return self.g_plus / self.g_minus if self.g_minus else math.inf

    @property
    def escape_efficiency(self):
        return self.kappa_ex / self.kappa

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)

    def to_schema(self):
        # resolved parameters in the JSON ingestion format
        out = {name: {'value': getattr(self, name), 'unit': 'rad_s'} for name in RATE_FIELDS}
        out['n_th'] = self.n_th
        return out


@dataclass(frozen=True)
class DriveConfig:
    g0: float               # single-photon coupling, rad/s
    pump_power: float       # W
    pump_frequency: float   # absolute optical frequency, rad/s

    def __post_init__(self):
        if self.g0 <= 0 or self.pump_frequency <= 0:
            raise ValueError("g0 and pump_frequency must be positive")
        if self.pump_power < 0:
            raise ValueError("pump_power must be non-negative")


@dataclass(frozen=True)
class ValidationIssue:
    severity: Literal['error', 'warning']
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple = ()

    @property
    def errors(self):
        return [i for i in self.issues if i.severity == 'error']

    @property
    def warnings(self):
        return [i for i in self.issues if i.severity == 'warning']

    @property
    def ok(self):
        return not self.errors

    def codes(self):
        return [i.code for i in self.issues]

    def to_dict(self):
        return [asdict(i) for i in self.issues]


def validate(p: SystemParams) -> ValidationReport:
    issues = []

    def error(code, message):
        issues.append(ValidationIssue('error', code, message))

    def warning(code, message):
        issues.append(ValidationIssue('warning', code, message))

    values = p.to_dict()
    for name, value in values.items():
        if not math.isfinite(value):
            error(f'nonfinite_{name}', f"{name} must be finite, got {value}")
    if issues:
        return ValidationReport(tuple(issues))

    for name in ('omega_m', 'gamma_m', 'kappa', 'kappa_ex'):
        if values[name] <= 0:
            error(f'nonpositive_{name}', f"{name} must be > 0, got {values[name]}")
    for name in ('g_minus', 'g_plus', 'n_th'):
        if values[name] < 0:
            error(f'negative_{name}', f"{name} must be >= 0, got {values[name]}")
    if p.kappa_ex > p.kappa:
        error('kappa_ex_exceeds_kappa', f"kappa_ex = {p.kappa_ex:.6g} exceeds kappa = {p.kappa:.6g}")
    # regime and stability checks need a structurally sound parameter set
    if issues:
        return ValidationReport(tuple(issues))

    if p.kappa > RESOLVED_SIDEBAND_LIMIT * p.omega_m:
        warning('unresolved_sideband',
                f"kappa/omega_m = {p.kappa / p.omega_m:.3g} > {RESOLVED_SIDEBAND_LIMIT}; rotating-wave approximation is questionable")
    g_max = max(p.g_minus, p.g_plus)
    if g_max > WEAK_COUPLING_LIMIT * p.kappa:
        warning('strong_coupling',
                f"max(G-, G+)/kappa = {g_max / p.kappa:.3g} > {WEAK_COUPLING_LIMIT}; weak-coupling closed forms lose accuracy")

    from response import mechanical_response
    gamma_eff = mechanical_response(p).gamma_eff
    if gamma_eff <= 0:
        error('unstable', f"effective mechanical damping gamma_eff = {gamma_eff:.6g} rad/s is not positive")
    return ValidationReport(tuple(issues))


def ensure_valid(p: SystemParams) -> ValidationReport:
    """Refuse parameter sets that carry validation errors."""
    report = validate(p)
    if report.errors:
        if all(i.code == 'unstable' for i in report.errors):
            raise UnstableParametersError(report)
        raise InvalidParametersError(report)
    return report


def thermal_occupation(omega_m: float, temperature: float) -> float:
    if omega_m <= 0:
        raise DomainError(f"omega_m must be > 0, got {omega_m}")
    if temperature < 0:
        raise DomainError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    x = HBAR * omega_m / (K_B * temperature)
    # exp overflows past ~709, occupation is zero to double precision long before
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def coupling_from_pump(d: DriveConfig, p: SystemParams, sideband: Literal['lower', 'upper']) -> float:
    # G = g0 * |sqrt(kappa_ex) alpha / (-/+ i omega_0 + kappa/2)| with |alpha| = sqrt(P / hbar omega)
    if sideband == 'lower':
        detuning = p.omega_0
    elif sideband == 'upper':
        detuning = -p.omega_0
    else:
        raise ValueError(f"sideband must be 'lower' or 'upper', got {sideband!r}")
    photon_flux = d.pump_power / (HBAR * d.pump_frequency)
    amplitude = math.sqrt(p.kappa_ex) * math.sqrt(photon_flux) / abs(complex(p.kappa / 2, detuning))
    return d.g0 * amplitude


# JSON ingestion

UNIT_FACTORS = {'rad_s': 1.0, 'hz_cycles': 2 * math.pi}

# which field each ratio convenience may refer to
RATIO_BASES = {
    'kappa': 'omega_m',
    'kappa_ex': 'kappa',
    'omega_0': 'omega_m',
    'g_plus': 'g_minus',
}

# bases before dependants
RESOLUTION_ORDER = ('omega_m', 'kappa', 'kappa_ex', 'omega_0', 'gamma_m', 'g_minus', 'g_plus')


class Quantity(BaseModel):
    model_config = ConfigDict(extra='forbid')

    value: Optional[float] = None
    unit: Optional[Literal['rad_s', 'hz_cycles']] = None
    ratio_of: Optional[str] = None
    quality_factor: Optional[float] = None

    @model_validator(mode='after')
    def _single_form(self):
        forms = (self.unit is not None) + (self.ratio_of is not None) + (self.quality_factor is not None)
        if forms != 1:
            raise ValueError("give exactly one of 'unit', 'ratio_of' or 'quality_factor'")
        if self.quality_factor is not None:
            if self.value is not None:
                raise ValueError("'quality_factor' replaces 'value'")
            if self.quality_factor <= 0:
                raise ValueError("'quality_factor' must be > 0")
        elif self.value is None:
            raise ValueError("'value' is required")
        return self


class ParamsSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    omega_m: Quantity
    gamma_m: Quantity
    kappa: Quantity
    kappa_ex: Quantity
    omega_0: Quantity
    g_minus: Quantity
    g_plus: Quantity
    n_th: Optional[float] = None
    temperature_K: Optional[float] = None

    @model_validator(mode='after')
    def _check_forms(self):
        if (self.n_th is None) == (self.temperature_K is None):
            raise ValueError("exactly one of 'n_th' or 'temperature_K' is required")
        for name in RATE_FIELDS:
            q = getattr(self, name)
            if q.ratio_of is not None and RATIO_BASES.get(name) != q.ratio_of:
                allowed = RATIO_BASES.get(name)
                hint = f"only ratio_of {allowed!r} is allowed" if allowed else "no ratio form is allowed"
                raise ValueError(f"{name}: {hint}")
            if q.quality_factor is not None and name != 'gamma_m':
                raise ValueError(f"{name}: 'quality_factor' is only meaningful for gamma_m")
        return self

    def resolve(self) -> SystemParams:
        resolved = {}
        for name in RESOLUTION_ORDER:
            q = getattr(self, name)
            if q.unit is not None:
                resolved[name] = q.value * UNIT_FACTORS[q.unit]
            elif q.ratio_of is not None:
                resolved[name] = q.value * resolved[q.ratio_of]
            else:
                resolved[name] = resolved['omega_m'] / q.quality_factor
        if self.n_th is not None:
            n_th = self.n_th
        else:
            n_th = thermal_occupation(resolved['omega_m'], self.temperature_K)
        return SystemParams(n_th=n_th, **resolved)


def params_from_dict(data) -> SystemParams:
    try:
        return ParamsSpec.model_validate(data).resolve()
    except (ValidationError, DomainError) as e:
        raise ConfigError(f"malformed parameter set: {e}") from e
