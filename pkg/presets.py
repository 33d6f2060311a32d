# Experiment configs for each figure, in the same format `cli.py preset NAME --emit-config` dumps.
import math

from errors import ConfigError

# resolved-sideband cavity shared by every figure
_CAVITY = {
    'kappa': {'ratio_of': 'omega_m', 'value': 0.1},
    'kappa_ex': {'ratio_of': 'kappa', 'value': 0.98},
    'omega_0': {'ratio_of': 'omega_m', 'value': 0.95},
}

# gain spectra and stability, cold bath
AMPLIFIER_PARAMS = {
    'omega_m': {'value': 5.85e5, 'unit': 'hz_cycles'},
    'gamma_m': {'value': 5.0, 'unit': 'hz_cycles'},
    **_CAVITY,
    'g_minus': {'value': 3e4, 'unit': 'rad_s'},
    'g_plus': {'value': 3e4, 'unit': 'rad_s'},
    'n_th': 0.0,
}

# entanglement figures: high-Q resonator, G+ given as sigma * G-
ENTANGLEMENT_PARAMS = {
    'omega_m': {'value': 1.14e6, 'unit': 'hz_cycles'},
    'gamma_m': {'quality_factor': 1.03e9},
    **_CAVITY,
    'g_minus': {'value': 1.2e5, 'unit': 'rad_s'},
    'g_plus': {'ratio_of': 'g_minus', 'value': 0.95},
    'temperature_K': 1.0,
}

SIGMAS = [0.75, 0.85, 0.95]
FIG2_COUPLINGS = [29900.0, 30000.0, 30070.0]


def _copy(params, **changes):
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in params.items()}
    out.update(changes)
    return out


def _bare_detuning(params):
    omega_m = 2 * math.pi * params['omega_m']['value']
    return omega_m * (1 - params['omega_0']['value'])


def fig2a():
    center = -_bare_detuning(AMPLIFIER_PARAMS)
    return {
        'name': 'fig2a',
        'mode': 'gain_spectrum',
        'which': 'signal',
        'params': _copy(AMPLIFIER_PARAMS),
        'series': {'variable': 'g_plus.value', 'values': FIG2_COUPLINGS},
        'grid': {'from': center - 400, 'to': center + 400, 'steps': 4001},
    }


def fig2b():
    center = _bare_detuning(AMPLIFIER_PARAMS)
    return {
        'name': 'fig2b',
        'mode': 'gain_spectrum',
        'which': 'fwm',
        'params': _copy(AMPLIFIER_PARAMS),
        'series': {'variable': 'g_plus.value', 'values': FIG2_COUPLINGS},
        'grid': {'from': center - 400, 'to': center + 400, 'steps': 4001},
    }


def fig3():
    # runs past the instability threshold, unstable points are flagged in the data
    return {
        'name': 'fig3',
        'mode': 'stability_scan',
        'params': _copy(AMPLIFIER_PARAMS),
        'sweep': {'variable': 'g_plus.value', 'values': {'from': 2.9e4, 'to': 3.01e4, 'steps': 221}},
    }


def fig4():
    gamma_m = 2 * math.pi * AMPLIFIER_PARAMS['gamma_m']['value']
    return {
        'name': 'fig4',
        'mode': 'peak_gain_sweep',
        'params': _copy(AMPLIFIER_PARAMS, gamma_m={'value': gamma_m, 'unit': 'rad_s'}),
        'sweep': {'variable': 'gamma_m.value', 'values': {'from': 1.0, 'to': 1000.0, 'steps': 61, 'scale': 'log'}},
    }


def fig5():
    return {
        'name': 'fig5',
        'mode': 'noise_spectrum',
        'params': _copy(ENTANGLEMENT_PARAMS),
        'series': {'variable': 'g_plus.value', 'values': SIGMAS},
        'grid': {'from': -4e4, 'to': 4e4, 'steps': 4001},
    }


def fig6():
    return {
        'name': 'fig6',
        'mode': 's_max_sweep',
        'params': _copy(ENTANGLEMENT_PARAMS),
        'series': {'variable': 'g_plus.value', 'values': SIGMAS},
        'sweep': {'variable': 'kappa_ex.value', 'values': {'from': 0.5, 'to': 0.98, 'steps': 49}},
    }


def fig7():
    # 1.5e5 is an interpolated middle curve between the two quoted couplings
    return {
        'name': 'fig7',
        'mode': 's_max_sweep',
        'params': _copy(ENTANGLEMENT_PARAMS),
        'series': {'variable': 'g_minus.value', 'values': [1.2e5, 1.5e5, 1.8e5]},
        'sweep': {'variable': 'temperature_K', 'values': {'from': 1.0, 'to': 400.0, 'steps': 60, 'scale': 'log'}},
    }


PRESETS = {
    'fig2a': fig2a,
    'fig2b': fig2b,
    'fig3': fig3,
    'fig4': fig4,
    'fig5': fig5,
    'fig6': fig6,
    'fig7': fig7,
}


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    return PRESETS[name]()
