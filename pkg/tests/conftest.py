import math

import pytest

from params import SystemParams, thermal_occupation

AMPLIFIER_OMEGA_M = 2 * math.pi * 5.85e5
ENTANGLEMENT_OMEGA_M = 2 * math.pi * 1.14e6


def amplifier(**changes):
    kappa = 0.1 * AMPLIFIER_OMEGA_M
    p = SystemParams(
        omega_m=AMPLIFIER_OMEGA_M,
        gamma_m=2 * math.pi * 5,
        kappa=kappa,
        kappa_ex=0.98 * kappa,
        omega_0=0.95 * AMPLIFIER_OMEGA_M,
        g_minus=3e4,
        g_plus=3e4,
        n_th=0.0,
    )
    return p.replace(**changes)


def entangler(sigma=0.95, g_minus=1.2e5, temperature=1.0, escape=0.98):
    kappa = 0.1 * ENTANGLEMENT_OMEGA_M
    return SystemParams(
        omega_m=ENTANGLEMENT_OMEGA_M,
        gamma_m=ENTANGLEMENT_OMEGA_M / 1.03e9,
        kappa=kappa,
        kappa_ex=escape * kappa,
        omega_0=0.95 * ENTANGLEMENT_OMEGA_M,
        g_minus=g_minus,
        g_plus=sigma * g_minus,
        n_th=thermal_occupation(ENTANGLEMENT_OMEGA_M, temperature),
    )


@pytest.fixture
def fig2_params():
    return amplifier()


@pytest.fixture
def make_amplifier():
    return amplifier


@pytest.fixture
def make_entangler():
    return entangler


@pytest.fixture
def fig5_params():
    return entangler()


@pytest.fixture
def bare_cavity():
    return amplifier(g_minus=0.0, g_plus=0.0)
