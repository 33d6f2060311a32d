import pytest
import torch

from errors import DegenerateParametersError
from oracle import (
    coefficients_via_matrix, compare, condition_numbers, noise_correlator, output_rows,
    random_frequencies, random_stable_params, spectra_via_matrix, terms_via_matrix, transfer_matrix,
)
from quantum import SHOT_NOISE, combined_spectra, correlation_terms, default_delta_s
from response import chi_c, mechanical_response, stability_margin


def test_noise_correlator():
    corr = noise_correlator(7.0)
    assert corr[0, 1] == 1 and corr[1, 0] == 0
    assert corr[2, 3] == 1
    assert corr[4, 5] == 8 and corr[5, 4] == 7
    assert torch.count_nonzero(corr) == 4


def test_uncoupled_system_is_a_bare_cavity(bare_cavity):
    w = torch.linspace(-2e5, 2e5, 9, dtype=torch.float64)
    tm = transfer_matrix(w, bare_cavity)
    # optics and mechanics do not talk to each other
    scale = tm.response.abs().max()
    assert tm.response[:, :2, 4:].abs().max() <= 1e-14 * scale
    assert tm.response[:, 2:, :4].abs().max() <= 1e-14 * scale
    assert tm.matrix.shape == (9, 4, 4)
    assert tm.vacuum.shape == (9, 4, 2)
    rows = output_rows(w, bare_cavity)
    expected = chi_c(w, bare_cavity.kappa) * bare_cavity.kappa_ex - 1
    assert torch.allclose(rows.a_out[:, 0], expected, rtol=1e-12, atol=0)


def test_coefficients_match_closed_forms(fig2_params):
    p = fig2_params.replace(g_plus=29900.0)
    w = -mechanical_response(p).delta_m_eff + torch.linspace(-200, 200, 41, dtype=torch.float64)
    result = compare(p, w, tol=1e-9)
    assert result.passed, result.to_dict()
    assert set(result.coefficient_errors) == set('ABCDMNPQ')
    assert coefficients_via_matrix(w, p).A.shape == (41,)


def test_fig2_comparison_passes(fig2_params):
    gen = torch.Generator().manual_seed(3)
    for g_plus in (29900.0, 30000.0, 30070.0):
        p = fig2_params.replace(g_plus=g_plus)
        result = compare(p, random_frequencies(p, 25, gen), tol=1e-9)
        assert result.passed, result.to_dict()


def test_printed_susceptibilities_are_caught(fig2_params):
    w = torch.tensor([-1.8e5, 0.0, 1.8e5, 4e5], dtype=torch.float64)
    result = compare(fig2_params, w, tol=1e-9, convention='printed')
    assert not result.passed
    assert result.max_error > 1e-2
    assert result.to_dict()['convention'] == 'printed'


def test_close_to_the_stability_edge(fig2_params):
    p = fig2_params.replace(g_plus=0.999 * stability_margin(fig2_params).g_plus_max)
    resp = mechanical_response(p)
    w = -resp.delta_m_eff + resp.gamma_eff * torch.linspace(-5, 5, 21, dtype=torch.float64)
    result = compare(p, w, tol=1e-9)
    assert result.passed, result.to_dict()
    assert result.effective_tol >= 1e-9


def test_conditioning_grows_towards_the_edge(fig2_params):
    w = torch.tensor([-mechanical_response(fig2_params).delta_m_eff], dtype=torch.float64)
    edge = stability_margin(fig2_params).g_plus_max
    conds = [condition_numbers(w, fig2_params.replace(g_plus=f * edge)).item() for f in (0.9, 0.99, 0.999)]
    assert conds[0] < conds[1] < conds[2]
    far = condition_numbers(torch.tensor([5e5], dtype=torch.float64), fig2_params.replace(g_plus=0.999 * edge))
    assert far.item() < conds[2]


def test_degenerate_systems_are_reported(fig2_params):
    with pytest.raises(DegenerateParametersError) as exc:
        transfer_matrix([0.0, 1e5], fig2_params, cond_limit=1.0)
    assert exc.value.exit_code == 3


def test_passive_unitarity(bare_cavity):
    grid = torch.linspace(-3e5, 3e5, 31, dtype=torch.float64)
    for escape in (0.4, 0.98):
        p = bare_cavity.replace(kappa_ex=escape * bare_cavity.kappa, n_th=1e3)
        spectra = spectra_via_matrix(grid, None, p)
        assert torch.allclose(spectra.s_xx_plus, torch.full_like(grid, SHOT_NOISE), rtol=0, atol=1e-12)
        assert torch.allclose(spectra.s_yy_minus, torch.full_like(grid, SHOT_NOISE), rtol=0, atol=1e-12)


def test_matrix_spectra_reach_the_entanglement_peak(fig5_params):
    spectra = spectra_via_matrix([0.0], None, fig5_params)
    assert spectra.s_db[0].item() == pytest.approx(16.0, abs=1.5)
    assert spectra.s_yy_minus[0].item() == pytest.approx(spectra.s_xx_plus[0].item(), rel=1e-10)


def test_matrix_terms_match_correlation_terms(fig5_params):
    grid = torch.linspace(-2e4, 2e4, 9, dtype=torch.float64)
    delta_s = default_delta_s(fig5_params)
    exact = terms_via_matrix(grid, delta_s, fig5_params)
    closed = correlation_terms(grid, delta_s, fig5_params)
    for name in ('s_ss', 's_cc', 's_sc', 's_cs'):
        assert torch.allclose(getattr(closed, name), getattr(exact, name), rtol=1e-8, atol=1e-10)


def test_alternate_thermal_pairing_is_reported(make_entangler):
    p = make_entangler(sigma=0.5, temperature=10.0)
    grid = torch.linspace(-1e4, 1e4, 5, dtype=torch.float64)
    result = compare(p, grid, tol=1e-9)
    assert result.passed, result.to_dict()
    assert result.printed_deviations['s_ss'] > 1e-6
    assert result.printed_deviations['s_cc'] > 1e-6
    # the cross terms are the same either way
    assert result.printed_deviations['s_sc'] < 1e-8
    assert result.printed_deviations['s_cs'] < 1e-8


def test_random_draws_are_stable_and_reproducible():
    first = random_stable_params(20, seed=9)
    assert first == random_stable_params(20, seed=9)
    assert first != random_stable_params(20, seed=10)
    for p in first:
        assert mechanical_response(p).gamma_eff > 0
        assert p.kappa_ex <= p.kappa


def test_closed_forms_agree_on_random_draws():
    gen = torch.Generator().manual_seed(1234)
    failures = []
    for i, p in enumerate(random_stable_params(100, seed=1234)):
        result = compare(p, random_frequencies(p, 10, gen), tol=1e-9)
        if not result.passed:
            failures.append((i, result.to_dict()))
    assert not failures


def test_spectra_agree_with_quantum_module(fig5_params):
    grid = torch.linspace(-3e4, 3e4, 61, dtype=torch.float64)
    exact = spectra_via_matrix(grid, None, fig5_params)
    closed = combined_spectra(grid, None, fig5_params)
    assert torch.allclose(closed.s_xx_plus, exact.s_xx_plus, rtol=1e-9, atol=0)
    assert torch.allclose(closed.s_db, exact.s_db, rtol=0, atol=1e-7)
