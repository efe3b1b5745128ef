import math

import numpy as np
import pytest
import sympy as sp

from pais_uhlenbeck import JetState, Regime, SingularBeta, bracket_matrix, sector_of, sectors
from pais_uhlenbeck.invariants import hamiltonian_form
from pais_uhlenbeck.poisson import (
    QuadraticObservable,
    bracket_determinant,
    companion_field,
    excluded_points,
    hamiltonian_flow_field,
    integral_observables,
    mode_combination_brackets,
    poisson_bracket,
)
from pais_uhlenbeck.regime import UnsupportedRegime, classify_regime, companion_matrix

from conftest import FIX_A, FIX_B, FIX_C, FIX_D, FIXTURES, QUARTER


def _grid(params, n=50):
    return [(s, b) for s in sectors(classify_regime(params)) for b in s.grid(n)]


def test_sector_layout():
    assert [s.label for s in sectors(Regime.OSCILLATORY)] == ["(-pi, -pi/2)", "(-pi/2, 0)", "(0, pi/2)", "(pi/2, pi)"]
    assert len(sectors(Regime.DEGENERATE)) == 2
    assert len(sectors(Regime.COMPLEX)) == 1
    assert excluded_points(Regime.COMPLEX) == ()
    with pytest.raises(UnsupportedRegime):
        excluded_points(Regime.HARMONIC)


def test_sector_of_wraps_and_rejects():
    assert sector_of(0.3 + 2 * math.pi, Regime.OSCILLATORY).label == "(0, pi/2)"
    with pytest.raises(SingularBeta) as err:
        sector_of(math.pi / 2, Regime.OSCILLATORY)
    assert "pi/2" in str(err.value) and err.value.regime is Regime.OSCILLATORY
    with pytest.raises(SingularBeta):
        sector_of(math.pi, Regime.HYPERBOLIC)


def test_fix_a_quarter_entry_symbolic_oracle():
    m, lam, w1, w2 = 1, sp.Rational(1, 5), 4, 1
    gamma = 1 / (sp.sqrt(2) * m * lam * (w1 - w2))
    beta = sp.pi / 4
    entry = sp.nsimplify(gamma * (1 / sp.cos(beta) + 1 / sp.sin(beta)))
    assert entry == sp.Rational(10, 3)
    assert bracket_matrix(FIX_A, QUARTER).a == pytest.approx(10 / 3, abs=1e-14)


@pytest.mark.parametrize("params", [FIX_A, FIX_B, FIX_C, FIX_D], ids="ABCD")
def test_tensor_equals_flow_over_hamiltonian(params):
    # independent oracle: Pi * grad H must reproduce the equation of motion,
    # which fixes Pi = C (2 A_H)^{-1}
    c = companion_matrix(params)
    for _, beta in _grid(params, 7):
        pi = bracket_matrix(params, beta).pi
        oracle = c @ np.linalg.inv(2.0 * hamiltonian_form(params, beta))
        assert np.max(np.abs(pi - oracle)) < 1e-10 * max(1.0, np.max(np.abs(pi)))


@pytest.mark.parametrize("params", [FIX_A, FIX_B, FIX_C, FIX_D], ids="ABCD")
def test_structure_on_grid(params):
    for _, beta in _grid(params):
        bm = bracket_matrix(params, beta)
        assert np.array_equal(bm.pi, -bm.pi.T)
        assert bm.pi[0, 2] == 0.0 and bm.pi[1, 3] == 0.0
        chk = bracket_determinant(bm)
        assert abs(chk.numeric - chk.closed_form) <= 1e-10 * abs(chk.closed_form)
        assert abs(chk.numeric) > 1e-6


def test_fix_b_half_pi_entry():
    assert bracket_matrix(FIX_B, math.pi / 2).a == pytest.approx(0.0, abs=1e-16)


def test_determinant_discrepancy_example():
    chk = bracket_determinant(bracket_matrix(FIX_A, QUARTER), FIX_A)
    assert chk.numeric == pytest.approx(625.0, rel=1e-13)
    assert chk.closed_form == pytest.approx(625.0, rel=1e-13)
    assert chk.printed == pytest.approx(36.0, rel=1e-13)
    assert chk.discrepancy
    assert chk.ratio_to_printed == pytest.approx(625 / 36, rel=1e-13)


def test_determinant_symbolic():
    a, b, d = sp.symbols("a b d")
    p = sp.Matrix([[0, a, 0, -b], [-a, 0, b, 0], [0, -b, 0, d], [b, 0, -d, 0]])
    assert sp.expand(p.det() - (a * d - b**2) ** 2) == 0


@pytest.mark.parametrize("beta", [QUARTER, -math.pi / 3, 0.1])
def test_mode_combination_brackets_fix_a(beta):
    assert np.all(mode_combination_brackets(FIX_A, beta) < 1e-14)


@pytest.mark.parametrize("params", [FIX_A, FIX_C, FIX_D], ids="ACD")
def test_mode_combination_brackets_grid(params):
    worst_exact = max(np.max(mode_combination_brackets(params, b)) for _, b in _grid(params))
    assert worst_exact < 1e-14
    worst_float = max(np.max(mode_combination_brackets(params, b, exact=False)) for _, b in _grid(params, 5))
    assert worst_float < 1e-11


def test_mode_combination_needs_distinct_roots():
    with pytest.raises(UnsupportedRegime):
        mode_combination_brackets(FIX_B, 1.0)


@pytest.mark.parametrize("params, beta", [(FIX_A, QUARTER), (FIX_B, 2.0), (FIX_C, 0.7), (FIX_D, -2.0)])
def test_integrals_commute(params, beta, rng):
    bm = bracket_matrix(params, beta)
    j1, j2 = integral_observables(params)
    h = QuadraticObservable.quadratic(hamiltonian_form(params, beta))
    for _ in range(10):
        x = rng.standard_normal(4)
        scale = np.linalg.norm(j1.gradient(x)) * np.linalg.norm(j2.gradient(x)) * np.max(np.abs(bm.pi))
        assert abs(poisson_bracket(bm, j1, j2, x)) < 1e-12 * scale
        assert abs(poisson_bracket(bm, h, j1, x)) < 1e-12 * scale


def test_linear_observable_brackets_read_tensor():
    bm = bracket_matrix(FIX_A, 0.4)
    e = np.eye(4)
    for i in range(4):
        for j in range(4):
            f, g = QuadraticObservable.linear(e[i]), QuadraticObservable.linear(e[j])
            assert poisson_bracket(bm, f, g, np.zeros(4)) == bm.pi[i, j]


def test_flow_example():
    np.testing.assert_allclose(hamiltonian_flow_field(FIX_A, QUARTER, JetState(1, 0, 0, 0)), [0, 0, 0, -4], atol=1e-13)


@pytest.mark.parametrize("params", [FIX_A, FIX_B, FIX_C, FIX_D], ids="ABCD")
def test_flow_is_beta_independent(params, rng):
    xs = rng.standard_normal((20, 4))
    want = companion_field(params, xs)
    for _, beta in _grid(params, 3):
        assert np.max(np.abs(hamiltonian_flow_field(params, beta, xs) - want)) < 1e-11 * np.max(np.abs(want))


def test_fix_a_fields_at_two_betas(rng):
    xs = rng.standard_normal((50, 4))
    np.testing.assert_allclose(hamiltonian_flow_field(FIX_A, 0.3, xs), hamiltonian_flow_field(FIX_A, 1.2, xs),
                               atol=1e-12)


def test_distinct_structures_for_distinct_beta():
    seen = {tuple(np.round(bracket_matrix(FIX_A, b).pi[0, [1, 3]], 12)) for _, b in _grid(FIX_A, 20)}
    assert len(seen) == 80


