"""Acceptance gate: one PASS/FAIL line per criterion.

Criteria that cannot hold as stated are still evaluated at their literal
tolerance and marked as strict expected failures, so they show up as FAIL
with the measured numbers instead of disappearing.  The attainable part of
each such criterion is asserted separately.
"""
import json
import math
import subprocess
import sys
import warnings

import numpy as np
import pytest
import sympy as sp

from pais_uhlenbeck import (
    AuditStatus,
    JetState,
    Parameters,
    cross_check,
    drift_report,
    hamiltonian_value,
    integrate_jet,
    mode_frequencies,
    run_audit,
    sectors,
    to_canonical,
)
from pais_uhlenbeck.audit import (
    TrigPath,
    audit_ostrogradski_hamiltonian,
    audit_separation,
    audit_tilde_canonicity,
    embedding_identity_check,
    extra_mode_check,
    onshell_el_residual,
)
from pais_uhlenbeck.darboux import canonical_hamiltonian, verify_canonicity
from pais_uhlenbeck.poisson import bracket_determinant, bracket_matrix, mode_combination_brackets
from pais_uhlenbeck.regime import ConditioningWarning, Regime, classify_regime

from conftest import FIX_A, FIX_B, FIX_C, FIX_D, FIXTURES, QUARTER

JET0 = np.array([1.0, 0.3, -0.5, 0.2])


def announce(capsys, criterion, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance] criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def _grid(params, n):
    return [b for s in sectors(classify_regime(params)) for b in s.grid(n)]


# 1 -------------------------------------------------------------------------


def test_criterion_01_regime_and_frequencies(capsys):
    a = mode_frequencies(FIX_A)
    err_a = max(abs(a.w1_sq - 4.0), abs(a.w2_sq - 1.0))
    b = mode_frequencies(FIX_B)
    rng = np.random.default_rng(1)
    worst_sum = worst_prod = 0.0
    seen = set()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        for _ in range(10_000):
            m, w = rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0)
            lam = rng.uniform(-2.0, 2.0) / w
            p = Parameters(m, w, lam)
            md = mode_frequencies(p)
            seen.add(md.regime)
            w1, w2 = md.pair
            worst_sum = max(worst_sum, abs(lam * (w1 + w2) - 1.0))
            worst_prod = max(worst_prod, abs(lam * w1 * w2 - w) / w)
    ok = (err_a < 1e-14 and b.regime is Regime.DEGENERATE and b.w1_sq == b.w2_sq == 2.0
          and worst_sum < 1e-14 and worst_prod < 1e-14
          and {Regime.OSCILLATORY, Regime.HYPERBOLIC, Regime.COMPLEX} <= seen)
    announce(capsys, 1, ok, f"FIX-A err {err_a:.1e}; sum {worst_sum:.1e}; product(rel) {worst_prod:.1e}")
    assert ok


# 2 -------------------------------------------------------------------------


def test_criterion_02_poisson_structure(capsys):
    worst_mc = worst_det = 0.0
    min_det = math.inf
    structural = True
    for params in FIXTURES.values():
        for beta in _grid(params, 50):
            bm = bracket_matrix(params, beta)
            structural &= bool(np.array_equal(bm.pi, -bm.pi.T) and bm.pi[0, 2] == 0 and bm.pi[1, 3] == 0)
            chk = bracket_determinant(bm)
            worst_det = max(worst_det, abs(chk.numeric - chk.closed_form) / abs(chk.closed_form))
            min_det = min(min_det, abs(chk.numeric))
            if bm.regime is not Regime.DEGENERATE:
                worst_mc = max(worst_mc, float(np.max(mode_combination_brackets(params, beta))))
    # independent oracles for the FIX-A values
    gamma = 1 / (sp.sqrt(2) * sp.Rational(1, 5) * 3)
    entry = sp.nsimplify(gamma * (1 / sp.cos(sp.pi / 4) + 1 / sp.sin(sp.pi / 4)))
    bm = bracket_matrix(FIX_A, QUARTER)
    det_oracle = sp.Matrix(bm.pi.tolist()).det()
    ok_a = entry == sp.Rational(10, 3) and abs(bm.a - 10 / 3) < 1e-14 and abs(float(det_oracle) - 625) < 1e-9
    ok = structural and worst_mc < 1e-14 and worst_det < 1e-10 and min_det > 1e-6 and ok_a
    announce(capsys, 2, ok, f"mode brackets {worst_mc:.1e}; det vs (ad-b^2)^2 {worst_det:.1e}; "
                            f"min |det| {min_det:.2e}; FIX-A {{q,q'}}={bm.a:.15g}, det={float(det_oracle):.12g}")
    assert ok


# 3 -------------------------------------------------------------------------


def _canonicity(params):
    return [(b, verify_canonicity(params, b)) for b in _grid(params, 50)]


@pytest.mark.parametrize("params", [FIX_A, FIX_C, FIX_D], ids=["fixA", "fixC", "fixD"])
def test_criterion_03_canonicity_attainable(params):
    assert max(r.residual for _, r in _canonicity(params)) < 1e-12


def test_criterion_03_degenerate_relative_residual():
    assert max(r.relative for _, r in _canonicity(FIX_B)) < 1e-15


@pytest.mark.xfail(strict=True, reason="degenerate map at beta within 0.04 of 0 or pi: entries ~1/sin^2 "
                                       "put the float64 rounding floor of M Pi M^T near 1e-11")
def test_criterion_03_canonicity(capsys):
    worst = {k: max(_canonicity(p), key=lambda br: br[1].residual) for k, p in FIXTURES.items()}
    ok = all(r.residual < 1e-12 for _, r in worst.values())
    detail = "; ".join(f"FIX-{k} {r.residual:.1e} (beta={b:+.3f}, rel {r.relative:.1e})"
                       for k, (b, r) in sorted(worst.items()))
    announce(capsys, 3, ok, detail)
    assert ok


# 4 -------------------------------------------------------------------------


def test_criterion_04_energy_consistency(capsys):
    rng = np.random.default_rng(4)
    worst = 0.0
    for params in FIXTURES.values():
        for beta in _grid(params, 5):
            x = rng.standard_normal((100, 4))
            direct = hamiltonian_value(params, beta, x)
            via = canonical_hamiltonian(params, beta, to_canonical(params, beta, x))
            worst = max(worst, float(np.max(np.abs(direct - via))))
    h1 = hamiltonian_value(FIX_A, QUARTER, JetState(1, 0, 0, 0))
    h2 = canonical_hamiltonian(FIX_A, QUARTER, to_canonical(FIX_A, QUARTER, JetState(1, 0, 0, 0)))
    ok = worst < 1e-12 and abs(h1 - 2 / 3) < 1e-14 and abs(h2 - 2 / 3) < 1e-14
    announce(capsys, 4, ok, f"max |H - H_can| {worst:.1e}; FIX-A H={h1:.16f} / {h2:.16f}")
    assert ok


# 5 -------------------------------------------------------------------------


def _drifts(params, method):
    return drift_report(params, QUARTER, integrate_jet(params, JET0, 100.0, 1e-3, method))


@pytest.mark.parametrize("method, bound", [("rk4", 1e-8), ("exact", 1e-12)])
def test_criterion_05_conservation_fix_a(method, bound):
    rep = _drifts(FIX_A, method)
    assert rep.max_drift < bound
    assert rep.drift["C"] < 1e-8


@pytest.mark.parametrize("params", [FIX_B, FIX_C, FIX_D], ids=["fixB", "fixC", "fixD"])
def test_criterion_05_scaled_drift_growing_regimes(params):
    assert max(_drifts(params, "exact").scaled_drift.values()) < 1e-14
    assert max(_drifts(params, "rk4").scaled_drift.values()) < 1e-12


@pytest.mark.xfail(strict=True, reason="regimes (iii), (iv), (v) grow (exponentially or secularly); the "
                                       "relative drift of indefinite integrals is dominated by cancellation")
def test_criterion_05_conservation(capsys):
    parts, ok = [], True
    for key, params in sorted(FIXTURES.items()):
        rk, ex = _drifts(params, "rk4").max_drift, _drifts(params, "exact").max_drift
        ok &= rk < 1e-8 and ex < 1e-12
        parts.append(f"FIX-{key} rk4 {rk:.1e} exact {ex:.1e}")
    announce(capsys, 5, ok, "; ".join(parts))
    assert ok


# 6 -------------------------------------------------------------------------


def test_criterion_06_equivalence(capsys):
    worst_rk = worst_ex = 0.0
    for beta in _grid(FIX_A, 10):
        worst_rk = max(worst_rk, cross_check(FIX_A, beta, [1.0, 0.0, 0.0, 0.0], 10.0, 1e-3, "rk4"))
        worst_ex = max(worst_ex, cross_check(FIX_A, beta, [1.0, 0.0, 0.0, 0.0], 10.0, 1e-3, "exact"))
    ok = worst_rk < 1e-6 and worst_ex < 1e-11
    announce(capsys, 6, ok, f"rk4 {worst_rk:.1e}; propagator conjugation {worst_ex:.1e} (40 betas)")
    assert ok


# 7 -------------------------------------------------------------------------


def test_criterion_07_extra_mode(capsys):
    worst_rem = worst_val = 0.0
    absent_only_at_quarter = True
    for beta in np.append(np.linspace(-1.55, -0.05, 61), -QUARTER):
        chk = extra_mode_check(FIX_A, beta)
        worst_rem = max(worst_rem, chk.remainder)
        at_quarter = abs(beta + QUARTER) < 1e-12
        absent_only_at_quarter &= (chk.omega_sq is None) == at_quarter
        if chk.omega_sq is not None:
            c, s = math.cos(beta), math.sin(beta)
            worst_val = max(worst_val, abs(chk.omega_sq - (4 * c + s) / (c + s)))
    ok = worst_rem < 1e-10 and worst_val < 1e-12 and absent_only_at_quarter
    announce(capsys, 7, ok, f"remainder {worst_rem:.1e}; formula {worst_val:.1e}; absent only at -pi/4")
    assert ok


# 8 -------------------------------------------------------------------------


def test_criterion_08_audit_verdicts(capsys):
    tilde = audit_tilde_canonicity(FIX_A)
    sep = {e.id: e for e in audit_separation(FIX_B)}
    canon46 = sep["degenerate-separation-canonicity"]
    ostro = audit_ostrogradski_hamiltonian(FIX_A)
    det = run_audit(FIX_A)["bracket-determinant"]
    sep_ok = all(e.status is not AuditStatus.FAILED for e in sep.values())
    all_ok = all(run_audit(p).ok for p in FIXTURES.values())
    ok = (tilde.status is AuditStatus.VERIFIED and tilde.residual < 1e-13
          and canon46.status is AuditStatus.VERIFIED and canon46.residual < 1e-13
          and ostro.status is AuditStatus.CORRECTED and ostro.residual < 1e-12
          and abs(ostro.corrected["tp2^2"] + 1 / (2 * 0.2)) < 1e-12
          and det.printed is not None and det.corrected is not None
          and sep_ok and all_ok)
    announce(capsys, 8, ok, f"tilde {tilde.residual:.1e}; separation canonicity {canon46.residual:.1e}; "
                            f"p2~^2 coeff {ostro.corrected['tp2^2']:.15g}; det printed "
                            f"{det.printed['determinant']:.6g} vs {det.corrected['determinant']:.6g}")
    assert ok


# 9 -------------------------------------------------------------------------


def test_criterion_09_appendix_identity(capsys):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(20):
        a1, a2 = rng.uniform(0.5, 2.0, 2) * rng.choice([-1.0, 1.0], 2)
        worst = max(worst, embedding_identity_check(FIX_A, a1, a2, TrigPath.random(rng)).residual)
    sixth = embedding_identity_check(FIX_A, 1.3, -1.3, TrigPath.random(rng)).sixth_order_coefficient
    onshell = max(onshell_el_residual(FIX_A, *rng.uniform(-2, 2, 2), rng.standard_normal(4)) for _ in range(10))
    ok = worst < 1e-8 and abs(sixth) < 1e-12 and onshell < 1e-8
    announce(capsys, 9, ok, f"identity {worst:.1e}; sixth-order coeff {sixth:.1e}; on-shell EL {onshell:.1e}")
    assert ok


# 10 ------------------------------------------------------------------------


def _cli(*argv, cwd):
    return subprocess.run([sys.executable, "-m", "pais_uhlenbeck.cli", *argv], cwd=cwd,
                          capture_output=True, check=True)


def test_criterion_10_determinism(tmp_path, capsys):
    scen = tmp_path / "scenario.json"
    scen.write_text(json.dumps({"parameters": {"m": 1, "omega2": 0.8, "lambda": 0.2}, "beta": QUARTER,
                                "jet": [1, 0.3, -0.5, 0.2], "t_end": 20.0, "name": "fixA"}))
    outputs = []
    for run in ("first", "second"):
        d = tmp_path / run
        d.mkdir()
        _cli("simulate", "--scenario", str(scen), "--output-dir", ".", cwd=d)
        _cli("scan-beta", "--scenario", str(scen), "--output-dir", ".", cwd=d)
        verify = _cli("verify", "--scenario", str(scen), "--n", "10", cwd=d).stdout
        outputs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())} | {"verify": verify})
    ok = outputs[0] == outputs[1] and len(outputs[0]) == 4
    announce(capsys, 10, ok, f"byte-identical: {', '.join(sorted(outputs[0]))}")
    assert ok
