"""Reducibility verdicts, the Sobolev conjugation profile, and the
asymptotic-condition estimates on the gallery families."""

import math

import pytest

from su2kam import classify as cl, gallery, torusmaps as tm
from su2kam.classify import NotApplicable, classify, evaluate_conditions
from su2kam.kam import _step_shift, run_scheme, significant_params


def _trace(make, **kw):
    _, plan = make(**kw)
    return plan.synthesize_trace()


def test_smoothly_reducible_without_content():
    c, plan = gallery.make_resonant_chain(depth=0)
    tr = run_scheme(c, plan.params)
    out = classify(tr)
    assert out.verdict == "SmoothlyReducible"


def test_inconclusive_on_short_chain():
    c, plan = gallery.make_resonant_chain(depth=2)
    tr = run_scheme(c, plan.params)
    out = classify(tr)
    assert out.verdict == "Inconclusive"
    assert len(out.delta_series) == 2


def test_not_reducible_on_flat_deltas():
    # delta_i identically constant: no decay, no weighted h^s contains it.
    tr = _trace(gallery.make_sobolev, sigma=0.0, depth=8, e=[1.0] * 8)
    out = classify(tr)
    assert out.verdict == "NotReducible"
    assert "decay" in out.reason


def test_not_reducible_on_vanishing_defects():
    tr = _trace(gallery.make_stable_orthogonal, depth=8)
    out = classify(tr)
    assert out.verdict == "NotReducible"
    assert "no weighted" in out.reason


@pytest.mark.parametrize("sigma", [0.5, 1.0])
def test_sobolev_index_recovery(sigma):
    tr = _trace(gallery.make_sobolev, sigma=sigma, depth=12)
    out = classify(tr)
    assert out.verdict == "SobolevReducible"
    assert out.sigma_hat == pytest.approx(sigma, abs=0.25)
    lo, hi = out.confidence
    assert lo <= out.sigma_hat <= hi
    ev = out.evidence
    assert len(ev["logN"]) == ev["tail"] >= 4
    assert ev["stderr"] >= 0.0


def test_sobolev_profile_splits_at_the_index():
    tr = _trace(gallery.make_sobolev, sigma=1.0, depth=12)
    H, A_final, profile = cl.build_sobolev_conjugation(tr, stages=6)
    rows = {row["s"]: row["norms"] for row in profile}
    sigma = classify(tr).sigma_hat
    assert set(rows) == {0.0, 0.5 * sigma, sigma, sigma + 0.5, sigma + 1.0}
    # Below/at the index the partial-product norms stay bounded; above it
    # they grow stage over stage.
    for s in (0.0, 0.5 * sigma, sigma):
        assert max(rows[s]) <= 1.05 * rows[s][0]
    assert rows[sigma + 0.5][-1] > 1.2 * rows[sigma + 0.5][0]
    assert rows[sigma + 1.0][-1] > 5.0 * rows[sigma + 1.0][0]
    # Above the index the growth compounds stage over stage.
    g = rows[sigma + 1.0]
    assert g[-1] / g[-2] > g[2] / g[1]
    # Final norms are monotone in s.
    finals = [rows[s][-1] for s in sorted(rows)]
    assert finals == sorted(finals)


def test_sobolev_conjugation_grid_cap():
    tr = _trace(gallery.make_sobolev, sigma=1.0, depth=12)
    with pytest.raises(ValueError, match="stage count"):
        cl.build_sobolev_conjugation(tr, stages=12)


def test_sobolev_conjugation_not_applicable():
    tr = _trace(gallery.make_stable_orthogonal, depth=8)
    with pytest.raises(NotApplicable):
        cl.build_sobolev_conjugation(tr, stages=4)


def test_honest_conjugation_normalizes_to_constant():
    # On the honest prefix of the sigma = 1 plant, the assembled conjugation
    # maps the original cocycle to its reduced constant up to the trace's
    # own residual floor.
    c, plan = gallery.make_sobolev(sigma=1.0, depth=12)
    tr = run_scheme(c, plan.params)
    H, A_final, _ = cl.build_sobolev_conjugation(tr, stages=len(tr.steps))
    k_total = sum(_step_shift(s) for s in tr.steps)
    P = cl.conjugate_cocycle(tr, H, k_total)
    dev = P.dist_c0(tm.constant_group_map(A_final, H.n))
    floor = max(s.residual for s in tr.steps)
    assert dev <= 10.0 * floor


def test_conditions_on_the_four_families():
    sob = _trace(gallery.make_sobolev, sigma=1.0, depth=12)
    due = _trace(gallery.make_due_candidate, m_max=4, depth=8)
    stab = _trace(gallery.make_stable_orthogonal, depth=8)
    deg = _trace(gallery.make_degenerate_due, m=2, s0=6.0, depth=8)

    r = evaluate_conditions(significant_params(sob), [], m_max=4)
    assert r.ue_holds and r.stability == "ReducibleCase"
    assert not r.low_confidence

    r = evaluate_conditions(significant_params(due), [], m_max=4)
    # Deep plants drive cos^2(zeta) onto the roots, so the defect liminf
    # degenerates: the family is NotStable with the DUE exponents high.
    assert r.stability == "NotStable"
    for m in (2, 4):
        assert r.due[m].exponent > 8.0
    assert r.due_definite

    r = evaluate_conditions(significant_params(stab), [], m_max=4)
    assert not r.ue_holds              # vanishing defects: degenerate regime
    assert r.ue_liminf == 0.0
    assert r.stability == "StableOrthogonal"

    r = evaluate_conditions(significant_params(deg), [], m_max=4)
    assert r.stability == "NotStable"
    assert r.due[2].exponent == pytest.approx(6.0, rel=0.15)
    assert r.due[4].exponent > 10.0
    assert r.due[4].at_floor           # planted superpolynomially close


def test_conditions_require_params():
    with pytest.raises(ValueError):
        evaluate_conditions([], [], m_max=2)
