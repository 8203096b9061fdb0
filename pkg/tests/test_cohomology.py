"""Cohomological solvers: the obstruction partition, the constant-cocycle
solve against a dense oracle, the multi-stage trace solver on the synthetic
families, and the stability witness."""

import math

import numpy as np
import pytest

from su2kam import cohomology as ch, gallery, harmonics as hm
from su2kam.cohomology import (BudgetExceeded, DivisorBreach,
                               InsufficientResonances)
from su2kam.harmonics import HarmonicFunction

SQRT2M1 = math.sqrt(2.0) - 1.0


def random_phi(rng, M_max=3, k_band=12, count=25) -> HarmonicFunction:
    phi = HarmonicFunction({}, M_max, k_band)
    for _ in range(count):
        k = int(rng.integers(-k_band, k_band + 1))
        m = int(rng.integers(1, M_max + 1))
        j = int(rng.integers(0, m + 1))
        p = int(rng.integers(0, m + 1))
        if (k, m, j, p) == (0, 0, 0, 0):
            continue
        phi.set(k, m, j, p, complex(rng.normal(), rng.normal()))
    return phi


def mid_mode_phi(seed=5, amp=0.1) -> HarmonicFunction:
    """Weight-zero (p = m/2) content at the obstruction and at frequencies
    the repeated-k reduction never solves."""
    phi = HarmonicFunction({}, 4, hm.K_BAND_DEFAULT)
    rng = np.random.default_rng(seed)
    for m in (2, 4):
        for j in range(m + 1):
            phi.set(0, m, j, m // 2, complex(rng.normal(), rng.normal()) * amp)
            for k in (-2, 1, 2):
                phi.set(k, m, j, m // 2,
                        complex(rng.normal(), rng.normal()) * amp)
    return phi


def due_phi(seed=3, amp=0.1) -> HarmonicFunction:
    phi = HarmonicFunction({}, 4, hm.K_BAND_DEFAULT)
    rng = np.random.default_rng(seed)
    for m in (2, 4):
        for k in range(-3, 4):
            for p in range(m + 1):
                phi.set(k, m, 0, p, complex(rng.normal(), rng.normal()) * amp)
    phi.set(0, 0, 0, 0, 0.0)
    return phi


def test_partition_reassembles(rng):
    phi = random_phi(rng)
    k0, Np = 2, 5.0
    ob, band, rest = ch.partition(phi, k0, Np)
    for key, c in phi.coeffs.items():
        k, m, j, p = key
        q = 2 * k + (m - 2 * p) * k0
        total = ob.get(*key) + band.get(*key) + rest.get(*key)
        assert total == c
        if q == 0:
            assert ob.get(*key) == c
        elif abs(q) <= 2 * Np:
            assert band.get(*key) == c
        else:
            assert rest.get(*key) == c


def test_solve_constant_matches_dense_oracle(rng):
    phi = random_phi(rng)
    a, k0, K, Np = 0.217, 2, 1.0e6, 8.0
    rep = ch.solve_constant(a, SQRT2M1, phi, K, Np, k0)
    _, band, _ = ch.partition(phi, k0, Np)
    keys = sorted(band.coeffs)
    n = len(keys)
    assert n > 5
    # Dense matrix of psi -> psi o Phi - psi on the band modes, assembled
    # column by column through the harmonic action (independent of the
    # divisor formula the solver uses).
    A = np.zeros((n, n), dtype=complex)
    for col, key in enumerate(keys):
        e = HarmonicFunction({}, phi.M_max, phi.k_band)
        e.set(*key, 1.0)
        out = hm.act_constant(a, e, SQRT2M1).plus(e.scaled(-1.0))
        for row, key2 in enumerate(keys):
            A[row, col] = out.get(*key2)
    b = np.array([band.get(*key) for key in keys])
    x = np.linalg.solve(A, b)
    for i, key in enumerate(keys):
        assert abs(x[i] - rep.psi.get(*key)) < 1e-10


def test_solve_constant_spectral_residual(rng):
    phi = random_phi(rng)
    a, k0, K, Np = 0.217, 2, 1.0e6, 8.0
    rep = ch.solve_constant(a, SQRT2M1, phi, K, Np, k0)
    _, band, _ = ch.partition(phi, k0, Np)
    lhs = hm.act_constant(a, rep.psi, SQRT2M1).plus(rep.psi.scaled(-1.0))
    for key in set(lhs.coeffs) | set(band.coeffs):
        assert abs(lhs.get(*key) - band.get(*key)) < 1e-12
    assert rep.residual_measured < 1e-12
    # ob + band + rest reassemble phi.
    back = rep.obstruction.plus(band).plus(rep.rest)
    for key, c in phi.coeffs.items():
        assert back.get(*key) == pytest.approx(c)


def test_solve_constant_requires_mean_free():
    phi = HarmonicFunction({}, 2, 4)
    phi.set(0, 0, 0, 0, 1.0)
    with pytest.raises(ValueError):
        ch.solve_constant(0.2, SQRT2M1, phi, 1e4, 4.0, 0)


def test_solve_constant_divisor_breach():
    # a right on the half-resonance alpha/2 but a partition claiming k0 = 0:
    # the (k = -1, m - 2p = 2) divisor is ~ 4 pi * 1e-12, far below 1/K.
    a = 0.5 * SQRT2M1 + 1e-12
    phi = HarmonicFunction({}, 2, 4)
    phi.set(-1, 2, 0, 0, 1.0)
    with pytest.raises(DivisorBreach):
        ch.solve_constant(a, SQRT2M1, phi, 1e6, 4.0, 0)


def test_due_candidate_residual_collapses():
    _, plan = gallery.make_due_candidate(m_max=4, depth=8)
    tr = plan.synthesize_trace()
    phi = due_phi()
    pn = phi.l2_norm()
    psi, res = ch.solve_over_trace(tr, phi, stages=5, m_max=4)
    assert len(res) == 5
    for r0, r1 in zip(res, res[1:]):
        assert r1 <= r0 + 1e-12
    assert res[-1] < 1e-3 * pn


def test_stable_orthogonal_residual_stagnates():
    _, plan = gallery.make_stable_orthogonal(depth=8)
    tr = plan.synthesize_trace()
    phi = mid_mode_phi()
    ob_mass = math.sqrt(sum(abs(v) ** 2
                            for (k, m, j, p), v in phi.coeffs.items()
                            if k == 0))
    assert ob_mass > 0.1
    psi, res = ch.solve_over_trace(tr, phi, stages=4, m_max=4)
    for r in res:
        assert r == pytest.approx(ob_mass, rel=1e-9)


def test_solve_over_trace_budget_guard():
    _, plan = gallery.make_stable_orthogonal(depth=8)
    tr = plan.synthesize_trace()
    phi = HarmonicFunction({}, 2, 4)
    phi.set(1, 2, 0, 0, 1.0)
    with pytest.raises(BudgetExceeded):
        ch.solve_over_trace(tr, phi, stages=4, m_max=2)


def test_witness_shell_masses():
    _, plan = gallery.make_due_candidate(m_max=4, depth=8)
    tr = plan.synthesize_trace()
    usable = [s for s in tr.steps
              if s.resonant and s.B_descriptor % 2 == 0
              and s.eps_param != 0.0 and math.isfinite(s.nu_exponent())]
    assert len(usable) >= 4
    w = ch.build_stability_witness(tr, m=2, count=4)
    for s in usable[:4]:
        assert ch.shell_mass(w, s.N) >= 0.5


def test_witness_single_block_is_exact_coboundary():
    _, plan = gallery.make_due_candidate(m_max=4, depth=8)
    tr = plan.synthesize_trace()
    step = next(s for s in tr.steps
                if s.resonant and s.B_descriptor % 2 == 0
                and s.eps_param != 0.0 and math.isfinite(s.nu_exponent()))
    assert tr.steps.index(step) == 0  # no preceding stages to unwind
    w = ch.build_stability_witness(tr, m=2, count=1)
    # Rebuild the designed solution block and its coboundary over the step's
    # constant; the witness must be its pullback by the step frame.
    amp = 1.0 / math.sqrt(2.0)
    psi = HarmonicFunction({}, w.M_max, w.k_band)
    psi.set(-step.B_descriptor, 2, 0, 0, amp)
    psi.set(+step.B_descriptor, 2, 0, 2, amp)
    phi = hm.act_constant(step.angle, psi, tr.original.alpha).plus(
        psi.scaled(-1.0))
    want = hm.rotate_frame(step.frame, phi)
    for key in set(w.coeffs) | set(want.coeffs):
        assert abs(w.get(*key) - want.get(*key)) < 1e-13


def test_witness_requires_finite_nu():
    _, plan = gallery.make_stable_orthogonal(depth=8)
    tr = plan.synthesize_trace()
    with pytest.raises(InsufficientResonances):
        ch.build_stability_witness(tr, m=2, count=4)


def test_shell_mass_direct():
    f = HarmonicFunction({}, 2, 64)
    f.set(10, 2, 0, 0, 3.0)
    f.set(40, 2, 0, 0, 4.0)
    assert ch.shell_mass(f, 10) == pytest.approx(3.0)   # only |k| in [5, 15]
    assert ch.shell_mass(f, 40) == pytest.approx(4.0)
    assert ch.shell_mass(f, 30) == pytest.approx(4.0)   # 40 in [15, 45]
    assert ch.shell_mass(f, 100) == 0.0
