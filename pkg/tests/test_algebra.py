"""Closed-form SU(2)/su(2) operations against 2x2 matrix oracles."""

import math

import numpy as np
import pytest

from su2kam import algebra
from su2kam.algebra import (AlgebraElement, AntipodalPoint, GroupElement,
                            IDENTITY)

from conftest import (algebra_from_matrix, algebra_matrix, group_from_matrix,
                      group_matrix, random_algebra, random_group)


def test_mul_inv_against_matrices(rng):
    for _ in range(300):
        a, b = random_group(rng), random_group(rng)
        got = group_matrix(algebra.mul(a, b))
        want = group_matrix(a) @ group_matrix(b)
        assert np.max(np.abs(got - want)) < 1e-14
        got_inv = group_matrix(algebra.inv(a))
        assert np.max(np.abs(got_inv - np.linalg.inv(group_matrix(a)))) < 1e-13


def test_exp_against_matrix_series(rng):
    for _ in range(300):
        s = random_algebra(rng, scale=0.8)
        M = algebra_matrix(s)
        # Eigen-exponential of the anti-Hermitian matrix.
        vals, vecs = np.linalg.eigh(1j * M)
        want = vecs @ np.diag(np.exp(-1j * vals)) @ vecs.conj().T
        got = group_matrix(algebra.exp_alg(s))
        assert np.max(np.abs(got - want)) < 1e-13


def test_log_round_trip(rng):
    for _ in range(300):
        s = random_algebra(rng, scale=0.9)
        if s.norm() >= math.pi - 0.05:
            continue  # outside the principal branch
        back = algebra.log_alg(algebra.exp_alg(s))
        assert abs(back.t - s.t) < 1e-12
        assert abs(back.u - s.u) < 1e-12


def test_log_antipode_guard():
    with pytest.raises(AntipodalPoint):
        algebra.log_alg(GroupElement(-1.0, 0.0))


def test_adjoint_bracket_inner_against_matrices(rng):
    for _ in range(300):
        S, s1, s2 = random_group(rng), random_algebra(rng), random_algebra(rng)
        M, A1, A2 = group_matrix(S), algebra_matrix(s1), algebra_matrix(s2)
        ad = algebra_from_matrix(M @ A1 @ np.linalg.inv(M))
        got = algebra.adjoint(S, s1)
        assert abs(ad.t - got.t) < 1e-13 and abs(ad.u - got.u) < 1e-13
        br = algebra_from_matrix(A1 @ A2 - A2 @ A1)
        got_br = algebra.bracket(s1, s2)
        assert abs(br.t - got_br.t) < 1e-13 and abs(br.u - got_br.u) < 1e-13
        # inner = -tr(A1 A2) / 2
        want_inner = float((-np.trace(A1 @ A2) / 2.0).real)
        assert abs(algebra.inner(s1, s2) - want_inner) < 1e-13


def test_diagonalize_reconstructs(rng):
    for _ in range(300):
        a = random_group(rng)
        d = algebra.diagonalize(a)
        assert 0.0 <= d.angle <= 0.5
        back = algebra.reconstruct(d)
        assert abs(back.z - a.z) < 1e-12 and abs(back.w - a.w) < 1e-12


def test_diagonalize_near_identity_precision():
    # arccos would lose half the digits here; atan2 must not.
    eps = 1e-9
    g = GroupElement(math.cos(eps) + 0.0j, complex(math.sin(eps)))
    d = algebra.diagonalize(g)
    assert abs(d.angle - eps / (2.0 * math.pi)) < 1e-15


def test_distance_properties(rng):
    for _ in range(100):
        a, b, c = (random_group(rng) for _ in range(3))
        dab = algebra.distance(a, b)
        assert dab >= 0.0
        assert abs(dab - algebra.distance(b, a)) < 1e-12
        # Bi-invariance.
        assert abs(algebra.distance(algebra.mul(c, a), algebra.mul(c, b))
                   - dab) < 1e-10
    assert algebra.distance(IDENTITY, IDENTITY) == 0.0


def test_distance_matches_log_norm(rng):
    for _ in range(100):
        s = random_algebra(rng, scale=0.5)
        g = algebra.exp_alg(s)
        assert abs(algebra.distance(IDENTITY, g) - s.norm()) < 1e-12


def test_array_kernels_match_scalar(rng):
    n = 64
    gs = [random_group(rng) for _ in range(n)]
    hs = [random_group(rng) for _ in range(n)]
    z1 = np.array([g.z for g in gs]); w1 = np.array([g.w for g in gs])
    z2 = np.array([h.z for h in hs]); w2 = np.array([h.w for h in hs])
    zm, wm = algebra.mul_arrays(z1, w1, z2, w2)
    for i in range(n):
        want = algebra.mul(gs[i], hs[i])
        assert abs(zm[i] - want.z) < 1e-14 and abs(wm[i] - want.w) < 1e-14
    ss = [random_algebra(rng, 0.5) for _ in range(n)]
    t = np.array([s.t for s in ss]); u = np.array([s.u for s in ss])
    ze, we = algebra.exp_arrays(t, u)
    for i in range(n):
        want = algebra.exp_alg(ss[i])
        assert abs(ze[i] - want.z) < 1e-14 and abs(we[i] - want.w) < 1e-14
    tb, ub = algebra.log_arrays(ze, we)
    assert np.max(np.abs(tb - t)) < 1e-12 and np.max(np.abs(ub - u)) < 1e-12
