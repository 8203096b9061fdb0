"""Band-limited su(2)/SU(2) maps: spectral ops against direct evaluation."""

import math

import numpy as np
import pytest

from su2kam import algebra, torusmaps as tm
from su2kam.arithmetic import DiophantineParams, find_resonance, \
    resonance_hypothesis_K
from su2kam.torusmaps import AlgebraMap, DivisorUnderflow

SQRT2M1 = math.sqrt(2.0) - 1.0


def random_map(rng, band, scale=1.0) -> AlgebraMap:
    F = AlgebraMap(band)
    for k in range(-band, band + 1):
        F.set_z(k, scale * (rng.normal() + 1j * rng.normal()))
        if k >= 0:
            F.set_t(k, scale * (rng.normal() + 1j * rng.normal())
                    if k else scale * rng.normal())
    return F


def direct_eval(F: AlgebraMap, x: float):
    t = sum(F.t_coeff(k) * np.exp(2j * np.pi * k * x) for k in F.ks())
    z = sum(F.z_coeff(k) * np.exp(2j * np.pi * k * x) for k in F.ks())
    return t, z


def test_t_channel_conjugate_symmetry(rng):
    F = random_map(rng, 5)
    for k in range(-5, 6):
        assert F.t_coeff(-k) == pytest.approx(np.conj(F.t_coeff(k)))
    # Symmetry makes the t channel real on the grid.
    t, _ = tm.eval_map(F)
    assert np.max(np.abs(np.imag(
        tm.eval_channel(F.t_hat, F.band, tm.grid_size(F.band))))) < 1e-12


def test_eval_project_round_trip(rng):
    F = random_map(rng, 7)
    n = tm.grid_size(7)
    t, z = tm.eval_map(F, n)
    F2 = AlgebraMap(7, tm.project_channel(t.astype(complex), 7),
                    tm.project_channel(z, 7))
    assert np.max(np.abs(F2.t_hat - F.t_hat)) < 1e-13
    assert np.max(np.abs(F2.z_hat - F.z_hat)) < 1e-13


def test_eval_channel_matches_direct(rng):
    F = random_map(rng, 4)
    n = 32
    t, z = tm.eval_map(F, n)
    for j in (0, 5, 17):
        td, zd = direct_eval(F, j / n)
        assert abs(t[j] - td.real) < 1e-12
        assert abs(z[j] - zd) < 1e-12


def test_truncations_partition(rng):
    F = random_map(rng, 12)
    N = 5
    low = tm.truncate(F, N, "T_N")
    rest = tm.truncate(F, N, "R_N")
    back = low.plus(rest)
    assert np.max(np.abs(back.t_hat - F.t_hat)) < 1e-15
    assert np.max(np.abs(back.z_hat - F.z_hat)) < 1e-15
    dot = tm.truncate(F, N, "dotT_N")
    assert dot.t_coeff(0) == 0 and dot.z_coeff(0) == 0
    for k in range(1, N + 1):
        assert dot.z_coeff(k) == F.z_coeff(k)


def test_resonant_band_truncations(rng):
    F = random_map(rng, 12)
    k_r, width = 3, 4
    band = tm.truncate(F, 0, "resonant_band", k_r=k_r, width=width)
    rest = tm.truncate(F, 0, "discentered_rest", k_r=k_r, width=width)
    assert np.max(np.abs(band.t_hat)) == 0 and np.max(np.abs(rest.t_hat)) == 0
    for k in range(-12, 13):
        total = band.z_coeff(k) + rest.z_coeff(k)
        assert total == pytest.approx(F.z_coeff(k))
        if 0 < abs(k - k_r) <= width:
            assert rest.z_coeff(k) == 0
        else:
            assert band.z_coeff(k) == 0


def test_norms_against_brute_force(rng):
    F = random_map(rng, 6, scale=0.3)
    k = F.ks().astype(float)
    want_h1 = math.sqrt(float(np.sum((1 + k * k)
                                     * (np.abs(F.t_hat) ** 2
                                        + np.abs(F.z_hat) ** 2))))
    assert tm.norm_hs(F, 1.0) == pytest.approx(want_h1, rel=1e-12)
    # C^0: grid max is a lower bound for the l^1 upper bound.
    xs = np.linspace(0, 1, 701)
    vals = []
    for x in xs:
        t, z = direct_eval(F, x)
        vals.append(math.sqrt(t.real ** 2 + abs(z) ** 2))
    grid_max = max(vals)
    # Both are grid lower bounds of the true sup (different grids).
    assert tm.norm_cs(F, 0) == pytest.approx(grid_max, rel=5e-2)
    assert tm.norm_c0_upper(F) >= grid_max - 1e-12
    assert tm.norm_c0_upper(F) >= tm.norm_cs(F, 0) - 1e-12


def test_solve_diagonal_verifies(rng):
    F = random_map(rng, 8, scale=0.1)
    N = 8
    Y = tm.solve_diagonal(F, SQRT2M1, N)
    # Y(x + alpha) - Y(x) + dotT_N F = 0 on the t channel.
    lhs = Y.translate(SQRT2M1).plus(Y.scaled(-1.0)).plus(
        tm.truncate(F, N, "dotT_N"))
    assert np.max(np.abs(lhs.t_hat)) < 1e-10


def test_solve_offdiagonal_verifies(rng):
    params = DiophantineParams(4.0, 1.0)
    N = 8
    K = resonance_hypothesis_K(params, N)
    a = 0.23
    rep = find_resonance(a, SQRT2M1, N, K, params, nu=2.0)
    F = random_map(rng, N, scale=0.05)
    Y = tm.solve_offdiagonal(F, SQRT2M1, a, N, rep)
    # e^{-2 i pi 2a} Y_z(x + alpha) - Y_z(x) + F_z = 0 off the resonant mode.
    k = F.ks()
    phase = np.exp(2j * np.pi * (k * SQRT2M1 - 2.0 * a))
    lhs = phase * Y.z_hat - Y.z_hat + F.z_hat
    sel = (np.abs(k) <= N)
    if rep.resonant_mode is not None:
        sel &= (k != rep.resonant_mode)
    assert np.max(np.abs(lhs[sel])) < 1e-9
    if rep.resonant_mode is not None:
        assert Y.z_coeff(rep.resonant_mode) == 0


def test_solve_offdiagonal_divisor_guard():
    params = DiophantineParams(4.0, 1.0)
    N = 8
    K = resonance_hypothesis_K(params, N)
    # a right on the k = 1 resonance; a forged report that claims "no
    # resonance" would make the solver divide by the tiny divisor, so the
    # guard must refuse.
    a = 0.5 * SQRT2M1 + 1e-9
    rep = find_resonance(a, SQRT2M1, N, K, params, nu=2.0)
    assert rep.resonant_mode == 1
    from dataclasses import replace
    bad = replace(rep, resonant_mode=None)
    F = random_map(np.random.default_rng(0), N, scale=0.01)
    with pytest.raises(DivisorUnderflow):
        tm.solve_offdiagonal(F, SQRT2M1, a, N, bad)


def test_group_map_operations(rng):
    F = random_map(rng, 3, scale=0.2)
    n = tm.grid_size(3)
    G = tm.to_group(F, n)
    # Pointwise exp oracle.
    t, z = tm.eval_map(F, n)
    for j in (0, 3, 11):
        want = algebra.exp_alg(algebra.AlgebraElement(float(t[j]),
                                                      complex(z[j])))
        got = G.at(j)
        assert abs(got.z - want.z) < 1e-13 and abs(got.w - want.w) < 1e-13
    # log round trip.
    back = G.log(3)
    assert np.max(np.abs(back.t_hat - F.t_hat)) < 1e-10
    assert np.max(np.abs(back.z_hat - F.z_hat)) < 1e-10
    # mul/inv consistency.
    P = G.mul(G.inv())
    assert P.dist_c0(tm.constant_group_map(algebra.IDENTITY, n)) < 1e-12


def test_torus_exponential_and_adjoint(rng):
    n = 64
    k_half = 4
    H = tm.torus_exponential(k_half, n)
    for j in (0, 7, 31):
        x = j / n
        assert abs(H.z[j] - np.exp(-1j * np.pi * k_half * x)) < 1e-13
        assert H.w[j] == 0
    F = random_map(rng, 3, scale=0.1)
    out = tm.adjoint_by_group_map(H, F)
    # Diagonal adjoint: t unchanged, u gains e^{-2 i pi k_half x}... check
    # pointwise against the scalar oracle.
    t, z = tm.eval_map(F, n)
    t2, z2 = tm.eval_map(out, n)
    for j in (1, 9):
        want = algebra.adjoint(H.at(j),
                               algebra.AlgebraElement(float(t[j]),
                                                      complex(z[j])))
        assert abs(t2[j] - want.t) < 1e-10
        assert abs(z2[j] - want.u) < 1e-10


def test_adjoint_constant_matches_grid(rng):
    F = random_map(rng, 4, scale=0.3)
    S = algebra.exp_alg(algebra.AlgebraElement(0.3, 0.2 - 0.4j))
    out = tm.adjoint_constant(S, F)
    n = tm.grid_size(4)
    t, z = tm.eval_map(F, n)
    t2, z2 = tm.eval_map(out, n)
    for j in (0, 5, 20):
        want = algebra.adjoint(S, algebra.AlgebraElement(float(t[j]),
                                                         complex(z[j])))
        assert abs(t2[j] - want.t) < 1e-12
        assert abs(z2[j] - want.u) < 1e-12


def test_rest_estimate_bounds_tail(rng):
    F = random_map(rng, 16, scale=0.1)
    N = 6
    rest = tm.truncate(F, N, "R_N")
    assert tm.norm_cs(rest, 0) <= tm.rest_estimate(F, N, 0) + 1e-12
