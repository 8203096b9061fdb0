"""Approximate solvers for the cohomological equation psi o Phi - psi = phi
over quasiperiodic SU(2) cocycles: the obstruction / truncation / rest
partition, the single-stage constant-cocycle solver with its estimates, the
multi-stage solver that follows a KAM trace through its frames, and the
stability witness built from near-resonant coboundaries.

Conventions: the cocycle acts by Phi(x, u) = (x + alpha, A(x) u); over a
diagonal constant A = {e^{2 i pi a}, 0} the (k, m, j, p) coefficient of
psi o Phi picks up e^{2 i pi (k alpha + (m - 2p) a)}, so the divisors are
e^{2 i pi (k alpha + (m - 2p) a)} - 1.  With a near the resonant value
k0 alpha / 2, the divisor is uniformly small exactly on the modes with
2k + (m - 2p) k0 = 0 (doubled-integer arithmetic keeps half-integer shifts
exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import algebra, harmonics as hm, torusmaps as tm
from .algebra import GroupElement
from .arithmetic import fold
from .harmonics import HarmonicFunction
from .kam import KamTrace, StepRecord


class DivisorBreach(ArithmeticError):
    """A band divisor fell below 1/K: the partition parameters (k0, N')
    do not describe this (a, alpha)."""


class BudgetExceeded(ValueError):
    """Band growth beyond the declared k_band budget; reduce the stage count."""


class InsufficientResonances(ValueError):
    """The trace lacks the resonant steps the construction needs."""


@dataclass
class ObstructionPartition:
    """Classification of the stored modes of a harmonic function by the
    doubled resonance integer q = 2k + (m - 2p) k0."""

    k0: int
    N_prime: float
    ob_keys: set = field(default_factory=set)
    band_keys: set = field(default_factory=set)
    rest_keys: set = field(default_factory=set)


def partition(f: HarmonicFunction, k0: int, N_prime: float):
    """Split f into (ob, band, rest): q = 0 / 0 < |q|/2 <= N' / beyond,
    with q = 2k + (m - 2p) k0.  The three parts reassemble to f exactly."""
    ob = HarmonicFunction({}, f.M_max, f.k_band)
    band = HarmonicFunction({}, f.M_max, f.k_band)
    rest = HarmonicFunction({}, f.M_max, f.k_band)
    for (k, m, j, p), c in f.coeffs.items():
        q = 2 * k + (m - 2 * p) * k0
        if q == 0:
            ob.coeffs[(k, m, j, p)] = c
        elif abs(q) <= 2.0 * N_prime:
            band.coeffs[(k, m, j, p)] = c
        else:
            rest.coeffs[(k, m, j, p)] = c
    return ob, band, rest


@dataclass
class SolveReport:
    psi: HarmonicFunction
    obstruction: HarmonicFunction
    rest: HarmonicFunction
    linearization_error_bound: float
    residual_measured: float
    psi_norm_measured: float = 0.0   # ||psi||_{L^2}
    envelope_declared: float = 0.0   # K * N'^3 * ||phi||_{L^2}


def solve_constant(a: float, alpha: float, phi: HarmonicFunction, K: float,
                   N_prime: float, k0: int) -> SolveReport:
    """Solve the band part of psi o Phi - psi = phi over the constant
    diagonal cocycle (alpha, {e^{2 i pi a}, 0}): psi-hat = phi-hat /
    (e^{2 i pi (k alpha + (m - 2p) a)} - 1) on the modes with
    0 < |2k + (m - 2p) k0| <= 2 N'; obstruction and rest pass through.

    Every divisor actually used must have modulus >= 1/K, else
    DivisorBreach: the partition does not describe this constant.
    """
    if phi.get(0, 0, 0, 0) != 0:
        raise ValueError("phi must be mean-free ((0,0,0,0) coefficient zero)")
    ob, band, rest = partition(phi, k0, N_prime)
    psi = HarmonicFunction({}, phi.M_max, phi.k_band)
    residual = 0.0
    for (k, m, j, p), c in band.coeffs.items():
        theta = k * alpha + (m - 2 * p) * a
        div = np.exp(2j * np.pi * theta) - 1.0
        if abs(div) < 1.0 / K:
            raise DivisorBreach(
                f"divisor {abs(div):.3g} < 1/K at mode (k={k}, m={m}, p={p}) "
                f"(K={K:g}, k0={k0})")
        val = c / div
        psi.coeffs[(k, m, j, p)] = val
        residual += abs(div * val - c) ** 2
    phi_norm = phi.l2_norm()
    return SolveReport(
        psi=psi, obstruction=ob, rest=rest,
        linearization_error_bound=0.0,
        residual_measured=math.sqrt(residual),
        psi_norm_measured=psi.l2_norm(),
        envelope_declared=K * max(N_prime, 1.0) ** 3 * phi_norm)


# ---------------------------------------------------------------------------
# Multi-stage solver over a KAM trace
# ---------------------------------------------------------------------------

def _frame_in(step: StepRecord, f: HarmonicFunction) -> HarmonicFunction:
    """Express f in the frame of the given step: rotate by the
    diagonalizing frame (u -> D^{-1} u)."""
    return hm.rotate_frame(algebra.inv(step.frame), f)


def _shift_out_of(step: StepRecord, f: HarmonicFunction) -> HarmonicFunction:
    """Apply the step's torus reduction (u -> H(x)^{-1} u with frequency
    m_shift / 2) after solving in its frame."""
    m_shift = step.B_descriptor - 1 if step.lifted else step.B_descriptor
    if m_shift % 2 != 0:
        raise ValueError("reduction shift must be even")
    if m_shift == 0:
        return f
    return hm.conjugate_by_torus_map(m_shift // 2, f)


def _undo_stage(step: StepRecord, f: HarmonicFunction) -> HarmonicFunction:
    """Inverse of the stage transformation _shift_out_of o _frame_in."""
    m_shift = step.B_descriptor - 1 if step.lifted else step.B_descriptor
    if m_shift != 0:
        f = hm.conjugate_by_torus_map(-(m_shift // 2), f)
    return hm.rotate_frame(step.frame, f)


def sphere_sample(count: int, seed: int = 7):
    """A deterministic sample of SU(2) points for exact residual measurement."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        pts.append(GroupElement(complex(v[0], v[1]), complex(v[2], v[3])))
    return pts


def measure_residual(trace: KamTrace, psi: HarmonicFunction,
                     phi: HarmonicFunction, m_max: int,
                     n_x: int = 32, n_u: int = 24) -> float:
    """max |psi o Phi - psi - phi| over a sample grid of T x S^3, with Phi
    the trace's original cocycle; restricted to coefficients with m <= m_max."""
    def cut(f):
        return HarmonicFunction(
            {key: v for key, v in f.coeffs.items() if key[1] <= m_max},
            f.M_max, f.k_band)
    psi_c, phi_c = cut(psi), cut(phi)
    orig = trace.original
    n_grid = tm.grid_size(orig.perturbation.band)
    G = tm.constant_group_map(orig.constant, n_grid).mul(
        tm.to_group(orig.perturbation, n_grid))
    us = sphere_sample(n_u)
    worst = 0.0
    stride = max(1, n_grid // n_x)
    for j in range(0, n_grid, stride):
        x = j / n_grid  # exact grid point of the sampled cocycle
        Ax = G.at(j)
        for u in us:
            val = (psi_c.evaluate(x + orig.alpha, algebra.mul(Ax, u))
                   - psi_c.evaluate(x, u) - phi_c.evaluate(x, u))
            worst = max(worst, abs(val))
    return worst


def solve_over_trace(trace: KamTrace, phi: HarmonicFunction, stages: int,
                     m_max: int):
    """Approximately solve psi o Phi - psi = phi by following the trace:
    stage i moves the unsolved remainder into the i-th KAM frame (rotation
    by the step frame, then the step's torus reduction), solves over the
    constant there, and carries obstruction + rest forward; the accumulated
    psi is returned in standard coordinates.

    Returns (psi, residual_by_stage): after each stage, the exact grid
    measurement of ||psi o Phi - psi - phi|| for honest traces, or the L^2
    mass of the unsolved remainder (frame-independent: every stage
    transformation is unitary) for synthetic traces, whose planted records
    have no grid realization at depth.  Raises BudgetExceeded when the
    frequency band would overrun phi.k_band.
    """
    if phi.get(0, 0, 0, 0) != 0:
        raise ValueError("phi must be mean-free")
    stages = min(stages, len(trace.steps))
    remainder = phi.copy()
    psi_total = HarmonicFunction({}, phi.M_max, phi.k_band)
    undo_chain = []  # transformations from current frame back to standard
    residual_by_stage = []
    for i in range(stages):
        step = trace.steps[i]
        remainder = _frame_in(step, remainder)
        rep = solve_constant(step.angle, trace.original.alpha, remainder,
                             step.K, step.resonance.gap_bound
                             if step.resonance.gap_bound > 0 else step.N,
                             step.B_descriptor)
        # Pull the stage solution back to standard coordinates.
        psi_std = hm.rotate_frame(step.frame, rep.psi)
        for undo in reversed(undo_chain):
            psi_std = undo(psi_std)
        psi_total = psi_total.plus(psi_std)
        # Carry the unsolved part into the next frame.
        remainder = _shift_out_of(step, rep.obstruction.plus(rep.rest))
        if any(abs(key[0]) > phi.k_band for key in remainder.coeffs):
            raise BudgetExceeded(
                f"band overrun at stage {i + 1}: reduce the stage count")
        undo_chain.append(
            (lambda s: (lambda g: _undo_stage(s, g)))(step))
        if trace.synthetic:
            residual_by_stage.append(remainder.l2_norm())
        else:
            residual_by_stage.append(
                measure_residual(trace, psi_total, phi, m_max))
    return psi_total, residual_by_stage


# ---------------------------------------------------------------------------
# Stability witness
# ---------------------------------------------------------------------------

def build_stability_witness(trace: KamTrace, m: int, count: int,
                            block_mass: float = 1.0) -> HarmonicFunction:
    """A sum of exact coboundaries phi = sum_i phi_i whose obstruction-block
    masses decay like N^{-nu_i} while the formal solutions keep L^2 mass
    block_mass on the frequency shells [N_{n_i}/2, 3 N_{n_i}/2].

    For each of the first `count` resonant steps with finite nu_i, the
    solution block psi_i sits on the exact-resonance modes
    (k = -(m - 2p) k_i / 2, p with m - 2p = +-2) of the step's frame, where
    the divisor modulus is |e^{4 i pi eps_i} - 1| ~ N^{-nu_i}; phi_i is its
    exact spectral coboundary, pulled back to standard coordinates.
    """
    if m % 2 != 0 or m < 2:
        raise ValueError("the witness block degree m must be even >= 2")
    usable = [s for s in trace.steps
              if s.resonant and s.B_descriptor != 0 and s.B_descriptor % 2 == 0
              and s.eps_param != 0.0 and math.isfinite(s.nu_exponent())]
    if len(usable) < count:
        raise InsufficientResonances(
            f"need {count} finite-nu even-mode resonant steps, trace has "
            f"{len(usable)}")
    alpha = trace.original.alpha
    phi = HarmonicFunction({}, max(hm.M_MAX_DEFAULT, m), hm.K_BAND_DEFAULT)
    amp = block_mass / math.sqrt(2.0)
    for idx in range(count):
        step = usable[idx]
        k_i = step.B_descriptor
        psi_i = HarmonicFunction({}, phi.M_max, phi.k_band)
        p_lo, p_hi = (m - 2) // 2, (m + 2) // 2  # m - 2p = +2 and -2
        psi_i.set(-k_i, m, 0, p_lo, amp)
        psi_i.set(+k_i, m, 0, p_hi, amp)
        # Exact coboundary over the step's constant frame.
        phi_i = hm.act_constant(step.angle, psi_i, alpha=alpha).plus(
            psi_i.scaled(-1.0))
        # Back to standard coordinates through the preceding stages.
        out = hm.rotate_frame(step.frame, phi_i)
        for j in range(trace.steps.index(step) - 1, -1, -1):
            out = _undo_stage(trace.steps[j], out)
        phi = phi.plus(out)
    return phi


def shell_mass(psi: HarmonicFunction, N: int, lo: float = 0.5,
               hi: float = 1.5) -> float:
    """L^2 mass of psi on the frequency shell [lo N, hi N]."""
    return math.sqrt(sum(abs(v) ** 2 for (k, m, j, p), v in psi.coeffs.items()
                         if lo * N <= abs(k) <= hi * N))
