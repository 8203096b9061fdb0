"""The KAM conjugation step, the scheme driver, normal forms and the
significant-parameter sequence.

One step conjugates (alpha, A e^{F}) by G(.) = H(.) e^{Y(.)} D, where D is
the constant diagonalizing A, Y solves the truncated linearized equation in
the diagonal frame, and H(.) = {e^{-i pi m .}, 0} reduces a resonant mode
(m = k_r, or k_r - 1 composed with the half-turn geodesic when k_r is odd,
which keeps the total conjugation 1-periodic).  The next perturbation is
recovered exactly as the pointwise logarithm of the conjugated product, so
the conjugation identity holds on the grid to roundoff; the quadratic
estimates are demoted to test assertions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import algebra, torusmaps as tm
from .algebra import GroupElement
from .arithmetic import (ContinuedFraction, DiophantineParams, ResonanceReport,
                         DoubleResonance, find_resonance, fold,
                         resonance_hypothesis_K)
from .torusmaps import AlgebraMap, GroupMap


class SmallnessViolated(ValueError):
    """The step's smallness gate failed: the conjugation would not be small."""


class LogBranch(ArithmeticError):
    """The recovered perturbation leaves the principal branch."""


class TailDivergence(ArithmeticError):
    """The normal-form tail product is not Cauchy: invalid trace."""


K_ABORT = 1.0e12  # divisors below 1/K_ABORT are unresolvable in doubles


@dataclass(frozen=True)
class KamParams:
    N1: int = 8
    schedule_exponent: float = 0.2
    nu: float = 2.0
    dioph: DiophantineParams = field(default_factory=lambda: DiophantineParams(4.0, 1.0))
    eps0: float = 1.0e-3
    s0: int = 10
    n_max: int = 20
    c1: float = 1.0
    roundoff_floor: float = 1.0e-15  # stop once ||F||_0 is numerical noise

    def __post_init__(self):
        if not (self.nu > self.dioph.tau):
            raise ValueError("need nu > tau")
        if self.N1 < 2 or not (0.0 < self.schedule_exponent < 1.0):
            raise ValueError("need N1 >= 2 and schedule_exponent in (0,1)")
        if not (0.0 < self.eps0 < 1.0):
            raise ValueError("need eps0 in (0,1)")

    def schedule(self, n_steps: int):
        """(N_n, K_n) pairs; K_n is N_n^nu raised to the uniqueness bound of
        the resonance lemma whenever that is stricter."""
        out = []
        N = float(self.N1)
        for _ in range(n_steps):
            Nn = int(round(N))
            K = max(Nn ** self.nu, resonance_hypothesis_K(self.dioph, Nn))
            out.append((Nn, K))
            N = N ** (1.0 + self.schedule_exponent)
        return out


@dataclass
class Cocycle:
    """(alpha, A e^{F(.)})."""

    alpha: float
    constant: GroupElement
    perturbation: AlgebraMap
    alpha_descriptor: Optional[str] = None

    def copy(self) -> "Cocycle":
        return Cocycle(self.alpha, self.constant, self.perturbation.copy(),
                       self.alpha_descriptor)


@dataclass
class StepRecord:
    n: int
    N: int
    K: float
    angle: float                      # diagonal angle a of the step's constant
    frame: GroupElement               # D with D A D* diagonal
    resonance: ResonanceReport
    resonant_coeff: complex           # Fhat_z(k_r) in turn units (coeff / 2 pi)
    eps_param: float                  # signed defect of the reduced constant
    zeta: float                       # 0.5 atan |resonant_coeff / eps_param|
    Y: AlgebraMap                     # solved in the diagonal frame
    B_descriptor: int                 # k_r (0 when no reduction)
    lifted: bool                      # odd k_r: half-turn geodesic applied
    parity: int                       # 0/1: reduced constant near +/- Id
    A_next: GroupElement
    norm_before: float
    norm_after: float
    norm_l2_before: float
    residual: float                   # pointwise conjugation identity defect

    @property
    def resonant(self) -> bool:
        return self.resonance.resonant_mode is not None

    def nu_exponent(self) -> float:
        """nu_i = -log|eps_i| / log N_{n_i} (+inf when eps_i = 0)."""
        if self.eps_param == 0.0:
            return math.inf
        return -math.log(abs(self.eps_param)) / math.log(self.N)

    def delta(self) -> float:
        """delta_i = ||F_i||_{L^2} / |eps_i| (inf when eps_i = 0)."""
        if self.eps_param == 0.0:
            return math.inf
        return self.norm_l2_before / abs(self.eps_param)


@dataclass
class KamTrace:
    params: KamParams
    original: Cocycle
    steps: list
    final: Cocycle
    stop_reason: str = "completed"
    preconjugation: Optional[GroupMap] = None
    synthetic: bool = False

    def resonant_steps(self):
        return [s for s in self.steps if s.resonant and s.B_descriptor != 0]


def kam_step(c: Cocycle, N: int, K: float, params: KamParams):
    """One conjugation step at scale (N, K).  Returns (StepRecord, Cocycle).

    Raises SmallnessViolated when c1 * K * ||F||_0 >= 1 or when the solved
    conjugation generator is not small; DoubleResonance propagates from the
    scan; LogBranch if the conjugated product leaves the principal branch.
    """
    F = c.perturbation
    eps_c0 = tm.norm_c0_upper(F)
    if params.c1 * K * eps_c0 >= 1.0:
        raise SmallnessViolated(
            f"c1*K*||F||_0 = {params.c1 * K * eps_c0:.3g} >= 1 at N={N}")

    diag = algebra.diagonalize(c.constant)
    a, D = diag.angle, diag.frame
    F_diag = tm.adjoint_constant(D, F)

    resonance = find_resonance(a, c.alpha, N, K, params.dioph, params.nu)
    k_r = resonance.resonant_mode if resonance.resonant_mode is not None else 0

    Y = tm.solve_diagonal(F_diag, c.alpha, N)
    Y = Y.plus(tm.solve_offdiagonal(F_diag, c.alpha, a, N, resonance))
    y_norm = tm.norm_c0_upper(Y)
    if y_norm > 0.5:
        raise SmallnessViolated(f"||Y||_0 = {y_norm:.3g} > 1/2 at N={N}")

    # Reduction descriptor: even k_r shifts by k_r; odd k_r is composed with
    # the half-turn geodesic C(.), C(1) = -Id, leaving a 1-periodic total
    # conjugation that shifts by k_r - 1.
    lifted = bool(k_r % 2)
    m_shift = k_r - 1 if lifted else k_r

    band_next = F_diag.band + abs(m_shift) + 32
    n = tm.grid_size(band_next)

    # Pointwise product H(x+alpha) e^{Y(x+alpha)} diag(a) e^{F_diag(x)}
    #                   e^{-Y(x)} H(x)^{-1}.
    E_shift = tm.to_group(Y, n, offset=c.alpha)
    E0 = tm.to_group(Y, n)
    A_diag = tm.constant_group_map(GroupElement(np.exp(2j * np.pi * a), 0.0), n)
    EF = tm.to_group(F_diag, n)
    P = E_shift.mul(A_diag).mul(EF).mul(E0.inv())
    if m_shift != 0:
        H_shift = tm.torus_exponential(m_shift, n, offset=c.alpha)
        H0 = tm.torus_exponential(m_shift, n)
        P = H_shift.mul(P).mul(H0.inv())

    # Predicted next constant: the reduced diagonal phase, the absorbed
    # t-channel mean, and (for an even reduction) the resonant obstruction.
    t_mean = F_diag.t_coeff(0).real
    a_shift = a - m_shift * c.alpha / 2.0 + t_mean / (2.0 * math.pi)
    # Signed defect from the (half-)resonance; an odd reduction leaves a
    # structural alpha/2 offset in the constant which is not part of it.
    eps_param = fold(2.0 * a_shift - (k_r - m_shift) * c.alpha) / 2.0
    parity = 0 if abs(fold(a_shift) - eps_param) < 0.25 else 1
    coeff_raw = (F_diag.z_coeff(k_r)
                 if resonance.resonant_mode is not None else 0.0)
    # An odd reduction leaves the obstruction at frequency 1 inside F_next
    # rather than in the constant.
    obstruction = 0.0 if lifted else coeff_raw
    A_pred = algebra.mul(
        GroupElement(np.exp(2j * np.pi * a_shift), 0.0),
        algebra.exp_alg(algebra.AlgebraElement(0.0, obstruction)))

    # Exact recovery of the next perturbation.
    Rm = tm.constant_group_map(algebra.inv(A_pred), n).mul(P)
    t, u = algebra.log_arrays(Rm.z, Rm.w, strict=False)
    r = np.sqrt(t ** 2 + np.abs(u) ** 2)
    if np.max(r) > 3.0:
        raise LogBranch(f"recovered perturbation has |log| up to {np.max(r):.3g}")
    F_next = AlgebraMap(band_next,
                        tm.project_channel(t.astype(complex), band_next),
                        tm.project_channel(u, band_next))
    F_next.tail_bound = F.tail_bound  # untruncated content carried forward

    # Residual of the conjugation identity on the grid.
    check = tm.constant_group_map(A_pred, n).mul(tm.to_group(F_next, n))
    residual = check.dist_c0(P)

    record = StepRecord(
        n=0, N=N, K=float(K), angle=a, frame=D, resonance=resonance,
        resonant_coeff=complex(coeff_raw) / (2.0 * math.pi),
        eps_param=eps_param,
        zeta=0.5 * math.atan2(abs(coeff_raw) / (2.0 * math.pi),
                              abs(eps_param)),
        Y=Y, B_descriptor=k_r, lifted=lifted, parity=parity, A_next=A_pred,
        norm_before=eps_c0, norm_after=tm.norm_c0_upper(F_next),
        norm_l2_before=tm.norm_l2(F_diag), residual=residual)
    return record, Cocycle(c.alpha, A_pred, F_next, c.alpha_descriptor)


def run_scheme(c: Cocycle, params: KamParams) -> KamTrace:
    """Iterate kam_step with N_{n+1} = N_n^{1+sigma}, K_n = N_n^nu.

    The driver stops cleanly (reason recorded) on the first precondition
    failure, on divisor exhaustion (K_n > 1e12), or after n_max steps;
    scheme exhaustion is data, not failure.
    """
    eps = tm.norm_c0_upper(c.perturbation)
    if eps >= params.eps0:
        return KamTrace(params, c.copy(), [], c.copy(),
                        stop_reason=f"initial ||F||_0 = {eps:.3g} >= eps0")
    cur = c.copy()
    steps = []
    reason = "n_max reached"
    for n, (N, K) in enumerate(params.schedule(params.n_max), start=1):
        if K > K_ABORT:
            reason = f"K_{n} = {K:.3g} beyond the double-precision divisor floor"
            break
        try:
            rec, cur = kam_step(cur, N, K, params)
        except SmallnessViolated as e:
            reason = f"smallness violated at step {n}: {e}"
            break
        except DoubleResonance as e:
            reason = f"double resonance at step {n}: {e}"
            break
        except LogBranch as e:
            reason = f"log branch left at step {n}: {e}"
            break
        rec.n = n
        steps.append(rec)
        if rec.lifted and abs(rec.B_descriptor) == 1:
            # A mode-(+-1) resonance of a half-turn-shifted constant cannot be
            # reduced by a periodic conjugation: the lift is the identity and
            # the obstruction would recur at every scale.
            reason = f"parity obstruction at half-resonance (step {n})"
            break
        if rec.norm_after < params.roundoff_floor:
            reason = f"perturbation at roundoff after step {n}"
            break
    else:
        reason = "n_max reached"
    return KamTrace(params, c.copy(), steps, cur, stop_reason=reason)


def _step_shift(s: StepRecord) -> int:
    """Torus frequency (in full turns) of the step's reduction conjugation."""
    return s.B_descriptor - 1 if s.lifted else s.B_descriptor


def _torus_factors_before(trace: KamTrace, j: int, n: int) -> GroupMap:
    """Product of the constant/torus factors of steps 1..j-1 plus the frame
    of step j, i.e. everything right of e^{Y_j} in the total conjugation."""
    T = tm.constant_group_map(trace.steps[j].frame, n)
    for i in range(j - 1, -1, -1):
        s = trace.steps[i]
        m = _step_shift(s)
        if m != 0:
            T = T.mul(tm.torus_exponential(m, n))
        T = T.mul(tm.constant_group_map(s.frame, n))
    return T


def normal_form(trace: KamTrace):
    """Split the accumulated conjugation into a converging exp-tail D(.) and
    the resonant reductions.

    Returns (D, reduced_trace): conjugating the original cocycle by D and
    replaying the scheme leaves only second-order step generators besides
    the torus reductions.  Raises TailDivergence when the tail product is
    not Cauchy on the grid (C^0 ratio above 1/2 after the first resonance).
    """
    if not trace.steps:
        return None, trace
    band = (max(s.Y.band for s in trace.steps)
            + sum(abs(_step_shift(s)) for s in trace.steps))
    n = tm.grid_size(band)
    norms = [tm.norm_c0_upper(s.Y) for s in trace.steps]
    first_res = next((i for i, s in enumerate(trace.steps) if s.resonant), None)
    if first_res is not None:
        for i in range(first_res + 1, len(norms)):
            # Generators at or below the replay noise scale (1e-9, the same
            # tolerance the reduced trace is held to) carry no evidence of
            # divergence: they are solver roundoff, not tail mass.
            if norms[i] > 0.5 * norms[i - 1] and norms[i] > 1e-9:
                raise TailDivergence(
                    f"||Y_{i + 1}||/||Y_{i}|| = {norms[i] / max(norms[i - 1], 1e-300):.3g}"
                    " exceeds 1/2 after the first resonance")
    # D = prod_{j=n..1} T_j^{-1} e^{Y_j} T_j, where T_j collects every
    # constant/torus factor standing right of e^{Y_j}.
    D = None
    for j in range(len(trace.steps) - 1, -1, -1):
        T = _torus_factors_before(trace, j, n)
        Ej = T.inv().mul(tm.to_group(trace.steps[j].Y, n)).mul(T)
        D = Ej if D is None else D.mul(Ej)
    D.band = band
    # Conjugate the original cocycle by D and replay the scheme.
    orig = trace.original
    Dshift = _translate_group_map(D, orig.alpha, band, n)
    A0 = tm.constant_group_map(orig.constant, n)
    P = Dshift.mul(A0).mul(tm.to_group(orig.perturbation, n)).mul(D.inv())
    Rm = tm.constant_group_map(algebra.inv(orig.constant), n).mul(P)
    t, u = algebra.log_arrays(Rm.z, Rm.w, strict=False)
    Fd = AlgebraMap(band, tm.project_channel(t.astype(complex), band),
                    tm.project_channel(u, band))
    pre = Cocycle(orig.alpha, orig.constant, Fd, orig.alpha_descriptor)
    reduced = run_scheme(pre, trace.params)
    reduced.preconjugation = D
    return D, reduced


def _translate_group_map(G: GroupMap, alpha: float, band: int, n: int) -> GroupMap:
    """Evaluate a sampled SU(2) map at x + alpha by spectral interpolation of
    its components (valid because every factor entering G is band-limited)."""
    ph_z = tm.project_channel(G.z, band)
    ph_w = tm.project_channel(G.w, band)
    z = tm.eval_channel(ph_z, band, n, offset=alpha)
    w = tm.eval_channel(ph_w, band, n, offset=alpha)
    return GroupMap(z, w, band)


def significant_params(trace: KamTrace):
    """The (k_i, eps_i, |Fhat_i(k_i)|, zeta_i, nu_i, frame) sequence over the
    resonant steps."""
    out = []
    for s in trace.steps:
        if not s.resonant or s.resonance.resonant_mode == 0:
            # A mode-0 hit absorbs its obstruction into the constant but
            # performs no reduction; it carries no significant parameter.
            continue
        if s.norm_l2_before <= trace.params.roundoff_floor:
            # No perturbation content at the reduction (constant-only
            # resonance): nothing significant to report.
            continue
        out.append({
            "n": s.n,
            "N": s.N,
            "k": s.resonance.resonant_mode,
            "eps": s.eps_param,
            "coeff": abs(s.resonant_coeff),
            "zeta": s.zeta,
            "nu": s.nu_exponent(),
            "delta": s.delta(),
            "frame": s.frame,
            "angle": s.angle,
        })
    return out
