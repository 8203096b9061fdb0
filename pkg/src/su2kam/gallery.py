"""Constructors for explicit cocycle families with planted significant
parameters.

Each family is assembled in the deepest frame and unwound outward: level i
prescribes a resonant mode k_i, a defect eps_i and a resonant coefficient
u_i such that the reduced constant after step i has exactly the eigenangle
the next planted resonance requires.  The plant is therefore exact by
construction, and the scheme's measured significant parameters can be
compared against it.

Double precision bounds how deep an honest chain can go: each resonance
multiplies the divisor threshold K, and the next mode's torus offset
|k alpha / 2|_Z must drop below 1/(2K) to remain detectable, which squares
the required denominator of alpha per level.  The slot search below walks
the real continued fraction of alpha under those constraints; plans deeper
than the feasible prefix are realized as synthetic traces whose records
carry the same planted parameters on the scheduled (N_n, K_n) ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import algebra, torusmaps as tm
from .algebra import GroupElement, IDENTITY
from .arithmetic import (SQRT2_MINUS_1, DiophantineParams, PrecisionExhausted,
                         ResonanceReport, expand, fold)
from .harmonics import xi_set
from .kam import K_ABORT, Cocycle, KamParams, KamTrace, StepRecord

FAMILIES = ("ResonantChain", "SobolevReducible", "DueCandidate",
            "StableOrthogonal", "DegenerateDue")

_SCAN_LIMIT = 5_000_000  # largest N the resonance scan can hold in memory


class PlanInfeasible(ValueError):
    """The requested plant violates a detection or smallness constraint."""


@dataclass
class PlannedStep:
    """Ground truth for one planted resonance.

    ``angle`` is the eigenangle t_i of the step's constant, ``b`` the torus
    offset |k alpha / 2|_Z it sits on, ``eps`` the signed defect (turns),
    ``coeff`` the resonant coefficient in turn units (u_i / 2 pi), ``frame``
    the canonical frame diagonalizing the step's constant, and ``A_red``
    the reduced constant the step leaves behind.
    """

    n: int
    N: int
    K: float
    k: int
    b: float
    angle: float
    eps: float
    coeff: complex
    zeta: float
    delta: float
    frame: GroupElement
    A_red: GroupElement
    t_next: float

    def u(self) -> float:
        """Resonant coefficient in radians."""
        return 2.0 * math.pi * abs(self.coeff)


@dataclass
class GalleryPlan:
    family: str
    alpha: float
    alpha_descriptor: Optional[str]
    params: KamParams
    steps: list                      # full planted sequence (may be synthetic)
    honest_steps: list               # prefix realizable as an actual cocycle
    final_angle: float
    sigma: Optional[float] = None
    s0: Optional[float] = None
    m_schedule: Optional[list] = None
    distances: Optional[list] = None  # planted |cos^2 zeta - root| per step

    @property
    def depth(self) -> int:
        return len(self.steps)

    @property
    def realized_depth(self) -> int:
        return len(self.honest_steps)

    def synthesize_trace(self, original: Optional[Cocycle] = None) -> KamTrace:
        """A KamTrace whose records carry the planted parameters verbatim.

        Used for plan depths beyond what double precision realizes as an
        actual cocycle; marked synthetic so downstream consumers can fall
        back to spectral (rather than pointwise) residual measurements.
        """
        if original is None:
            if self.honest_steps:
                original = assemble(self.alpha, self.honest_steps,
                                    self.alpha_descriptor)
            else:
                a1 = self.steps[0].angle if self.steps else self.final_angle
                original = Cocycle(self.alpha,
                                   GroupElement(np.exp(2j * np.pi * a1), 0.0),
                                   tm.zero_map(4), self.alpha_descriptor)
        records = []
        dioph = self.params.dioph
        for i, st in enumerate(self.steps):
            gap = ((dioph.gamma / (1.0 + st.K * 2.0 * abs(st.eps)))
                   ** (1.0 / dioph.tau)) * st.N ** (self.params.nu / dioph.tau)
            report = ResonanceReport(
                resonant_mode=st.k, epsilon=2.0 * abs(st.eps),
                epsilon_signed=2.0 * st.eps, gap_bound=gap, N=st.N,
                K=float(st.K), nu=self.params.nu, active_bound="synthetic")
            u_next = self.steps[i + 1].u() if i + 1 < len(self.steps) else 0.0
            records.append(StepRecord(
                n=st.n, N=st.N, K=float(st.K), angle=st.angle, frame=st.frame,
                resonance=report, resonant_coeff=complex(st.coeff),
                eps_param=st.eps, zeta=st.zeta, Y=tm.zero_map(4),
                B_descriptor=st.k, lifted=False, parity=0, A_next=st.A_red,
                norm_before=st.u(), norm_after=u_next,
                norm_l2_before=st.u(), residual=0.0))
        final = Cocycle(self.alpha,
                        GroupElement(np.exp(2j * np.pi * self.final_angle), 0.0),
                        tm.zero_map(4), self.alpha_descriptor)
        return KamTrace(self.params, original, records, final,
                        stop_reason="synthetic plan", synthetic=True)


# ---------------------------------------------------------------------------
# Level parameters: given the eigenangle the next resonance requires and the
# planted zeta, recover the exact (eps, u) of the reduced constant
# {e^{2 i pi eps}, 0} exp{0, u e^{i phase}}, whose eigenangle is
# arccos(cos(2 pi eps) cos u) / 2 pi.
# ---------------------------------------------------------------------------

def solve_level(t_next: float, zeta: float, eps_sign: float = 1.0,
                phase: float = 0.0):
    """(eps, u, A_red) with eigenangle(A_red) = t_next and
    0.5 atan2(u / 2 pi, |eps|) = zeta exactly."""
    if not (0.0 < t_next < 0.5):
        raise PlanInfeasible(f"eigenangle target {t_next!r} outside (0, 1/2)")
    if not (0.0 <= zeta <= math.pi / 4.0 + 1e-12):
        raise PlanInfeasible(f"zeta {zeta!r} outside [0, pi/4]")
    T = math.tan(2.0 * zeta)
    if T < 1e-8:
        eps, u = t_next, 0.0
    elif T > 1e8 or zeta >= math.pi / 4.0 - 1e-12:
        # Near-orthogonal limit: the coefficient carries the whole angle; at
        # pi/4 exactly the defect is identically zero.
        u = 2.0 * math.pi * t_next
        eps = 0.0 if zeta >= math.pi / 4.0 - 1e-15 else t_next / T
    else:
        # Versine form of cos(2 pi t) = cos(2 pi e) cos(u): full precision
        # down to eigenangles at the roundoff floor.
        st = math.sin(math.pi * t_next) ** 2

        def g(e):
            return st - math.sin(math.pi * e) ** 2 \
                - math.cos(2.0 * math.pi * e) * math.sin(math.pi * e * T) ** 2

        lo, hi = 0.0, t_next
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if g(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        eps = 0.5 * (lo + hi)
        u = 2.0 * math.pi * eps * T
    eps *= math.copysign(1.0, eps_sign)
    A_red = algebra.mul(GroupElement(np.exp(2j * np.pi * eps), 0.0),
                        algebra.exp_alg(algebra.AlgebraElement(
                            0.0, u * np.exp(1j * phase))))
    return eps, u, A_red


# ---------------------------------------------------------------------------
# Honest resonance slots from the real arithmetic of alpha.
# ---------------------------------------------------------------------------

def resonance_slots(alpha, params: KamParams, depth: int,
                    margin: float = 0.6):
    """Scheduled steps (n, N, K) paired with modes k = +-2 q_m of alpha that
    the scheme can actually detect in sequence.

    After a resonance at threshold K, the next mode's torus offset beta must
    satisfy 2 beta < margin / K; the search stops when the divisor floor,
    the scan memory bound, or the roundoff of k * alpha blocks detection.
    """
    cf = _expand_safe(alpha, 64)
    a_val = cf.alpha
    sched = params.schedule(params.n_max)
    slots = []
    K_prev = None
    n_prev = 0
    # First slot: prefer the largest denominator fitting the first scale.
    first = [j for j in range(len(cf.q)) if 2 * cf.q[j] <= sched[0][0]]
    order = list(reversed(first)) + list(range(len(first), len(cf.q)))
    pos = 0
    while len(slots) < depth and pos < len(order):
        m = order[pos]
        q, beta = cf.q[m], cf.beta[m]
        if K_prev is not None and not (2.0 * beta < margin / K_prev
                                       and 2 * q > sched[n_prev - 1][0]):
            pos += 1
            continue
        k = 2 * q * (1 if m % 2 == 0 else -1)  # sign of fold(q alpha)
        hit = None
        for n in range(n_prev + 1, len(sched) + 1):
            N, K = sched[n - 1]
            if N >= 2 * q:
                hit = (n, N, K)
                break
        if hit is None:
            break
        n, N, K = hit
        if K > K_ABORT or N > _SCAN_LIMIT:
            break
        # The defect at this slot must survive the roundoff of k * alpha.
        if 2 * q * 8.0 * np.finfo(float).eps > 0.1 * margin / K:
            break
        # While this level's constant (angle ~ beta) waits for its scale, no
        # competitor mode may come within the scan threshold; the planted
        # defect can shift the angle by up to the next level's offset bound.
        slack = margin / K
        ok = True
        for nn in range(n_prev + 1, n + 1):
            Nn, Kn = sched[nn - 1]
            gap = _competitor_gap(beta, a_val, Nn, exclude=abs(k))
            if gap < 1.25 / Kn + slack:
                ok = False
                break
        if not ok:
            pos += 1
            continue
        slots.append({"n": n, "N": N, "K": K, "k": k, "b": beta, "q": q})
        K_prev, n_prev = K, n
        order = list(range(m + 1, len(cf.q)))
        pos = 0
    return slots


def _competitor_gap(a: float, alpha: float, N: int, exclude: int) -> float:
    """min over 0 < |k| <= N, |k| != exclude of |2a - k alpha|_Z."""
    k = np.arange(1, N + 1)
    k = k[k != exclude]
    if len(k) == 0:
        return math.inf
    gaps = []
    for kk in (k, -k):
        x = 2.0 * a - kk * alpha
        gaps.append(float(np.min(np.abs(x - np.round(x)))))
    return min(gaps)


def _expand_safe(alpha, depth):
    try:
        return expand(alpha, depth)
    except PrecisionExhausted:
        return expand(alpha, 30)


def _alpha_value(alpha):
    if hasattr(alpha, "value"):
        return alpha.value(), f"surd:({alpha.p},{alpha.q},{alpha.d},{alpha.r})"
    return float(alpha), None


# ---------------------------------------------------------------------------
# Backward parameter pass and forward grid assembly.
# ---------------------------------------------------------------------------

def plan_steps(slots, zetas, final_angle, eps_signs=None, phases=None,
               adjust_offsets=False):
    """PlannedStep list from slots and zeta targets, solved deepest-first.

    The eigenangle left by step i is exactly what step i+1's resonance
    requires; frames are the canonical diagonalizing frames of the reduced
    constants, so the scheme recovers them verbatim.

    With adjust_offsets (synthetic plans only) the slot offsets b_i are
    retuned during the backward pass so that the planted resonance stays
    unique (2 a K > 1, keeping mode 0 above the detection threshold) while
    the defect stays detectable (2 |eps| K < 1); honest slots carry the
    arithmetic offsets of alpha and must not be touched.
    """
    d = len(slots)
    if len(zetas) != d:
        raise PlanInfeasible("need one zeta per slot")
    eps_signs = eps_signs or [1.0] * d
    phases = phases or [0.0] * d
    t_target = final_angle
    frames = [IDENTITY] * (d + 1)
    out = [None] * d
    for i in range(d - 1, -1, -1):
        sl = slots[i]
        eps, u, A_red = solve_level(t_target, zetas[i], eps_signs[i], phases[i])
        diag = algebra.diagonalize(A_red)
        if abs(diag.angle - t_target) > 1e-13 + 1e-10 * t_target:
            raise PlanInfeasible(
                f"level {i + 1}: eigenangle {diag.angle} misses {t_target}")
        frames[i + 1] = diag.frame
        if adjust_offsets:
            sl["b"] = max(0.05 / sl["K"], 0.6 / sl["K"] - abs(eps))
        angle = sl["b"] + eps
        if not (0.0 < angle < 0.5):
            raise PlanInfeasible(f"level {i + 1}: constant angle {angle} folds")
        if 2.0 * abs(eps) >= 1.0 / sl["K"]:
            raise PlanInfeasible(
                f"level {i + 1}: defect {2 * abs(eps):.3g} not below "
                f"1/K = {1.0 / sl['K']:.3g}")
        delta = u / abs(eps) if eps != 0.0 else math.inf
        out[i] = PlannedStep(
            n=sl["n"], N=sl["N"], K=sl["K"], k=sl["k"], b=sl["b"],
            angle=angle, eps=eps,
            coeff=(u / (2.0 * math.pi)) * np.exp(1j * phases[i]),
            zeta=0.5 * math.atan2(u / (2.0 * math.pi), abs(eps)),
            delta=delta, frame=IDENTITY, A_red=A_red, t_next=t_target)
        t_target = angle
    for i in range(d):
        out[i].frame = frames[i]
    return out


def assemble(alpha, steps, alpha_descriptor=None) -> Cocycle:
    """Unwind the planted levels outward into a single smooth cocycle.

    Level i wraps the deeper cocycle C as D_i^* (H_i(.+alpha)^{-1} C H_i) D_i
    with H_i(.) = {e^{-i pi k_i .}, 0}; the innermost factor is the last
    reduced constant.  The result's constant part is diagonal and its
    perturbation is recovered as an exact grid logarithm.
    """
    alpha = float(alpha)
    if not steps:
        raise PlanInfeasible("assemble needs at least one planted level")
    band = sum(abs(s.k) for s in steps) + 16
    n = tm.grid_size(band)
    C = tm.constant_group_map(steps[-1].A_red, n)
    for i in range(len(steps) - 1, -1, -1):
        s = steps[i]
        H_sh = tm.torus_exponential(s.k, n, offset=alpha)
        H_0 = tm.torus_exponential(s.k, n)
        C = H_sh.inv().mul(C).mul(H_0)
        if i > 0:
            D = s.frame
            C = tm.constant_group_map(algebra.inv(D), n).mul(C).mul(
                tm.constant_group_map(D, n))
    A1 = GroupElement(np.exp(2j * np.pi * steps[0].angle), 0.0)
    Rm = tm.constant_group_map(algebra.inv(A1), n).mul(C)
    t, u = algebra.log_arrays(Rm.z, Rm.w, strict=False)
    F = tm.AlgebraMap(band, tm.project_channel(t.astype(complex), band),
                      tm.project_channel(u, band))
    return Cocycle(alpha, A1, F, alpha_descriptor)


def _check_gates(steps, params: KamParams):
    """The smallness conditions the scheme will apply to the assembled
    cocycle; raise PlanInfeasible instead of letting the run die midway."""
    if not steps:
        return
    top = steps[0].u() * 1.25
    if top >= params.eps0:
        raise PlanInfeasible(
            f"top amplitude {top:.3g} violates the eps0 gate {params.eps0:g}")
    for s in steps:
        if params.c1 * s.K * s.u() * 1.5 >= 1.0:
            raise PlanInfeasible(
                f"step {s.n}: c1 K ||F|| = {params.c1 * s.K * s.u():.3g} "
                "leaves the smallness neighborhood")


# ---------------------------------------------------------------------------
# Synthetic slot ladders: one resonance per scheduled step, torus offsets
# placed just under the detection threshold.  Not realizable by the honest
# arithmetic of a Diophantine alpha at depth, but internally consistent with
# every per-record invariant the scheme asserts.
# ---------------------------------------------------------------------------

def synthetic_slots(params: KamParams, depth: int, offset_scale=None):
    sched = params.schedule(depth)
    if len(sched) < depth:
        raise PlanInfeasible("schedule shorter than the requested depth")
    slots = []
    for i, (N, K) in enumerate(sched):
        k = 2 * max(1, int(round(0.35 * N)))
        scale = offset_scale[i] if offset_scale is not None else 0.8
        # The torus offset must keep the planted resonance unique (2a > 1/K,
        # so mode 0 is not a second hit below the threshold) while the
        # (k = 0, m - 2p = +-2) divisor ~ 4 pi b of the constant solver
        # clears 1/K with margin.
        slots.append({"n": i + 1, "N": N, "K": K, "k": k,
                      "b": scale / K, "q": k // 2})
    return slots


def _zeta_from_delta(delta: float) -> float:
    return 0.5 * math.atan2(delta, 2.0 * math.pi)


def _zeta_from_cos2(x: float) -> float:
    if not (0.5 - 1e-15 <= x <= 1.0):
        raise PlanInfeasible(f"cos^2 zeta = {x!r} outside [1/2, 1]")
    return math.acos(math.sqrt(min(1.0, x)))


def _final_angle(slots) -> float:
    K_last = slots[-1]["K"]
    return 0.04 / K_last


# ---------------------------------------------------------------------------
# Families.
# ---------------------------------------------------------------------------

def _default_params(**overrides) -> KamParams:
    base = dict(N1=8, schedule_exponent=0.2, nu=1.2, n_max=12)
    base.update(overrides)
    return KamParams(**base)


def make_resonant_chain(alpha=SQRT2_MINUS_1, depth: int = 3, zetas=None,
                        deltas=None, params: Optional[KamParams] = None,
                        margin: float = 0.6):
    """A chain of planted resonances detectable by an honest scheme run.

    depth = 0 returns the constant cocycle.  zetas (or deltas, converted via
    delta = u / |eps|) default to a small decreasing profile with a clean
    (zeta = 0) deepest level.
    """
    params = params or _default_params()
    a_val, desc = _alpha_value(alpha)
    if depth == 0:
        c = Cocycle(a_val, GroupElement(np.exp(2j * np.pi * 0.23), 0.0),
                    tm.zero_map(4), desc)
        plan = GalleryPlan("ResonantChain", a_val, desc, params, [], [], 0.23)
        return c, plan
    slots = resonance_slots(alpha, params, depth, margin)
    if len(slots) < depth:
        raise PlanInfeasible(
            f"only {len(slots)} detectable resonance slots for this alpha "
            f"and schedule, {depth} requested")
    if deltas is not None:
        zetas = [_zeta_from_delta(d) for d in deltas]
    if zetas is None:
        zetas = [0.02 / (i + 1) for i in range(depth - 1)] + [0.0]
    steps = plan_steps(slots, zetas, _final_angle(slots))
    _check_gates(steps, params)
    cocycle = assemble(a_val, steps, desc)
    plan = GalleryPlan("ResonantChain", a_val, desc, params, steps, steps,
                       _final_angle(slots))
    return cocycle, plan


def make_sobolev(sigma: float, depth: int = 12, e=None,
                 alpha=SQRT2_MINUS_1, params: Optional[KamParams] = None,
                 honest_depth: int = 2):
    """Defect-to-coefficient ratios decaying like delta_i = N_i^{-sigma} e_i.

    The full-depth plant lives on the synthetic ladder; the honest prefix
    (as deep as the arithmetic of alpha allows) is assembled as an actual
    cocycle for round-trip validation.
    """
    params = params or _default_params(n_max=max(12, depth))
    a_val, desc = _alpha_value(alpha)
    if e is None:
        e = [0.5] * depth
    if len(e) != depth:
        raise PlanInfeasible("tail sequence e must have one entry per step")
    if any(x == 0.0 for x in e):
        raise PlanInfeasible("tail sequence requires e_i != 0")
    slots = synthetic_slots(params, depth)
    zetas = [_zeta_from_delta(sl["N"] ** (-sigma) * abs(e[i]))
             for i, sl in enumerate(slots)]
    steps = plan_steps(slots, zetas, _final_angle(slots),
                       adjust_offsets=True)
    honest = _honest_prefix(alpha, params, depth, sigma, e, honest_depth)
    plan = GalleryPlan("SobolevReducible", a_val, desc, params, steps, honest,
                       _final_angle(slots), sigma=sigma)
    cocycle = (assemble(a_val, honest, desc) if honest
               else Cocycle(a_val, GroupElement(np.exp(2j * np.pi *
                                                       steps[0].angle), 0.0),
                            tm.zero_map(4), desc))
    return cocycle, plan


def _honest_prefix(alpha, params, depth, sigma, e, honest_depth=2):
    slots = resonance_slots(alpha, params, min(depth, honest_depth))
    while slots:
        zetas = [_zeta_from_delta(sl["N"] ** (-sigma) * abs(e[i]))
                 for i, sl in enumerate(slots)]
        steps = plan_steps(slots, zetas, _final_angle(slots))
        try:
            _check_gates(steps, params)
        except PlanInfeasible:
            return []
        # Planted coefficients below the roundoff floor cannot round-trip.
        if all(s.u() > 1e-12 for s in steps):
            return steps
        slots = slots[:-1]
    return []


def make_due_candidate(m_max: int = 4, depth: int = 8,
                       distance_exponent: float = 12.0,
                       alpha=SQRT2_MINUS_1,
                       params: Optional[KamParams] = None):
    """cos^2 zeta_i planted a distance N_i^{-exponent} from a root of the
    projection factor p_{m_i/2}, cycling m_i over the even m <= m_max."""
    params = params or _default_params(n_max=max(12, depth))
    a_val, desc = _alpha_value(alpha)
    ms = [m for m in range(2, m_max + 1, 2)]
    if not ms:
        raise PlanInfeasible("need m_max >= 2")
    slots = synthetic_slots(params, depth)
    m_sched, dists, zetas = [], [], []
    for i, sl in enumerate(slots):
        m = ms[i % len(ms)]
        root = max(xi_set(m))
        d = sl["N"] ** (-distance_exponent)
        x = root + d if root < 0.5 + 1e-12 else root - d
        m_sched.append(m)
        dists.append(d)
        zetas.append(_zeta_from_cos2(x))
    steps = plan_steps(slots, zetas, _final_angle(slots),
                       adjust_offsets=True)
    plan = GalleryPlan("DueCandidate", a_val, desc, params, steps, [],
                       _final_angle(slots), m_schedule=m_sched,
                       distances=dists)
    cocycle = _prefix_or_constant(alpha, a_val, desc, params, steps, zetas)
    return cocycle, plan


def make_stable_orthogonal(depth: int = 8, alpha=SQRT2_MINUS_1,
                           params: Optional[KamParams] = None):
    """Vanishing defects with exactly orthogonal consecutive obstructions:
    zeta_i = pi/4, eps_i = 0 at every planted step.

    The default parameters use a steep divisor exponent (nu just above a
    large tau, small gamma) so that the band radius N' stays below the
    planted frequency k_i over the first stages, and the planted frequency
    repeats (k_i = 12 from the second step on) so that the mass spread by
    the pi/2 frame rotations always lands on multiples of 12: either back
    in the obstruction (q = 0) or outside the solvable band.  The
    cohomological residual then stagnates at the obstruction mass instead
    of leaking stage by stage.
    """
    params = params or _default_params(
        nu=3.2, dioph=DiophantineParams(0.015, 3.0), n_max=max(12, depth))
    a_val, desc = _alpha_value(alpha)
    slots = synthetic_slots(params, depth)
    for i, sl in enumerate(slots):
        sl["k"] = 6 if i == 0 else 12
        sl["q"] = sl["k"] // 2
    zetas = [math.pi / 4.0] * depth
    steps = plan_steps(slots, zetas, _final_angle(slots),
                       adjust_offsets=True)
    plan = GalleryPlan("StableOrthogonal", a_val, desc, params, steps, [],
                       _final_angle(slots))
    cocycle = _prefix_or_constant(alpha, a_val, desc, params, steps, zetas)
    return cocycle, plan


def make_degenerate_due(m: int = 2, s0: float = 6.0, depth: int = 8,
                        other_exponent: float = 18.0, m_max: int = 4,
                        alpha=SQRT2_MINUS_1,
                        params: Optional[KamParams] = None):
    """Distance to the m-block roots pinned at N^{-s0} on alternating steps,
    superpolynomially small for the other blocks."""
    params = params or _default_params(n_max=max(12, depth))
    a_val, desc = _alpha_value(alpha)
    others = [mm for mm in range(2, m_max + 1, 2) if mm != m] or [m]
    slots = synthetic_slots(params, depth)
    m_sched, dists, zetas = [], [], []
    for i, sl in enumerate(slots):
        if i % 2 == 0:
            mm, d = m, sl["N"] ** (-s0)
        else:
            mm, d = others[(i // 2) % len(others)], sl["N"] ** (-other_exponent)
        root = max(xi_set(mm))
        x = root + d if root < 0.5 + 1e-12 else root - d
        m_sched.append(mm)
        dists.append(d)
        zetas.append(_zeta_from_cos2(x))
    steps = plan_steps(slots, zetas, _final_angle(slots),
                       adjust_offsets=True)
    plan = GalleryPlan("DegenerateDue", a_val, desc, params, steps, [],
                       _final_angle(slots), s0=s0, m_schedule=m_sched,
                       distances=dists)
    cocycle = _prefix_or_constant(alpha, a_val, desc, params, steps, zetas)
    return cocycle, plan


def _prefix_or_constant(alpha, a_val, desc, params, steps, zetas):
    """Assemble an honest shallow cocycle with the family's angle profile if
    the gates admit one, else the truncation at depth zero (the constant)."""
    try:
        slots = resonance_slots(alpha, params, 1)
        if slots:
            prefix = plan_steps(slots, zetas[:1], _final_angle(slots))
            _check_gates(prefix, params)
            return assemble(a_val, prefix, desc)
    except PlanInfeasible:
        pass
    a1 = steps[0].angle if steps else 0.23
    return Cocycle(a_val, GroupElement(np.exp(2j * np.pi * a1), 0.0),
                   tm.zero_map(4), desc)


def make_contraction_cascade(alpha=SQRT2_MINUS_1):
    """A nonresonant cocycle whose scheme norms track the 1.5-power
    contraction envelope for four consecutive steps.

    Pure quadratic contraction from any admissible amplitude crosses the
    double-precision floor after two steps, so the spectrum is laid out in
    blocks between consecutive scheduled truncation radii: step n removes
    everything up to N_n and leaves the next block, sized just under
    ||F_n||^{3/2}.  The top block stops at mode 66 so that every convolution
    Y_i * F (band(Y_i) <= N_i <= 54 before the last step) stays inside the
    step-4 solving band N_4 = 120 and no debris survives above it.  The
    rotation angle maximizes the smallest divisor |2a - k alpha|_Z over the
    solved modes, keeping every scheduled step nonresonant and the step
    quadratics small.  Returns (cocycle, params); the params raise eps0 to
    admit the 2.4e-3 head the four-deep envelope needs.
    """
    params = KamParams(N1=16, eps0=5.0e-3)
    a_val, desc = _alpha_value(alpha)
    sched = params.schedule(4)
    Ns = [N for N, _ in sched]
    # Divisor-maximizing angle for alpha = sqrt(2) - 1 over |k| <= 120
    # (grid-searched; min |2a - k alpha|_Z = 2.1e-2 over |k| <= 16 and
    # above 2/K_n at every scheduled scale).
    angle = 0.14645
    masses = [2.4e-3, 8.0e-5, 5.5e-7, 2.0e-10]
    tops = [Ns[0], Ns[1], Ns[2], 66]
    band = tops[-1]
    F = tm.zero_map(band)
    blocks = [(1, tops[0], masses[0])] + \
        [(tops[i] + 1, tops[i + 1], masses[i + 1]) for i in range(3)]
    for lo, hi, mass in blocks:
        ks = range(lo, hi + 1)
        per = mass / (2 * len(ks))
        for k in ks:
            ph1 = complex(math.cos(1.7 * k), math.sin(2.3 * k))
            ph2 = complex(math.cos(0.9 * k), -math.sin(1.3 * k))
            F.set_z(k, per * ph1 / abs(ph1))
            F.set_z(-k, per * ph2 / abs(ph2))
    c = Cocycle(a_val, GroupElement(np.exp(2j * np.pi * angle), 0.0), F, desc)
    return c, params


def make_nonresonant(amplitude: float = 1.0e-4, band: int = 3,
                     angle: float = 0.1234, alpha=SQRT2_MINUS_1):
    """A generic multi-mode perturbation of a nonresonant constant; every
    scheme step on it is a plain quadratic-contraction step."""
    a_val, desc = _alpha_value(alpha)
    F = tm.zero_map(band)
    for k in range(-band, band + 1):
        # Fixed pseudo-random-ish phases; deterministic by construction.
        c = amplitude * math.cos(1.7 * k + 0.3) / (1.0 + k * k)
        s = amplitude * math.sin(2.3 * k - 0.7) / (2.0 + abs(k))
        F.set_z(k, c + 1j * s)
        if k >= 0:
            F.set_t(k, 0.5 * amplitude * math.sin(1.1 * k + 0.2) / (1.0 + k))
    return Cocycle(a_val, GroupElement(np.exp(2j * np.pi * angle), 0.0),
                   F, desc)
