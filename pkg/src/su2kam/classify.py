"""Reducibility verdicts and asymptotic-condition estimates over KAM traces.

The flowchart: a trace with no reduced resonances converges in C^infinity;
otherwise the series delta_i = ||F_i||_{L^2} / |eps_i| measured at the
resonant steps decides the optimal Sobolev index sigma of a reducing
conjugation (delta in the weighted space h^sigma iff the index works), and
a delta series with no decay at all admits no conjugation in any H^s.  The
conjugation itself is assembled from the trace's reduction descriptors and
frames, and the infinite-limit conditions (uniform ellipticity, distance of
the frame angles to the Legendre roots, the stability trichotomy) are
estimated from the finite trace with explicit confidence annotations:
everything reported here is evidence for, never proof of, an asymptotic
statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import algebra, torusmaps as tm
from .harmonics import xi_set
from .kam import KamTrace, _step_shift

# Distances of cos^2(zeta) to a root cannot be resolved below the roundoff
# of cos^2 near 1/2; exponent estimates treat anything smaller as "at the
# floor" rather than inventing digits.
DISTANCE_FLOOR = 1e-17

# Slope below which the delta series is considered non-decaying.
_FLAT_SLOPE = 0.05


class NotApplicable(ValueError):
    """The requested construction needs a (Sobolev-)reducible trace."""


@dataclass
class Classification:
    """Verdict of the reducibility flowchart.

    verdict is one of "SmoothlyReducible", "SobolevReducible",
    "NotReducible", "Inconclusive"; sigma_hat and confidence (an interval)
    are present exactly for SobolevReducible; evidence carries the
    regression diagnostics that produced the verdict.
    """

    verdict: str
    sigma_hat: Optional[float] = None
    confidence: Optional[tuple] = None
    reason: Optional[str] = None
    delta_series: list = field(default_factory=list)
    evidence: dict = field(default_factory=dict)


def _weighted_slope(x, y, w):
    """Weighted least-squares slope of y against x with its standard error."""
    x, y, w = np.asarray(x), np.asarray(y), np.asarray(w)
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    resid = y - ym - slope * (x - xm)
    dof = max(1, len(x) - 2)
    se = math.sqrt(float(np.sum(w * resid ** 2)) / dof / float(sxx))
    return float(slope), se


def classify(trace: KamTrace) -> Classification:
    """Reducibility verdict from the resonant-step delta series.

    No resonant steps: the conjugation product converges in C^infinity.
    Fewer than four: the tail regression has no support and the verdict is
    Inconclusive.  Otherwise the tail slope of -log(delta) against
    log(N_{n_i}) over the last max(4, half) resonant steps estimates the
    optimal Sobolev index; a flat or negative slope (or an infinite delta,
    eps_i = 0 exactly) means delta lies in no weighted h^s and the trace
    is NotReducible.
    """
    # A reduction with no perturbation content at the resonant mode
    # (delta_i = 0, up to projection roundoff) contributes nothing to any
    # weighted sum; only steps with actual defect content drive the verdict.
    floor = trace.params.roundoff_floor
    res = [s for s in trace.resonant_steps() if s.norm_l2_before > floor]
    if not res:
        return Classification("SmoothlyReducible",
                              reason="no resonance with perturbation content "
                                     "was ever reduced")
    deltas = [s.delta() for s in res]
    if len(res) < 4:
        return Classification(
            "Inconclusive", delta_series=deltas,
            reason=f"only {len(res)} resonant steps; the tail regression "
                   "needs at least 4")
    tail = max(4, (len(res) + 1) // 2)
    tail_steps = res[-tail:]
    if any(not math.isfinite(s.delta()) for s in tail_steps):
        return Classification(
            "NotReducible", delta_series=deltas,
            reason="vanishing defects (delta infinite) in the tail: the "
                   "series lies in no weighted h^s",
            evidence={"tail": tail})
    x = [math.log(s.N) for s in tail_steps]
    y = [-math.log(s.delta()) for s in tail_steps]
    slope_logn, se = _weighted_slope(x, y, x)
    slope_index, _ = _weighted_slope(x, y, [1.0] * len(x))
    spread = abs(slope_logn - slope_index)
    half_width = 2.0 * se + spread
    evidence = {
        "tail": tail,
        "logN": x,
        "neg_log_delta": y,
        "slope_logN_weighted": slope_logn,
        "slope_index_weighted": slope_index,
        "stderr": se,
        "weighting_disagreement": spread,
    }
    if slope_logn <= _FLAT_SLOPE:
        return Classification(
            "NotReducible", delta_series=deltas, evidence=evidence,
            reason=f"delta series does not decay (tail slope "
                   f"{slope_logn:.3g})")
    lo = max(0.0, slope_logn - half_width)
    return Classification(
        "SobolevReducible", sigma_hat=slope_logn,
        confidence=(lo, slope_logn + half_width),
        delta_series=deltas, evidence=evidence)


# ---------------------------------------------------------------------------
# The finite-regularity conjugation.
# ---------------------------------------------------------------------------

def _hs_norm_group(G: tm.GroupMap, s: float) -> float:
    """H^s norm of a group-valued map through the Fourier coefficients of
    its two sphere coordinates."""
    zh = np.fft.fft(G.z) / G.n
    wh = np.fft.fft(G.w) / G.n
    k = np.fft.fftfreq(G.n, d=1.0 / G.n)
    wgt = (1.0 + k ** 2) ** s
    return float(np.sqrt(np.sum(wgt * (np.abs(zh) ** 2 + np.abs(wh) ** 2))))


def build_sobolev_conjugation(trace: KamTrace, stages: int):
    """Accumulated reducing conjugation after the given number of stages.

    Stage i contributes G'_i = T_{i-1}^* (e^{Y_i} in the i-th frame) D_i
    T_{i-1}, where T_i is the pure torus rotation collecting the reduction
    frequencies of stages <= i; the identity
    prod_i (H_i e^{Y_i} D_i) = T_n prod_i G'_i telescopes the per-step
    conjugations into torus-conjugated constants, so that the H^s growth of
    the partial products isolates the Sobolev cost of the frames (the
    overall rotation T_n maps constants to constants and is dropped, as is
    conventional).

    Returns (H, A_final, sobolev_profile) with H the grid conjugation
    normalizing the original cocycle to A_final up to the trace's residual
    floor, and sobolev_profile a table of rows {"s": s, "norms": [H^s norm
    of each partial product]}, bounded in the stage count below the
    estimated index and growing above it.

    Raises NotApplicable when the trace classifies as NotReducible.
    """
    cls = classify(trace)
    if cls.verdict == "NotReducible":
        raise NotApplicable(f"trace is not reducible: {cls.reason}")
    stages = min(stages, len(trace.steps))
    steps = trace.steps[:stages]
    band = sum(abs(_step_shift(s)) for s in steps) + \
        max((s.Y.band for s in steps), default=0) + 16
    n = tm.grid_size(band)
    if n > 1 << 22:
        raise ValueError(
            f"spectral band {band} of the first {stages} stages needs a "
            f"{n}-point grid; reduce the stage count")
    sigma = cls.sigma_hat if cls.sigma_hat is not None else 1.0
    s_grid = sorted({0.0, 0.5 * sigma, sigma, sigma + 0.5, sigma + 1.0})
    freq = np.fft.fftfreq(n, d=1.0 / n)
    weights = [(1.0 + freq ** 2) ** s_val for s_val in s_grid]
    norms = [[] for _ in s_grid]
    H = tm.constant_group_map(algebra.IDENTITY, n)
    k_sum = 0
    for s in steps:
        T_prev = tm.torus_exponential(k_sum, n)
        core = tm.to_group(s.Y, n) if s.Y.band and tm.norm_l2(s.Y) > 0 \
            else tm.constant_group_map(algebra.IDENTITY, n)
        core = core.mul(tm.constant_group_map(s.frame, n))
        H = T_prev.inv().mul(core).mul(T_prev).mul(H)
        H.band = band
        k_sum += _step_shift(s)
        power = (np.abs(np.fft.fft(H.z) / n) ** 2
                 + np.abs(np.fft.fft(H.w) / n) ** 2)
        for i, w in enumerate(weights):
            norms[i].append(float(np.sqrt(np.sum(w * power))))
    profile = [{"s": s_val, "norms": norms[i]}
               for i, s_val in enumerate(s_grid)]
    A_final = steps[-1].A_next if steps else trace.original.constant
    return H, A_final, profile


def conjugate_cocycle(trace: KamTrace, H: tm.GroupMap, k_total: int):
    """Apply T_n . H to the trace's original cocycle on H's grid and return
    the resulting group-valued map P(x) = G(x + alpha) A e^{F(x)} G(x)^{-1};
    P should be close to the constant the trace reduced to."""
    orig = trace.original
    n = H.n
    A = tm.constant_group_map(orig.constant, n)
    EF = tm.to_group(orig.perturbation, n)
    T_sh = tm.torus_exponential(k_total, n, offset=orig.alpha)
    T0 = tm.torus_exponential(k_total, n)
    H_sh = _shift_group_map(H, orig.alpha)
    G_sh = T_sh.mul(H_sh)
    G0 = T0.mul(H)
    return G_sh.mul(A).mul(EF).mul(G0.inv())


def _shift_group_map(G: tm.GroupMap, offset: float) -> tm.GroupMap:
    """G(x + offset) through the trigonometric interpolation of G."""
    zh = np.fft.fft(G.z) / G.n
    wh = np.fft.fft(G.w) / G.n
    k = np.fft.fftfreq(G.n, d=1.0 / G.n)
    phase = np.exp(2j * np.pi * k * offset)
    z = np.fft.ifft(zh * phase) * G.n
    w = np.fft.ifft(wh * phase) * G.n
    return tm.GroupMap(z, w, G.band)


# ---------------------------------------------------------------------------
# Asymptotic conditions from the significant parameters.
# ---------------------------------------------------------------------------

@dataclass
class DueRow:
    m: int
    best_distance: float
    exponent: float
    at_floor: bool


@dataclass
class ConditionReport:
    """Finite-trace estimates of the uniform-ellipticity, root-distance and
    stability conditions.  low_confidence flags estimates backed by fewer
    than 3 resonant steps; a single step never supports a definite DUE
    reading."""

    ue_liminf: float
    ue_holds: bool
    due: dict                     # m -> DueRow
    stability: str                # "ReducibleCase" | "StableOrthogonal" | "NotStable"
    nu_bar: Optional[float]
    zetas: list
    low_confidence: bool
    due_definite: bool


def evaluate_conditions(params: list, schedule: list, m_max: int,
                        nu: float = 2.0) -> ConditionReport:
    """ConditionReport from the output of significant_params.

    ue: min over steps of |eps_i / Fhat_i(k_i)| (the equivalent liminf form
    of uniform ellipticity; a vanishing defect gives liminf 0, the
    degenerate regime, and the condition fails).  due: per even m <= m_max, the smallest
    distance of cos^2(zeta_i) to the roots of the degree-m/2 obstruction
    polynomial and the exponent estimated from the two largest values of
    -log d / log N (distances at the resolution floor are reported as such
    and yield floor-limited exponents).  stability: ReducibleCase when the
    last half of the defect exponents nu_i stays below 2 nu (the scheme
    with doubled exponent sees finitely many resonances), StableOrthogonal
    when the trailing steps all have zeta = pi/4 with eps_i = 0 within
    1e-12, else NotStable.
    """
    if not params:
        raise ValueError("evaluate_conditions needs at least one resonant step")
    ratios = [abs(p["eps"]) / p["coeff"] if p["coeff"] > 0 else math.inf
              for p in params]
    ue_liminf = min(ratios)
    zetas = [p["zeta"] for p in params]
    Ns = [p["N"] for p in params]

    due = {}
    for m in range(2, m_max + 1, 2):
        roots = xi_set(m)
        dists = [max(DISTANCE_FLOOR,
                     min(abs(math.cos(z) ** 2 - r) for r in roots))
                 for z in zetas]
        exps = sorted((-math.log(d) / math.log(N)
                       for d, N in zip(dists, Ns)), reverse=True)
        top = exps[:2] if len(exps) >= 2 else exps
        # Below ~1e-15 the distance of cos^2(zeta) to a root is pure
        # roundoff and the exponent is a lower bound, not an estimate.
        due[m] = DueRow(m=m, best_distance=min(dists),
                        exponent=sum(top) / len(top),
                        at_floor=min(dists) <= 1e-15)

    half = params[len(params) // 2:]
    nu_bar = max(p["nu"] for p in half)
    if math.isfinite(nu_bar) and nu_bar < 2.0 * nu:
        stability = "ReducibleCase"
    else:
        stability = _stable_or_not(params)
    return ConditionReport(
        ue_liminf=ue_liminf,
        ue_holds=math.isfinite(ue_liminf) and ue_liminf > 0.0,
        due=due,
        stability=stability,
        nu_bar=nu_bar if math.isfinite(nu_bar) else None,
        zetas=zetas,
        low_confidence=len(params) < 3,
        due_definite=len(params) >= 3)


def _stable_or_not(params) -> str:
    """StableOrthogonal when a trailing run of at least two steps sits at
    zeta = pi/4 with vanishing defect."""
    run = 0
    for p in reversed(params):
        if abs(p["eps"]) <= 1e-12 and abs(p["zeta"] - math.pi / 4.0) <= 1e-9:
            run += 1
        else:
            break
    return "StableOrthogonal" if run >= max(2, len(params) // 2) else "NotStable"
