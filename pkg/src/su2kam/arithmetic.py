"""Continued fractions, Diophantine classes and resonance detection.

Frequencies are ingested either as decimal strings (expanded with mpmath at
a precision chosen from the string length) or as quadratic surds
(p + q sqrt(d))/r, whose continued fractions are exact integer recursions.
Double-precision Gauss iteration loses all digits by depth ~ 35, so the
surd path is the default for test frequencies such as sqrt(2) - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath as mp
import numpy as np

MACHINE_EPS = 2.0 ** -52
BETA_FLOOR = 1024.0 * MACHINE_EPS


class PrecisionExhausted(ArithmeticError):
    """Further partial quotients are below the working-precision floor."""


class HypothesisViolated(ValueError):
    """A stated precondition relating K, N, gamma, tau fails."""


class DoubleResonance(ArithmeticError):
    """Two modes below the resonance threshold: Diophantine assumption broken."""


def dist_to_integers(x: float) -> float:
    """Distance from x to the nearest integer, in [0, 1/2]."""
    return abs(x - round(x))


def fold(x: float) -> float:
    """Signed representative of x mod 1 in (-1/2, 1/2]."""
    y = x - round(x)
    if y == -0.5:
        y = 0.5
    return y


@dataclass(frozen=True)
class Surd:
    """The quadratic irrational (p + q sqrt(d)) / r with integer entries."""

    p: int
    q: int
    d: int
    r: int

    def __post_init__(self):
        if self.r == 0 or self.d <= 0 or self.q == 0:
            raise ValueError("surd requires q != 0, d > 0, r != 0")
        s = math.isqrt(self.d)
        if s * s == self.d:
            raise ValueError("d must not be a perfect square")

    def value(self, dps: int = 50) -> float:
        with mp.workdps(dps):
            return float((self.p + self.q * mp.sqrt(self.d)) / self.r)

    def mpf(self):
        return (self.p + self.q * mp.sqrt(self.d)) / self.r


@dataclass(frozen=True)
class DiophantineParams:
    gamma: float
    tau: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.tau >= 1):
            raise ValueError("need gamma > 0 and tau >= 1")


@dataclass
class ContinuedFraction:
    """Partial quotients and convergents of alpha in (0, 1).

    Index conventions: p[0]/q[0] = 0/1, and for n >= 1 the recursion
    q_n = a_n q_{n-1} + q_{n-2} with a = partial_quotients (a[0] unused
    placeholder 0 so that a[n] matches q[n]).  beta[n] = (-1)^n (q_n alpha
    - p_n) > 0.
    """

    alpha: float
    partial_quotients: list = field(default_factory=list)
    p: list = field(default_factory=list)
    q: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    surd: Optional[Surd] = None
    decimal: Optional[str] = None

    def depth(self) -> int:
        return len(self.q) - 1

    def convergent(self, n: int) -> Fraction:
        return Fraction(self.p[n], self.q[n])


def _surd_quotients(surd: Surd, depth: int):
    """Exact partial quotients of a quadratic surd via the (P, Q, D)
    integer recursion for (P + sqrt(D)) / Q."""
    # Normalize to (P + sqrt(D))/Q with Q | D - P^2.
    sgn = 1 if surd.r > 0 else -1
    q0 = surd.q * sgn
    if q0 < 0:
        raise ValueError("surd with negative irrational part unsupported")
    P = surd.p * abs(surd.r)
    D = surd.q * surd.q * surd.d * surd.r * surd.r
    Q = surd.r * abs(surd.r)
    out = []
    sqrtD = math.isqrt(D)
    for _ in range(depth + 1):
        # floor((P + sqrt(D))/Q), exact in integers: sqrt(D) lies in the
        # open interval (sqrtD, sqrtD + 1) since D is not a square.
        if Q > 0:
            a = (P + sqrtD) // Q
        else:
            a = -((-P - sqrtD - 1) // (-Q)) - 1
        out.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
        if Q == 0:
            raise ValueError("surd is rational")
    # The first term is the integer part; for alpha in (0, 1) it is 0 and
    # the fractional quotients a_1, a_2, ... follow.
    if out and out[0] == 0:
        out = out[1:]
    return out


def _decimal_quotients(alpha_mp, depth: int, dps: int):
    out = []
    with mp.workdps(dps):
        x = mp.mpf(alpha_mp)
        for _ in range(depth):
            if x == 0:
                break
            inv = 1 / x
            a = int(mp.floor(inv))
            out.append(a)
            x = inv - a
    return out


def expand(alpha, depth: int) -> ContinuedFraction:
    """Continued-fraction expansion of alpha in (0, 1).

    ``alpha`` may be a float, a decimal string, or a Surd.  Expansion stops
    with PrecisionExhausted when beta_n falls below 1024 machine epsilons
    (further quotients are numerical noise), unless the requested depth was
    reached first.
    """
    surd = None
    decimal = None
    if isinstance(alpha, Surd):
        surd = alpha
        dps = 60 + 2 * depth
        with mp.workdps(dps):
            alpha_mp = surd.mpf()
            alpha_f = float(alpha_mp)
    elif isinstance(alpha, str):
        decimal = alpha
        dps = max(50, len(alpha) + 10)
        with mp.workdps(dps):
            alpha_mp = mp.mpf(alpha)
            alpha_f = float(alpha_mp)
    else:
        alpha_f = float(alpha)
        dps = 40
        alpha_mp = mp.mpf(alpha_f)
    if not (0.0 < alpha_f < 1.0):
        raise ValueError("alpha must lie in (0, 1)")

    if surd is not None:
        quotients = _surd_quotients(surd, depth)
    else:
        quotients = _decimal_quotients(alpha_mp, depth, dps)

    cf = ContinuedFraction(alpha=alpha_f, surd=surd, decimal=decimal)
    cf.partial_quotients = [0]
    cf.p = [0]
    cf.q = [1]
    with mp.workdps(dps):
        a_mp = mp.mpf(alpha_mp)
        cf.beta = [float(a_mp)]
        p_prev, q_prev = 1, 0  # virtual index -1
        for n, a in enumerate(quotients, start=1):
            p_n = a * cf.p[-1] + p_prev
            q_n = a * cf.q[-1] + q_prev
            beta_n = float(abs(q_n * a_mp - p_n))
            if beta_n < BETA_FLOOR:
                if n == 1:
                    raise PrecisionExhausted("alpha is rational to working precision")
                raise PrecisionExhausted(
                    f"beta_{n} = {beta_n:.3e} below the precision floor")
            p_prev, q_prev = cf.p[-1], cf.q[-1]
            cf.partial_quotients.append(a)
            cf.p.append(p_n)
            cf.q.append(q_n)
            cf.beta.append(beta_n)
    return cf


def gauss_iterates(cf: ContinuedFraction, depth: int) -> list:
    """The Gauss-map orbit G^n(alpha), n = 0..depth, as floats.

    G^n(alpha) is the tail [0; a_{n+1}, a_{n+2}, ...]; for surds it is
    computed exactly from the shifted quotient sequence, for decimals from
    the high-precision orbit.
    """
    need = depth + len(cf.q) + 5
    if cf.surd is not None:
        quotients = _surd_quotients(cf.surd, need + 40)
    else:
        quotients = _decimal_quotients(
            mp.mpf(cf.decimal) if cf.decimal is not None else mp.mpf(cf.alpha),
            need + 40, 80)
    out = []
    for n in range(depth + 1):
        tail = quotients[n:n + 60]
        x = 0.0
        for a in reversed(tail):
            x = 1.0 / (a + x)
        out.append(x)
    return out


def check_diophantine(cf: ContinuedFraction, params: DiophantineParams,
                      k_max: int):
    """Verify |alpha k|_Z >= gamma^{-1} / |k|^tau for 0 < |k| <= k_max.

    Returns (holds, worst_witness) where the witness minimizes
    |alpha k|_Z * k^tau.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    k = np.arange(1, k_max + 1, dtype=float)
    d = np.abs(cf.alpha * k - np.round(cf.alpha * k))
    crit = d * k ** params.tau
    i = int(np.argmin(crit))
    holds = bool(crit[i] >= 1.0 / params.gamma)
    return holds, i + 1


def check_recurrent_diophantine(cf: ContinuedFraction,
                                params: DiophantineParams,
                                depth: int, k_max: int) -> list:
    """Indices n <= depth with G^n(alpha) in DC(gamma, tau) up to k_max."""
    passing = []
    for n, x in enumerate(gauss_iterates(cf, depth)):
        cfn = ContinuedFraction(alpha=x)
        holds, _ = check_diophantine(cfn, params, k_max)
        if holds:
            passing.append(n)
    return passing


@dataclass(frozen=True)
class ResonanceReport:
    """Outcome of the resonance scan for the constant angle a at scale (N, K).

    ``resonant_mode`` is the unique k0 with |2a - k0 alpha|_Z < 1/K and
    |k0| <= N, or None.  ``epsilon`` is the distance |2a - k0 alpha|_Z (the
    smallest divisor over the scan when no mode qualifies) and
    ``epsilon_signed`` its signed fold.  ``gap_bound`` is the radius N'
    within which no second resonance can occur.
    """

    resonant_mode: Optional[int]
    epsilon: float
    epsilon_signed: float
    gap_bound: float
    N: int
    K: float
    nu: float
    active_bound: str = "uniqueness"


def resonance_hypothesis_K(params: DiophantineParams, N: int) -> float:
    """The smallest K for which the uniqueness lemma applies at scale N."""
    return 2.0 ** (params.tau + 1) * params.gamma * N ** params.tau


def find_resonance(a: float, alpha: float, N: int, K: float,
                   params: DiophantineParams, nu: float) -> ResonanceReport:
    """Locate the unique resonant mode of the constant {e^{2 i pi a}, 0}.

    Scans k in [-N, N] for |2a - k alpha|_Z < 1/K.  The uniqueness
    precondition K >= 2^{tau+1} gamma N^tau is checked (HypothesisViolated),
    and a scan that still finds two qualifying modes raises DoubleResonance.
    """
    k_min = resonance_hypothesis_K(params, N)
    if K < k_min:
        raise HypothesisViolated(
            f"K = {K:g} below the uniqueness bound {k_min:g} at N = {N}")
    active = "uniqueness" if k_min >= params.gamma * N ** (params.tau + 0.5) \
        else "step"
    k = np.arange(-N, N + 1)
    x = 2.0 * a - k * alpha
    d = np.abs(x - np.round(x))
    hits = np.nonzero(d < 1.0 / K)[0]
    if len(hits) > 1:
        modes = [int(k[i]) for i in hits]
        raise DoubleResonance(f"modes {modes} all below 1/K = {1.0 / K:g}")
    if len(hits) == 1:
        i = int(hits[0])
    else:
        i = int(np.argmin(d))
    eps = float(d[i])
    y = float(x[i])
    eps_signed = y - round(y)
    gap = (params.gamma / (1.0 + K * eps)) ** (1.0 / params.tau) \
        * N ** (nu / params.tau)
    mode = int(k[i]) if len(hits) == 1 else None
    return ResonanceReport(resonant_mode=mode, epsilon=eps,
                           epsilon_signed=eps_signed, gap_bound=gap,
                           N=N, K=float(K), nu=nu, active_bound=active)


def parse_frequency(text: str):
    """Parse a frequency descriptor: 'decimal:<string>' or 'surd:(p,q,d,r)'."""
    text = text.strip()
    if text.startswith("decimal:"):
        return text[len("decimal:"):].strip()
    if text.startswith("surd:"):
        body = text[len("surd:"):].strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise ValueError(f"malformed surd descriptor: {text!r}")
        parts = [int(s.strip()) for s in body[1:-1].split(",")]
        if len(parts) != 4:
            raise ValueError(f"surd descriptor needs 4 integers: {text!r}")
        return Surd(*parts)
    raise ValueError(f"unknown frequency descriptor: {text!r}")


SQRT2_MINUS_1 = Surd(-1, 1, 2, 1)
GOLDEN_CONJ = Surd(-1, 1, 5, 2)
