"""Exact arithmetic on SU(2) and su(2) in sphere coordinates.

A group element is a point {z, w} of the unit sphere of C^2, identified with
the unitary matrix [[z, w], [-conj(w), conj(z)]].  An algebra element is a
pair {t, u} in R x C, identified with the anti-Hermitian traceless matrix
[[i t, u], [-conj(u), -i t]].  All operations below are closed-form; the
2x2-matrix picture is only used by the test oracles.

Every group-valued result is renormalized to the unit sphere, so that long
products (the KAM iteration multiplies thousands of elements) do not drift.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

_UNIT_TOL = 1e-12
_ANTIPODE_TOL = 1e-9


class AntipodalPoint(ValueError):
    """log requested within the branch-ambiguity cutoff of {-1, 0}."""


@dataclass(frozen=True)
class GroupElement:
    """A point {z, w} of SU(2), |z|^2 + |w|^2 = 1."""

    z: complex
    w: complex

    def __post_init__(self):
        n = abs(self.z) ** 2 + abs(self.w) ** 2
        if not math.isfinite(n) or n == 0.0:
            raise ValueError("group element must have finite nonzero norm")
        if abs(n - 1.0) > _UNIT_TOL:
            s = 1.0 / math.sqrt(n)
            object.__setattr__(self, "z", self.z * s)
            object.__setattr__(self, "w", self.w * s)

    def norm(self) -> float:
        return math.sqrt(abs(self.z) ** 2 + abs(self.w) ** 2)


@dataclass(frozen=True)
class AlgebraElement:
    """An element {t, u} of su(2), t real (diagonal channel), u complex."""

    t: float
    u: complex

    def __post_init__(self):
        if not (math.isfinite(self.t) and cmath.isfinite(self.u)):
            raise ValueError("algebra element must be finite")

    def norm(self) -> float:
        return math.sqrt(self.t ** 2 + abs(self.u) ** 2)

    def scale(self, c: float) -> "AlgebraElement":
        return AlgebraElement(c * self.t, c * self.u)

    def add(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.t + other.t, self.u + other.u)


IDENTITY = GroupElement(1.0, 0.0)
MINUS_IDENTITY = GroupElement(-1.0, 0.0)
ZERO = AlgebraElement(0.0, 0.0)


@dataclass(frozen=True)
class DiagonalizationResult:
    """A frame D and an angle a (in turns) with D* diag(e^{2i pi a}) D = input."""

    frame: GroupElement
    angle: float


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group law {z1 z2 - w1 conj(w2), z1 w2 + conj(z2) w1}."""
    return GroupElement(a.z * b.z - a.w * b.w.conjugate(),
                        a.z * b.w + b.z.conjugate() * a.w)


def inv(a: GroupElement) -> GroupElement:
    """Inverse {conj(z), -w}."""
    return GroupElement(a.z.conjugate(), -a.w)


def _sinc(r: float) -> float:
    # sin(r)/r with the r -> 0 limit; accurate to machine precision via the
    # series for small arguments.
    if abs(r) < 1e-4:
        r2 = r * r
        return 1.0 - r2 / 6.0 * (1.0 - r2 / 20.0)
    return math.sin(r) / r


def exp_alg(s: AlgebraElement) -> GroupElement:
    """Exponential: with r = sqrt(t^2 + |u|^2), {cos r + i t sinc r, u sinc r}."""
    r = s.norm()
    sc = _sinc(r)
    return GroupElement(complex(math.cos(r), s.t * sc), s.u * sc)


def log_alg(a: GroupElement) -> AlgebraElement:
    """Principal branch of the logarithm, r = sqrt(t^2+|u|^2) in [0, pi).

    Raises AntipodalPoint within 1e-9 of {-1, 0}, where the branch is
    ambiguous.
    """
    x = a.z.real
    if x < -1.0 + _ANTIPODE_TOL and (abs(a.z.imag) ** 2 + abs(a.w) ** 2) < _ANTIPODE_TOL:
        raise AntipodalPoint("logarithm near {-1,0} is branch-ambiguous")
    r = math.acos(max(-1.0, min(1.0, x)))
    sc = _sinc(r)
    return AlgebraElement(a.z.imag / sc, a.w / sc)


def adjoint(S: GroupElement, s: AlgebraElement) -> AlgebraElement:
    """Adjoint action Ad(S).s = S s S^{-1} in closed form.

    For diagonal S = {e^{2 i pi sigma}, 0} this reduces to
    {t, e^{4 i pi sigma} u}.
    """
    z, w = S.z, S.w
    t = s.t * (abs(z) ** 2 - abs(w) ** 2) + 2.0 * (z * s.u * w.conjugate()).imag
    u = s.u * z * z + s.u.conjugate() * w * w - 2.0j * s.t * z * w
    return AlgebraElement(t, u)


def bracket(s1: AlgebraElement, s2: AlgebraElement) -> AlgebraElement:
    """Lie bracket (twice the vector product of R^3)."""
    t = 2.0 * (s1.u.conjugate() * s2.u).imag
    u = 2.0j * (s1.t * s2.u - s2.t * s1.u)
    return AlgebraElement(t, u)


def inner(s1: AlgebraElement, s2: AlgebraElement) -> float:
    """Scalar product t1 t2 + Re(u1 conj(u2))."""
    return s1.t * s2.t + (s1.u * s2.u.conjugate()).real


def diagonalize(a: GroupElement) -> DiagonalizationResult:
    """Diagonalizing frame and angle, frame reported canonically mod the
    normalizer of the diagonal torus.

    The angle a is folded into [0, 1/2] (units of full turns), fixing the
    Weyl-coset choice; the residual torus phase is fixed by making the z
    component of the frame real nonnegative (w real nonnegative when z
    vanishes).
    """
    x = max(-1.0, min(1.0, a.z.real))
    # atan2 keeps full precision where arccos(Re z) would lose half the
    # digits near the identity: sin of the eigenangle is |(Im z, w)| exactly.
    s = math.sqrt(a.z.imag ** 2 + abs(a.w) ** 2)
    angle = math.atan2(s, x) / (2.0 * math.pi)  # in [0, 1/2]
    # Eigenvector of [[z, w], [-conj(w), conj(z)]] for eigenvalue e^{2 i pi angle}.
    lam = cmath.exp(2.0j * math.pi * angle)
    # Rows of (M - lam I) are proportional; an eigenvector is orthogonal to
    # the first row (z - lam, w): v = (conj(w)? ...) choose the larger row.
    r1 = (a.z - lam, a.w)
    r2 = (-a.w.conjugate(), a.z.conjugate() - lam)
    if abs(r1[0]) ** 2 + abs(r1[1]) ** 2 >= abs(r2[0]) ** 2 + abs(r2[1]) ** 2:
        row = r1
    else:
        row = r2
    nrm = math.sqrt(abs(row[0]) ** 2 + abs(row[1]) ** 2)
    if nrm < 1e-14:
        # Already a multiple of the identity in the torus: frame is trivial.
        return DiagonalizationResult(IDENTITY, angle)
    v = (row[1] / nrm, -row[0] / nrm)
    # D* has first column v, so D = {conj(v1), conj(v2)}.
    frame = GroupElement(v[0].conjugate(), v[1].conjugate())
    return DiagonalizationResult(canonical_frame(frame), angle)


def canonical_frame(frame: GroupElement) -> GroupElement:
    """Canonical torus-phase representative of a diagonalizing frame."""
    if abs(frame.z) > 1e-12:
        phase = frame.z / abs(frame.z)
    else:
        phase = frame.w / abs(frame.w)
    out = GroupElement(frame.z / phase, frame.w / phase)
    # Clean the real representative: the z (or w) component is now real >= 0.
    return out


def reconstruct(d: DiagonalizationResult) -> GroupElement:
    """frame* diag(e^{2 i pi angle}) frame."""
    diag = GroupElement(cmath.exp(2.0j * math.pi * d.angle), 0.0)
    return mul(inv(d.frame), mul(diag, d.frame))


def distance(a: GroupElement, b: GroupElement) -> float:
    """Geodesic distance |log(a^{-1} b)| (bi-invariant metric, exp units).

    Computed through the chord, which keeps full precision near the
    identity where arccos(Re z) would lose half the digits.
    """
    d = mul(inv(a), b)
    chord = math.sqrt(abs(d.z - 1.0) ** 2 + abs(d.w) ** 2)
    return 2.0 * math.asin(max(0.0, min(1.0, chord / 2.0)))


def torus_distance(a: GroupElement, frame: GroupElement) -> float:
    """Riemannian distance from a to the normalizer of the maximal torus
    frame* {diag} frame.

    In the standard frame the distance to the torus is arccos|z| and the
    distance to the Weyl coset is arccos|w|; the normalizer distance is
    their minimum.
    """
    conj = mul(frame, mul(a, inv(frame)))
    to_torus = math.acos(max(-1.0, min(1.0, abs(conj.z))))
    to_flip = math.acos(max(-1.0, min(1.0, abs(conj.w))))
    return min(to_torus, to_flip)


# ---------------------------------------------------------------------------
# Vectorized grid kernels.
#
# Torus maps carry their samples as parallel numpy arrays (z, w) or (t, u);
# the helpers below apply the closed-form operations elementwise so that
# pointwise products of maps never loop in Python.
# ---------------------------------------------------------------------------

def mul_arrays(z1, w1, z2, w2):
    return z1 * z2 - w1 * np.conj(w2), z1 * w2 + np.conj(z2) * w1


def inv_arrays(z, w):
    return np.conj(z), -w


def renormalize_arrays(z, w):
    n = np.sqrt(np.abs(z) ** 2 + np.abs(w) ** 2)
    return z / n, w / n


def exp_arrays(t, u):
    r = np.sqrt(t ** 2 + np.abs(u) ** 2)
    sc = np.sinc(r / np.pi)  # numpy sinc is sin(pi x)/(pi x)
    return np.cos(r) + 1j * t * sc, u * sc


def log_arrays(z, w, strict: bool = True):
    """Elementwise principal logarithm; raises AntipodalPoint if any sample
    is within the cutoff of {-1, 0} (strict mode)."""
    x = np.clip(np.real(z), -1.0, 1.0)
    if strict and np.any((x < -1.0 + _ANTIPODE_TOL)
                         & (np.imag(z) ** 2 + np.abs(w) ** 2 < _ANTIPODE_TOL)):
        raise AntipodalPoint("logarithm near {-1,0} on the sample grid")
    r = np.arccos(x)
    sc = np.sinc(r / np.pi)
    return np.imag(z) / sc, w / sc


def adjoint_arrays(z, w, t, u):
    """Elementwise Ad({z,w}).{t,u}."""
    t2 = t * (np.abs(z) ** 2 - np.abs(w) ** 2) + 2.0 * np.imag(z * u * np.conj(w))
    u2 = u * z * z + np.conj(u) * w * w - 2.0j * t * z * w
    return t2, u2
