"""Harmonic analysis on T x S^3: the psi basis, matrix coefficients of the
irreducible SU(2) representations, group actions on harmonics, frame changes
and the Legendre projection factors.

Functions on T x S^3 are expanded over b_{k,m,j,p}(x, u) =
e^{2 i pi k x} sqrt(m+1) pi_m^{j,p}(u), where pi_m is the spin-(m/2)
representation realized on homogeneous polynomials of degree m in the sphere
coordinates (zeta, omega).  The index convention is fixed by three rules:

- a diagonal constant {e^{2 i pi a}, 0} multiplies (k, m, j, p) by
  e^{2 i pi (m - 2p) a};
- the torus conjugation u -> B(x)^{-1} u with B(x) = {e^{-2 i pi k0 x}, 0}
  moves (k, m, j, p) to frequency k + (m - 2p) k0;
- a frame change D (composition with u -> D u) mixes the p-block through the
  representation matrix; for D in the normalizer of the diagonal torus it
  permutes psi_{l,m} with psi_{m-l,m} up to phase, and its middle entry on
  an even block m = 2l is the Legendre factor p_l(|z_D|^2).

With the sphere coordinates read off a group point as (zeta, omega) =
(z, conj(w)), the monomial psi_{l,m} occupies the single slot
(j, p) = (0, m - l) with coefficient 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
import sympy

from .algebra import GroupElement

M_MAX_DEFAULT = 8
K_BAND_DEFAULT = 4096


def _norm_const(l: int, m: int) -> float:
    """sqrt((m+1)! / (l! (m-l)!)), the L^2 normalization of zeta^l omega^{m-l}."""
    return math.sqrt(factorial(m + 1) / (factorial(l) * factorial(m - l)))


def psi(l: int, m: int, zeta: complex, omega: complex) -> complex:
    """The basis monomial psi_{l,m}(zeta, omega) =
    sqrt((m+1)!/(l!(m-l)!)) zeta^l omega^{m-l}."""
    if not 0 <= l <= m:
        raise ValueError(f"need 0 <= l <= m, got l={l}, m={m}")
    return _norm_const(l, m) * zeta ** l * omega ** (m - l)


def rep_matrix(m: int, S: GroupElement) -> np.ndarray:
    """The (m+1) x (m+1) matrix F(S) of the degree-m representation on the
    normalized monomials: substituting the rotated coordinates into psi_j
    gives psi_j -> sum_p F(S)[j, p] psi_p.

    F is a homomorphism (F(ST) = F(S) F(T)) and unitary.
    """
    z, w = complex(S.z), complex(S.w)
    zc, wc = z.conjugate(), w.conjugate()
    F = np.zeros((m + 1, m + 1), dtype=complex)
    for j in range(m + 1):
        for p in range(m + 1):
            acc = 0.0 + 0.0j
            for i in range(max(0, p - (m - j)), min(j, p) + 1):
                acc += (comb(j, i) * comb(m - j, p - i)
                        * zc ** i * wc ** (j - i)
                        * (-w) ** (p - i) * z ** ((m - j) - (p - i)))
            F[j, p] = acc * (_norm_const(j, m) / _norm_const(p, m))
    return F


def pi_coeff(m: int, j: int, p: int, S: GroupElement) -> complex:
    """Matrix coefficient pi_m^{j,p}(S) in the package convention: the
    transpose of the monomial-substitution matrix, so that a diagonal
    S = {e^{2 i pi a}, 0} gives e^{2 i pi (m - 2p) a} delta_{jp}."""
    if not (0 <= j <= m and 0 <= p <= m):
        raise ValueError(f"indices out of range: m={m}, j={j}, p={p}")
    return complex(rep_matrix(m, S)[p, j])


@dataclass
class HarmonicFunction:
    """Sparse coefficient table of a function on T x S^3.

    coeffs maps (k, m, j, p) -> complex with |k| <= k_band, 0 <= j, p <= m
    <= M_max; the function is sum of c * e^{2 i pi k x} sqrt(m+1)
    pi_m^{j,p}(u).
    """

    coeffs: dict = field(default_factory=dict)
    M_max: int = M_MAX_DEFAULT
    k_band: int = K_BAND_DEFAULT

    def __post_init__(self):
        for key in self.coeffs:
            self._check_key(key)

    def _check_key(self, key):
        k, m, j, p = key
        if not (abs(k) <= self.k_band and 0 <= m <= self.M_max
                and 0 <= j <= m and 0 <= p <= m):
            raise ValueError(f"index {key} outside declared bounds "
                             f"(M_max={self.M_max}, k_band={self.k_band})")

    def set(self, k: int, m: int, j: int, p: int, v: complex):
        key = (k, m, j, p)
        self._check_key(key)
        if v == 0:
            self.coeffs.pop(key, None)
        else:
            self.coeffs[key] = complex(v)

    def get(self, k: int, m: int, j: int, p: int) -> complex:
        return self.coeffs.get((k, m, j, p), 0.0 + 0.0j)

    def copy(self) -> "HarmonicFunction":
        return HarmonicFunction(dict(self.coeffs), self.M_max, self.k_band)

    def scaled(self, c: complex) -> "HarmonicFunction":
        return HarmonicFunction({k: c * v for k, v in self.coeffs.items()},
                                self.M_max, self.k_band)

    def plus(self, other: "HarmonicFunction") -> "HarmonicFunction":
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            s = out.get(key, 0.0) + v
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return HarmonicFunction(out, max(self.M_max, other.M_max),
                                max(self.k_band, other.k_band))

    def prune(self, tol: float = 0.0) -> "HarmonicFunction":
        self.coeffs = {k: v for k, v in self.coeffs.items() if abs(v) > tol}
        return self

    def l2_norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self.coeffs.values()))

    def evaluate(self, x: float, u: GroupElement) -> complex:
        """Direct evaluation, the oracle for every coefficient operation."""
        mats = {}
        total = 0.0 + 0.0j
        for (k, m, j, p), c in self.coeffs.items():
            if m not in mats:
                mats[m] = rep_matrix(m, u)
            total += (c * np.exp(2j * np.pi * k * x)
                      * math.sqrt(m + 1) * mats[m][p, j])
        return total


def psi_harmonic(l: int, m: int, k: int = 0,
                 M_max: int = M_MAX_DEFAULT,
                 k_band: int = K_BAND_DEFAULT) -> HarmonicFunction:
    """psi_{l,m} (times e^{2 i pi k x}) as a HarmonicFunction: the single
    slot (j, p) = (0, m - l) with coefficient 1."""
    f = HarmonicFunction({}, M_max, k_band)
    f.set(k, m, 0, m - l, 1.0)
    return f


def act_constant(a: float, f: HarmonicFunction,
                 alpha: float | None = None) -> HarmonicFunction:
    """Action of the diagonal constant {e^{2 i pi a}, 0}: multiply
    (k, m, j, p) by e^{2 i pi (m - 2p) a}; when alpha is given, compose with
    the translation x -> x + alpha (factor e^{2 i pi k alpha})."""
    out = {}
    for (k, m, j, p), c in f.coeffs.items():
        ph = (m - 2 * p) * a + (k * alpha if alpha is not None else 0.0)
        out[(k, m, j, p)] = c * np.exp(2j * np.pi * ph)
    return HarmonicFunction(out, f.M_max, f.k_band)


def conjugate_by_torus_map(k0: int, f: HarmonicFunction) -> HarmonicFunction:
    """Composition with u -> B(x)^{-1} u, B(x) = {e^{-2 i pi k0 x}, 0}:
    the (k, m, j, p) coefficient moves to frequency k + (m - 2p) k0.

    The frequency band grows by at most m |k0| and is reallocated.
    """
    out = {}
    band = f.k_band
    for (k, m, j, p), c in f.coeffs.items():
        k2 = k + (m - 2 * p) * k0
        band = max(band, abs(k2))
        key = (k2, m, j, p)
        out[key] = out.get(key, 0.0) + c
    return HarmonicFunction(out, f.M_max, band)


def rotate_frame(D: GroupElement, f: HarmonicFunction) -> HarmonicFunction:
    """Frame change: composition with u -> D u, applied to the p-block
    through the representation matrix.

    Contravariant (rotate(D1) o rotate(D2) = rotate(D2 D1)); for D in the
    normalizer of the diagonal torus it permutes psi_{l,m} and psi_{m-l,m}
    up to phase; for diagonal D it reduces to act_constant.
    """
    mats = {}
    out = {}
    for (k, m, j, p), c in f.coeffs.items():
        if m not in mats:
            mats[m] = rep_matrix(m, D)
        row = mats[m][p, :]  # the p-coefficient spreads with F(D)[p, p']
        for p2 in range(m + 1):
            if row[p2] == 0:
                continue
            key = (k, m, j, p2)
            out[key] = out.get(key, 0.0) + c * row[p2]
    return HarmonicFunction(out, f.M_max, f.k_band).prune(0.0)


def norms(f: HarmonicFunction, s: float):
    """(H^s norm in the fiber grading (1+m^2)^s, combined grading
    (1+k^2+m^2)^s), both as square roots of coefficient sums."""
    if s < 0:
        raise ValueError("need s >= 0")
    hs = 0.0
    combined = 0.0
    for (k, m, j, p), c in f.coeffs.items():
        a2 = abs(c) ** 2
        hs += (1.0 + m * m) ** s * a2
        combined += (1.0 + k * k + m * m) ** s * a2
    return math.sqrt(hs), math.sqrt(combined)


# ---------------------------------------------------------------------------
# Legendre projection factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LegendreFactor:
    """p_l(x) = sum_i (-1)^i binom(l,i)^2 x^{l-i} (1-x)^i (x = |z|^2) with
    its l simple roots in (0, 1)."""

    l: int
    coefficients: tuple  # integer coefficients of p_l in ascending powers of x
    roots: tuple


def _legendre_coeffs(l: int):
    """Integer coefficients of p_l in ascending powers of x, exactly."""
    coeffs = [0] * (l + 1)
    for i in range(l + 1):
        c = (-1) ** i * comb(l, i) ** 2
        # x^{l-i} (1-x)^i = sum_r binom(i, r) (-1)^r x^{l-i+r}
        for r in range(i + 1):
            coeffs[l - i + r] += c * comb(i, r) * (-1) ** r
    return coeffs


def projection_factor(l: int, x: float) -> float:
    """p_l evaluated by Horner on the exact integer coefficients."""
    coeffs = _legendre_coeffs(l)
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def legendre(l: int) -> LegendreFactor:
    """p_l with its roots isolated symbolically and polished to 1e-14."""
    if l < 1:
        raise ValueError("need l >= 1")
    coeffs = _legendre_coeffs(l)
    x = sympy.symbols("x")
    poly = sympy.Poly(sum(c * x ** i for i, c in enumerate(coeffs)), x)
    roots = []
    for r in poly.real_roots():
        val = float(r.evalf(30))
        # One guarded Newton polish on the float value.
        for _ in range(3):
            fx = projection_factor(l, val)
            dfx = sum(i * coeffs[i] * val ** (i - 1) for i in range(1, l + 1))
            if dfx != 0.0:
                step = fx / dfx
                if abs(step) < 1e-3:
                    val -= step
        roots.append(val)
    roots.sort()
    if len(roots) != l or not all(0.0 < r < 1.0 for r in roots):
        raise ArithmeticError(f"p_{l} root isolation failed: {roots}")
    return LegendreFactor(l, tuple(coeffs), tuple(roots))


def xi_set(m: int):
    """Xi_m: the projection-factor roots relevant to an even degree m."""
    if m % 2 != 0 or m < 2:
        raise ValueError("Xi_m is defined for even m >= 2")
    return legendre(m // 2).roots


def root_distance(m: int, x: float) -> float:
    """Distance from x to Xi_m."""
    return min(abs(x - r) for r in xi_set(m))
