"""Band-limited Fourier maps T -> su(2) and sampled maps T -> SU(2).

An AlgebraMap stores the Fourier coefficients of U = {U_t, U_z} on a band
|k| <= band, with exact conjugate symmetry on the t channel (U_t is real)
and a certified C^0 bound on whatever has been truncated away
(``tail_bound``).  A GroupMap stores unit-sphere samples on a uniform dyadic
grid; SU(2)-valued maps have no linear Fourier structure, so products and
logarithms are computed pointwise and re-projected spectrally.

Conventions: f(x) = sum_{|k| <= band} fhat(k) e^{2 i pi k x}; coefficient k
lives at array index k + band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .algebra import GroupElement
from .arithmetic import ResonanceReport, dist_to_integers


class DivisorUnderflow(ArithmeticError):
    """A divisor used by the off-diagonal solver undercuts the resonance
    report's guarantee: the partition and the report disagree."""


def grid_size(band: int, oversample: int = 4) -> int:
    """Power-of-two grid size >= oversample * band + 4."""
    n = 8
    while n < oversample * band + 4:
        n *= 2
    return n


@dataclass
class AlgebraMap:
    band: int
    t_hat: np.ndarray = None
    z_hat: np.ndarray = None
    tail_bound: float = 0.0

    def __post_init__(self):
        n = 2 * self.band + 1
        if self.t_hat is None:
            self.t_hat = np.zeros(n, dtype=complex)
        if self.z_hat is None:
            self.z_hat = np.zeros(n, dtype=complex)
        self.t_hat = np.asarray(self.t_hat, dtype=complex)
        self.z_hat = np.asarray(self.z_hat, dtype=complex)
        if len(self.t_hat) != n or len(self.z_hat) != n:
            raise ValueError("coefficient arrays must have length 2*band+1")
        self._symmetrize()

    # -- indexing helpers ---------------------------------------------------

    def ks(self) -> np.ndarray:
        return np.arange(-self.band, self.band + 1)

    def t_coeff(self, k: int) -> complex:
        return complex(self.t_hat[k + self.band])

    def z_coeff(self, k: int) -> complex:
        return complex(self.z_hat[k + self.band])

    def set_t(self, k: int, v: complex):
        self.t_hat[k + self.band] = v
        self.t_hat[-k + self.band] = np.conj(v)

    def set_z(self, k: int, v: complex):
        self.z_hat[k + self.band] = v

    def _symmetrize(self):
        # Enforce exact conjugate symmetry of the t channel (realness).
        sym = 0.5 * (self.t_hat + np.conj(self.t_hat[::-1]))
        self.t_hat = sym

    def copy(self) -> "AlgebraMap":
        return AlgebraMap(self.band, self.t_hat.copy(), self.z_hat.copy(),
                          self.tail_bound)

    def resized(self, band: int) -> "AlgebraMap":
        """Same map on a different band; shrinking adds the dropped modes'
        C^0 mass to the tail bound."""
        out = AlgebraMap(band)
        lo = max(-self.band, -band)
        hi = min(self.band, band)
        out.t_hat[lo + band:hi + band + 1] = self.t_hat[lo + self.band:hi + self.band + 1]
        out.z_hat[lo + band:hi + band + 1] = self.z_hat[lo + self.band:hi + self.band + 1]
        dropped = 0.0
        if band < self.band:
            mask = np.abs(self.ks()) > band
            dropped = float(np.sum(np.abs(self.t_hat[mask]))
                            + np.sum(np.abs(self.z_hat[mask])))
        out.tail_bound = self.tail_bound + dropped
        out._symmetrize()
        return out

    # -- linear structure ---------------------------------------------------

    def scaled(self, c: float) -> "AlgebraMap":
        return AlgebraMap(self.band, c * self.t_hat, c * self.z_hat,
                          abs(c) * self.tail_bound)

    def plus(self, other: "AlgebraMap") -> "AlgebraMap":
        band = max(self.band, other.band)
        a, b = self.resized(band), other.resized(band)
        return AlgebraMap(band, a.t_hat + b.t_hat, a.z_hat + b.z_hat,
                          a.tail_bound + b.tail_bound)

    def translate(self, alpha: float) -> "AlgebraMap":
        """Pullback by x -> x + alpha: coefficient k gains e^{2 i pi k alpha}."""
        ph = np.exp(2j * np.pi * self.ks() * alpha)
        return AlgebraMap(self.band, self.t_hat * ph, self.z_hat * ph,
                          self.tail_bound)


def zero_map(band: int) -> AlgebraMap:
    return AlgebraMap(band)


def single_z_mode(band: int, k: int, coeff: complex) -> AlgebraMap:
    F = AlgebraMap(band)
    F.set_z(k, coeff)
    return F


def single_t_mode(band: int, k: int, coeff: complex) -> AlgebraMap:
    F = AlgebraMap(band)
    F.set_t(k, coeff)
    return F


# ---------------------------------------------------------------------------
# Truncations
# ---------------------------------------------------------------------------

def truncate(F: AlgebraMap, N: int, variant: str,
             k_r: int | None = None, width: int | None = None) -> AlgebraMap:
    """Spectral truncation operators.

    variant:
      'T_N'             keep |k| <= N
      'dotT_N'          keep 0 < |k| <= N (mean removed)
      'R_N'             keep |k| > N (the rest)
      'resonant_band'   z channel only: keep 0 < |k - k_r| <= width
      'discentered_rest' z channel only: keep k == k_r or |k - k_r| > width

    Modes removed by T/dotT variants contribute their C^0 mass to the
    result's tail bound; R_N carries no tail (it *is* the tail).
    """
    out = F.copy()
    k = F.ks()
    if variant in ("T_N", "dotT_N"):
        keep = np.abs(k) <= N
        if variant == "dotT_N":
            keep = keep & (k != 0)
        dropped = (np.sum(np.abs(F.t_hat[~keep & (np.abs(k) > N)]))
                   + np.sum(np.abs(F.z_hat[~keep & (np.abs(k) > N)])))
        out.t_hat = np.where(keep, F.t_hat, 0.0)
        out.z_hat = np.where(keep, F.z_hat, 0.0)
        out.tail_bound = F.tail_bound + float(dropped)
    elif variant == "R_N":
        keep = np.abs(k) > N
        out.t_hat = np.where(keep, F.t_hat, 0.0)
        out.z_hat = np.where(keep, F.z_hat, 0.0)
        out.tail_bound = F.tail_bound
    elif variant == "resonant_band":
        if k_r is None or width is None:
            raise ValueError("resonant_band needs k_r and width")
        keep = (np.abs(k - k_r) <= width) & (k != k_r)
        out.t_hat = np.zeros_like(F.t_hat)
        out.z_hat = np.where(keep, F.z_hat, 0.0)
        out.tail_bound = F.tail_bound
    elif variant == "discentered_rest":
        if k_r is None or width is None:
            raise ValueError("discentered_rest needs k_r and width")
        keep = (np.abs(k - k_r) > width) | (k == k_r)
        out.t_hat = np.zeros_like(F.t_hat)
        out.z_hat = np.where(keep, F.z_hat, 0.0)
        out.tail_bound = F.tail_bound
    else:
        raise ValueError(f"unknown truncation variant {variant!r}")
    if variant in ("T_N", "dotT_N", "R_N"):
        out._symmetrize()
    return out


def rest_estimate(F: AlgebraMap, N: int, s: int, s_prime: int | None = None) -> float:
    """C^s bound on R_N F from the stored coefficients:
    N^{s - s' + 2} * ||F||_{s'} with s' = s + 2 by default."""
    if s_prime is None:
        s_prime = s + 2
    return N ** (s - s_prime + 2) * norm_cs_upper(F, s_prime)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def norm_hs(F: AlgebraMap, s: float) -> float:
    """Sobolev norm: sqrt(sum (1+k^2)^s |Fhat(k)|^2) over both channels."""
    k = F.ks().astype(float)
    wgt = (1.0 + k * k) ** s
    return float(np.sqrt(np.sum(wgt * (np.abs(F.t_hat) ** 2
                                       + np.abs(F.z_hat) ** 2))))


def norm_cs_upper(F: AlgebraMap, s: int) -> float:
    """Certified upper bound max_{sigma <= s} ||d^sigma U||_inf via the
    coefficient l^1 sums; includes the stored tail bound (C^0 content)."""
    k = F.ks().astype(float)
    mag = np.sqrt(np.abs(F.t_hat) ** 2 + np.abs(F.z_hat) ** 2)
    best = 0.0
    for sigma in range(s + 1):
        best = max(best, float(np.sum((2.0 * np.pi * np.abs(k)) ** sigma * mag)))
    return best + F.tail_bound


def norm_c0_upper(F: AlgebraMap) -> float:
    return norm_cs_upper(F, 0)


def norm_cs(F: AlgebraMap, s: int) -> float:
    """Grid-certified lower bound for the C^s norm: max over 8*band+8 points
    of the pointwise su(2) norm of the spectral derivatives d^sigma U,
    sigma <= s."""
    n = grid_size(F.band, oversample=8)
    k = F.ks().astype(float)
    best = 0.0
    for sigma in range(s + 1):
        mult = (2j * np.pi * k) ** sigma
        t = eval_channel(F.t_hat * mult, F.band, n)
        z = eval_channel(F.z_hat * mult, F.band, n)
        ptwise = np.sqrt(np.abs(t) ** 2 + np.abs(z) ** 2)
        best = max(best, float(np.max(ptwise)))
    return best


def norm_l2(F: AlgebraMap) -> float:
    return norm_hs(F, 0.0)


# ---------------------------------------------------------------------------
# Evaluation / projection
# ---------------------------------------------------------------------------

def eval_channel(coeffs: np.ndarray, band: int, n: int,
                 offset: float = 0.0) -> np.ndarray:
    """Evaluate sum_k c_k e^{2 i pi k (x + offset)} on the grid x_j = j/n."""
    if offset != 0.0:
        ks = np.arange(-band, band + 1)
        coeffs = coeffs * np.exp(2j * np.pi * ks * offset)
    spec = np.zeros(n, dtype=complex)
    ks = np.arange(-band, band + 1)
    spec[ks % n] += coeffs
    return np.fft.ifft(spec) * n


def project_channel(samples: np.ndarray, band: int) -> np.ndarray:
    """Fourier coefficients |k| <= band of a sampled function."""
    n = len(samples)
    spec = np.fft.fft(samples) / n
    ks = np.arange(-band, band + 1)
    return spec[ks % n]


def eval_map(F: AlgebraMap, n: int | None = None, offset: float = 0.0):
    """Sample (U_t, U_z) on the grid x_j = j/n (+ offset)."""
    if n is None:
        n = grid_size(F.band)
    t = eval_channel(F.t_hat, F.band, n, offset).real
    z = eval_channel(F.z_hat, F.band, n, offset)
    return t, z


# ---------------------------------------------------------------------------
# Homological-equation solvers
# ---------------------------------------------------------------------------

def solve_diagonal(F: AlgebraMap, alpha: float, N: int) -> AlgebraMap:
    """Solve Y_t(. + alpha) - Y_t(.) + dotT_N F_t = 0 on the t channel:
    Yhat_t(k) = -Fhat_t(k) / (e^{2 i pi k alpha} - 1), 0 < |k| <= N."""
    Y = AlgebraMap(F.band)
    k = F.ks()
    sel = (k != 0) & (np.abs(k) <= N)
    div = np.exp(2j * np.pi * k[sel] * alpha) - 1.0
    Y.t_hat[sel] = -F.t_hat[sel] / div
    Y._symmetrize()
    return Y


def solve_offdiagonal(F: AlgebraMap, alpha: float, a: float, N: int,
                      resonance: ResonanceReport) -> AlgebraMap:
    """Solve the off-diagonal (z channel) equation on |k| <= N, skipping the
    resonant mode: Yhat_z(k) = -Fhat_z(k) / (e^{2 i pi (k alpha - 2a)} - 1).

    Every divisor actually used must stay >= 1/(2K); a smaller one means the
    resonance report does not describe this (a, alpha, N, K) and the solver
    refuses (DivisorUnderflow).
    """
    Y = AlgebraMap(F.band)
    k = F.ks()
    sel = np.abs(k) <= N
    if resonance.resonant_mode is not None:
        sel = sel & (k != resonance.resonant_mode)
    phase = k[sel] * alpha - 2.0 * a
    d = np.abs(phase - np.round(phase))
    used = sel.copy()
    if np.any((d < 0.5 / resonance.K) & (np.abs(F.z_hat[sel]) > 0)):
        bad = k[sel][(d < 0.5 / resonance.K) & (np.abs(F.z_hat[sel]) > 0)]
        raise DivisorUnderflow(
            f"divisor below 1/(2K) at modes {bad.tolist()} (K={resonance.K:g})")
    div = np.exp(2j * np.pi * phase) - 1.0
    vals = np.zeros_like(div)
    nz = np.abs(F.z_hat[sel]) > 0
    vals[nz] = -F.z_hat[sel][nz] / div[nz]
    Y.z_hat[used] = vals
    return Y


# ---------------------------------------------------------------------------
# Group-valued sampled maps
# ---------------------------------------------------------------------------

@dataclass
class GroupMap:
    """Samples of a map T -> SU(2) on the uniform grid x_j = j/n."""

    z: np.ndarray
    w: np.ndarray
    band: int

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        self.w = np.asarray(self.w, dtype=complex)
        self.z, self.w = algebra.renormalize_arrays(self.z, self.w)

    @property
    def n(self) -> int:
        return len(self.z)

    def mul(self, other: "GroupMap") -> "GroupMap":
        a, b = _common_grid(self, other)
        z, w = algebra.mul_arrays(a.z, a.w, b.z, b.w)
        return GroupMap(z, w, max(self.band, other.band))

    def inv(self) -> "GroupMap":
        z, w = algebra.inv_arrays(self.z, self.w)
        return GroupMap(z, w, self.band)

    def at(self, j: int) -> GroupElement:
        return GroupElement(complex(self.z[j]), complex(self.w[j]))

    def log(self, band: int | None = None) -> AlgebraMap:
        """Pointwise principal log, projected back to coefficients."""
        if band is None:
            band = self.band
        t, u = algebra.log_arrays(self.z, self.w)
        F = AlgebraMap(band,
                       project_channel(t.astype(complex), band),
                       project_channel(u, band))
        # Aliasing of the nonlinearity beyond the band is measured, not assumed.
        n = self.n
        t2 = eval_channel(F.t_hat, band, n).real
        u2 = eval_channel(F.z_hat, band, n)
        F.tail_bound = float(np.max(np.sqrt((t - t2) ** 2 + np.abs(u - u2) ** 2)))
        return F

    def dist_c0(self, other: "GroupMap") -> float:
        a, b = _common_grid(self, other)
        dz, dw = algebra.mul_arrays(*algebra.inv_arrays(a.z, a.w), b.z, b.w)
        # Chordal form of the geodesic distance: unlike arccos(Re z), it does
        # not lose half the significant digits near the identity.
        chord = np.sqrt(np.abs(dz - 1.0) ** 2 + np.abs(dw) ** 2)
        return float(np.max(2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))))


def _common_grid(a: GroupMap, b: GroupMap):
    if a.n == b.n:
        return a, b
    raise ValueError(f"grid mismatch: {a.n} vs {b.n}")


def constant_group_map(S: GroupElement, n: int, band: int = 0) -> GroupMap:
    return GroupMap(np.full(n, complex(S.z)), np.full(n, complex(S.w)), band)


def to_group(F: AlgebraMap, n: int | None = None, offset: float = 0.0) -> GroupMap:
    """Pointwise exponential e^{F(x)} on the sample grid (x_j = j/n + offset)."""
    if n is None:
        n = grid_size(F.band)
    t, u = eval_map(F, n, offset)
    z, w = algebra.exp_arrays(t, u)
    return GroupMap(z, w, F.band)


def torus_exponential(k_half: int, n: int, offset: float = 0.0,
                      band: int | None = None) -> GroupMap:
    """The map x -> {e^{- i pi k_half x}, 0} sampled on the grid (the
    resonance-reduction conjugation for descriptor k_half)."""
    x = (np.arange(n) / n) + offset
    z = np.exp(-1j * np.pi * k_half * x)
    return GroupMap(z, np.zeros(n, dtype=complex),
                    band if band is not None else abs(k_half))


def adjoint_by_group_map(G: GroupMap, F: AlgebraMap) -> AlgebraMap:
    """Pointwise Ad(G(x)).F(x), projected back to the coefficient band
    implied by the two spectral supports."""
    n = max(G.n, grid_size(F.band + 2 * G.band))
    if n != G.n:
        raise ValueError("group map grid too coarse for the adjoint product")
    t, u = eval_map(F, G.n)
    t2, u2 = algebra.adjoint_arrays(G.z, G.w, t, u)
    band = F.band + 2 * G.band
    out = AlgebraMap(band,
                     project_channel(t2.astype(complex), band),
                     project_channel(u2, band))
    out.tail_bound = F.tail_bound
    return out


def adjoint_constant(S: GroupElement, F: AlgebraMap) -> AlgebraMap:
    """Ad(S) applied to the map, exactly on coefficients."""
    z, w = S.z, S.w
    c = abs(z) ** 2 - abs(w) ** 2
    zw = z * np.conj(w)
    t_rev = np.conj(F.t_hat[::-1])  # = t_hat by symmetry; kept for clarity
    z_rev = np.conj(F.z_hat[::-1])
    t2 = c * F.t_hat + (-1j) * (zw * F.z_hat - np.conj(zw) * z_rev)
    z2 = z * z * F.z_hat + w * w * z_rev - 2j * z * w * F.t_hat
    return AlgebraMap(F.band, t2, z2, F.tail_bound)
