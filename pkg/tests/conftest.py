"""Shared matrix oracles: every closed-form group/algebra operation is
checked against the literal 2x2 complex-matrix computation."""

import numpy as np
import pytest

from su2kam.algebra import AlgebraElement, GroupElement


def group_matrix(g: GroupElement) -> np.ndarray:
    """[[z, w], [-conj(w), conj(z)]]."""
    return np.array([[g.z, g.w],
                     [-np.conj(g.w), np.conj(g.z)]], dtype=complex)


def algebra_matrix(s: AlgebraElement) -> np.ndarray:
    """[[i t, u], [-conj(u), -i t]]."""
    return np.array([[1j * s.t, s.u],
                     [-np.conj(s.u), -1j * s.t]], dtype=complex)


def group_from_matrix(M: np.ndarray) -> GroupElement:
    return GroupElement(complex(M[0, 0]), complex(M[0, 1]))


def algebra_from_matrix(M: np.ndarray) -> AlgebraElement:
    return AlgebraElement(float(M[0, 0].imag), complex(M[0, 1]))


def random_group(rng) -> GroupElement:
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return GroupElement(complex(v[0], v[1]), complex(v[2], v[3]))


def random_algebra(rng, scale: float = 1.0) -> AlgebraElement:
    t = scale * rng.normal()
    u = scale * (rng.normal() + 1j * rng.normal())
    return AlgebraElement(t, u)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
