"""Exact constructors and decompositions for the basic SL(2,R) flows.

The four one-parameter families are

    geodesic       g_t     = [[e^t, 0], [0, e^-t]]
    horocycle      h_r     = [[1, r], [0, 1]]
    opp_horocycle  h~_r    = [[1, 0], [r, 1]]
    rotation       k_theta = [[cos, sin], [-sin, cos]]

together with the Lie-algebra constants OMEGA, W, V entering the
Casimir normalisation (L_W^2 - L_OMEGA^2 - L_V^2)/4, and the ANK
decomposition m = g_tau . h~_rtilde . k_theta used by the recurrence
estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "GroupElement",
    "ANKCoords",
    "OMEGA",
    "W",
    "V",
    "FLOW_GENERATORS",
    "generator",
    "conjugated_horocycle_param",
    "ank_decompose",
    "ank_reconstruct",
    "random_sl2",
]

SL_DET_TOL = 1e-12

# Lie-algebra constants, trace zero exactly.
OMEGA = np.array([[1.0, 0.0], [0.0, -1.0]])      # generator of g_t
W = np.array([[0.0, 1.0], [-1.0, 0.0]])          # generator of k_theta
V = np.array([[0.0, 1.0], [1.0, 0.0]])           # shear direction

# Infinitesimal generators of the four named flows.
FLOW_GENERATORS = {
    "geodesic": OMEGA,
    "horocycle": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "opp_horocycle": np.array([[0.0, 0.0], [1.0, 0.0]]),
    "rotation": W,
}


@dataclass(frozen=True)
class GroupElement:
    """Row-major 2x2 real matrix, immutable.

    Use :meth:`special` for SL(2,R) elements (det == 1 up to 1e-12) and
    :meth:`positive` for GL+(2,R) elements (det > 0).
    """

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def special(cls, a, b, c, d):
        det = a * d - b * c
        if not math.isfinite(det) or abs(det - 1.0) > SL_DET_TOL:
            raise InvalidInputError(f"not in SL(2,R): det = {det!r}")
        return cls(float(a), float(b), float(c), float(d))

    @classmethod
    def positive(cls, a, b, c, d):
        det = a * d - b * c
        if not math.isfinite(det) or det <= 0.0:
            raise InvalidInputError(f"not in GL+(2,R): det = {det!r}")
        return cls(float(a), float(b), float(c), float(d))

    @classmethod
    def from_matrix(cls, m, special=False):
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise InvalidInputError(f"expected a 2x2 matrix, got shape {m.shape}")
        make = cls.special if special else cls.positive
        return make(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def mat(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        m = self.mat @ other.mat
        return GroupElement(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def inv(self) -> "GroupElement":
        det = self.det
        return GroupElement(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def apply(self, vec) -> np.ndarray:
        return self.mat @ np.asarray(vec, dtype=float)


@dataclass(frozen=True)
class ANKCoords:
    """Coordinates of m = g_tau . h~_rtilde . k_theta, theta in (-pi, pi]."""

    tau: float
    rtilde: float
    theta: float


def generator(kind: str, param: float) -> GroupElement:
    """One-parameter flow element g_t, h_r, h~_r or k_theta."""
    if not math.isfinite(param):
        raise InvalidInputError(f"non-finite flow parameter: {param!r}")
    t = float(param)
    if kind == "geodesic":
        return GroupElement(math.exp(t), 0.0, 0.0, math.exp(-t))
    if kind == "horocycle":
        return GroupElement(1.0, t, 0.0, 1.0)
    if kind == "opp_horocycle":
        return GroupElement(1.0, 0.0, t, 1.0)
    if kind == "rotation":
        ct, st = math.cos(t), math.sin(t)
        return GroupElement(ct, st, -st, ct)
    raise InvalidInputError(f"unknown generator kind: {kind!r}")


def conjugated_horocycle_param(t: float, r: float) -> float:
    """Parameter r' with g_t . h_r = h_{r'} . g_t, namely r' = r e^{2t}."""
    if not (math.isfinite(t) and math.isfinite(r)):
        raise InvalidInputError("non-finite conjugation parameters")
    out = r * math.exp(2.0 * t)
    if __debug__ and abs(t) < 20.0 and abs(out) < 1e15:
        lhs = (generator("geodesic", t) @ generator("horocycle", r)).mat
        rhs = (generator("horocycle", out) @ generator("geodesic", t)).mat
        scale = max(1.0, float(np.abs(lhs).max()))
        assert np.abs(lhs - rhs).max() <= 1e-12 * scale
    return out


def ank_decompose(m: GroupElement) -> ANKCoords:
    """Unique (tau, rtilde, theta) with m = g_tau . h~_rtilde . k_theta.

    Matching the first row of the product gives e^tau (cos, sin) theta,
    hence theta = atan2(b, a) and tau = log(a^2+b^2)/2; the second row
    then yields rtilde = a c + b d.
    """
    a, b, c, d = m.a, m.b, m.c, m.d
    det = a * d - b * c
    if abs(det - 1.0) > 1e-8:
        raise InvalidInputError(f"ank_decompose needs det == 1, got {det!r}")
    nsq = a * a + b * b
    tau = 0.5 * math.log(nsq)
    theta = math.atan2(b, a)
    rtilde = a * c + b * d
    return ANKCoords(tau=tau, rtilde=rtilde, theta=theta)


def ank_reconstruct(coords: ANKCoords) -> GroupElement:
    g = generator("geodesic", coords.tau)
    h = generator("opp_horocycle", coords.rtilde)
    k = generator("rotation", coords.theta)
    return g @ h @ k


def random_sl2(rng: np.random.Generator, scale: float = 1.0) -> GroupElement:
    """Random SL(2,R) element, sampled through the (global) ANK chart."""
    tau = scale * rng.standard_normal()
    rt = scale * rng.standard_normal()
    theta = rng.uniform(-math.pi, math.pi)
    return ank_reconstruct(ANKCoords(tau, rt, theta))
