"""Two-dimensional lattice reduction (Lagrange-Gauss) and short-vector
enumeration for deformed integer lattices B Z^2.

Basis vectors are the *columns* of B, matching the convention that a
base holonomy (p, q) deforms to B @ (p, q).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError, NumericalFailureError

__all__ = [
    "lagrange_gauss",
    "shortest_vector",
    "shortest_vector_batch",
    "short_primitive_vectors",
]


def lagrange_gauss(B) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-reduced basis of the lattice B Z^2.

    Returns (R, U) with R = B @ U, U integer unimodular, and the columns
    of R satisfying |r1| <= |r2| with |<r1, r2>| <= |r1|^2 / 2; r1 is a
    shortest nonzero lattice vector.
    """
    B = np.asarray(B, dtype=float)
    if B.shape != (2, 2) or abs(np.linalg.det(B)) < 1e-300:
        raise InvalidInputError("lagrange_gauss needs a nonsingular 2x2 basis")
    u = B[:, 0].copy()
    v = B[:, 1].copy()
    U = np.eye(2, dtype=np.int64)
    if u @ u > v @ v:
        u, v = v, u.copy()
        U = U[:, ::-1].copy()
    for _ in range(256):
        mu = round((u @ v) / (u @ u))
        if mu != 0:
            v = v - mu * u
            U[:, 1] = U[:, 1] - mu * U[:, 0]
        if v @ v < u @ u:
            u, v = v, u.copy()
            U = U[:, ::-1].copy()
        else:
            break
    else:
        raise NumericalFailureError("lagrange_gauss did not terminate")
    R = np.column_stack([u, v])
    return R, U


def shortest_vector(B) -> tuple[float, np.ndarray]:
    """Length and integer coordinates of a shortest nonzero vector of B Z^2."""
    R, U = lagrange_gauss(B)
    return float(np.hypot(R[0, 0], R[1, 0])), U[:, 0].copy()


def shortest_vector_batch(mats: np.ndarray, max_iter: int = 200) -> np.ndarray:
    """Shortest-vector lengths for a (N, 2, 2) stack of bases.

    Vectorised Lagrange-Gauss: all lattices are reduced in lockstep,
    masking out the ones that already terminated.
    """
    mats = np.asarray(mats, dtype=float)
    u = mats[:, :, 0].copy()
    v = mats[:, :, 1].copy()
    nu = np.einsum("ij,ij->i", u, u)
    nv = np.einsum("ij,ij->i", v, v)
    swap = nu > nv
    u[swap], v[swap] = v[swap], u[swap].copy()
    for _ in range(max_iter):
        nu = np.einsum("ij,ij->i", u, u)
        mu = np.rint(np.einsum("ij,ij->i", u, v) / nu)
        active = mu != 0.0
        if not active.any():
            break
        v[active] -= mu[active, None] * u[active]
        nv = np.einsum("ij,ij->i", v, v)
        swap = nv < nu
        u[swap], v[swap] = v[swap], u[swap].copy()
    else:
        raise NumericalFailureError("batched lattice reduction did not terminate")
    return np.sqrt(np.einsum("ij,ij->i", u, u))


def short_primitive_vectors(B, L: float) -> list[tuple[tuple[int, int], float]]:
    """Primitive integer vectors w in the upper half-plane with |B w| <= L.

    "Upper half-plane" means q > 0, or q == 0 and p > 0, so exactly one
    of +-w is listed.  Sorted by |B w|, then lexicographically by (p, q).
    """
    B = np.asarray(B, dtype=float)
    if L <= 0.0:
        return []
    R, U = lagrange_gauss(B)
    b1, b2 = R[:, 0], R[:, 1]
    n1 = float(b1 @ b1)
    # Gram-Schmidt height of b2 over b1 bounds the second coefficient.
    proj = float(b1 @ b2) / n1
    b2perp = b2 - proj * b1
    h = math.sqrt(float(b2perp @ b2perp))
    if math.sqrt(n1) > L:
        return []
    m2_max = int(L / h + 1e-9)
    out = []
    r1 = math.sqrt(n1)
    for m2 in range(-m2_max, m2_max + 1):
        center = -m2 * proj
        span = L / r1
        for m1 in range(math.ceil(center - span - 1e-9), math.floor(center + span + 1e-9) + 1):
            if m1 == 0 and m2 == 0:
                continue
            w = U @ np.array([m1, m2], dtype=np.int64)
            p, q = int(w[0]), int(w[1])
            if q < 0 or (q == 0 and p < 0):
                continue
            if math.gcd(abs(p), abs(q)) != 1:
                continue
            vec = B @ np.array([p, q], dtype=float)
            length = float(np.hypot(vec[0], vec[1]))
            if length <= L * (1.0 + 1e-12):
                out.append(((p, q), length))
    out.sort(key=lambda item: (item[1], item[0]))
    return out
