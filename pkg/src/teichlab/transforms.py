"""Laplace transforms of correlations and their meromorphic extensions,
contour residues, resolvent/spectral-projection identities on toy
operators, and Cauchy-transform atom extraction.

The spectral measure is modelled by finitely many atoms (s_i, w_i) with
s_i in (0, 1]: the transform of C(t) = sum w_i phi_{s_i}(g_t) splits as
A_delta(z) + B_delta(z), where B_delta collects the simple poles

    B_delta(z) = sum_{s_i >= delta} c(s_i) w_i / (z - s_i + 1)

and A_delta is holomorphic on Re z > -1 + 2 delta (its integrand decays
like e^{-(1+s_i)t}).  The residue of the extension at z = s_i - 1 is
exactly c(s_i) w_i, which the contour machinery reproduces numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import adaptive_gl, trapezoid_circle
from .errors import (
    DomainError,
    InvalidInputError,
    NumericalFailureError,
    PoleError,
)
from .spherical import c_function, phi_defect

__all__ = [
    "SpectralAtoms",
    "MeasureOnInterval",
    "laplace_numeric",
    "b_delta",
    "extended_F",
    "residue_contour",
    "resolvent_S",
    "spectral_projection",
    "spectral_radius_via_iterates",
    "cauchy_transform",
    "atom_mass",
]

TAIL_TARGET = 1e-14
POLE_CLEARANCE = 1e-9
MAX_TOY_DIM = 64


@dataclass(frozen=True)
class SpectralAtoms:
    """Finite spectral measure sum w_i delta_{s_i} with s_i in (0, 1]."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        prev = 0.0
        for s, w in self.atoms:
            if not 0.0 < s <= 1.0:
                raise InvalidInputError(f"atom parameter {s} outside (0, 1]")
            if s <= prev:
                raise InvalidInputError("atom parameters must be strictly increasing")
            if w < 0.0:
                raise InvalidInputError(f"negative atom weight {w}")
            prev = s

    @classmethod
    def of(cls, *pairs):
        return cls(tuple((float(s), float(w)) for s, w in pairs))


@dataclass(frozen=True)
class MeasureOnInterval:
    """Nonnegative measure on [0,1]: atoms plus a piecewise-constant density.

    ``density`` is a sequence of (a, b, rho) pieces with 0 <= a < b <= 1.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        for x, m in self.atoms:
            if not 0.0 <= x <= 1.0 or m < 0.0:
                raise InvalidInputError(f"bad atom ({x}, {m})")
        for a, b, rho in self.density:
            if not (0.0 <= a < b <= 1.0) or rho < 0.0:
                raise InvalidInputError(f"bad density piece ({a}, {b}, {rho})")

    @property
    def total_mass(self) -> float:
        return (sum(m for _, m in self.atoms)
                + sum(rho * (b - a) for a, b, rho in self.density))


# ----------------------------------------------------------------------
# Laplace transforms.

def _as_callable(corr):
    if callable(corr):
        return corr, None
    ts, ys = np.asarray(corr[0], dtype=float), np.asarray(corr[1], dtype=float)
    if ts.ndim != 1 or ts.shape != ys.shape or ts.size < 2:
        raise InvalidInputError("sampled correlation needs matching 1-d t/value arrays")

    def interp(t):
        return np.interp(t, ts, ys)

    return interp, float(ts[-1])


def laplace_numeric(corr, z: complex, bound: float | None = None,
                    atol: float = 1e-10) -> tuple[complex, float]:
    """int_0^inf e^{-zt} corr(t) dt for Re z >= 0.05.

    ``corr`` is a callable on t >= 0 (vectorised over arrays) or a pair
    of sample arrays (t, values), interpolated linearly.  Returns
    (value, error_estimate); the estimate combines the quadrature error
    and the discarded-tail bound |corr|_inf e^{-Re z T}/Re z.
    """
    z = complex(z)
    if z.real < 0.05:
        raise DomainError(f"laplace_numeric needs Re z >= 0.05, got {z}")
    f, t_last = _as_callable(corr)
    if bound is None:
        probe = np.abs(np.asarray(f(np.linspace(0.0, 40.0, 257)), dtype=float))
        bound = max(1.0, float(probe.max()))
    t_cut = math.log(max(bound, 1.0) / TAIL_TARGET) / z.real
    if t_last is not None:
        t_cut = min(t_cut, t_last)

    def integrand(t):
        return np.exp(-z * t) * np.asarray(f(t))

    val, qerr = adaptive_gl(integrand, 0.0, t_cut, atol=atol)
    tail = bound * math.exp(-z.real * t_cut) / z.real
    err = qerr + tail
    if err > max(atol * 100.0, 1e-6):
        raise NumericalFailureError(
            f"laplace tail/quadrature bound {err:g} above tolerance", partial=val)
    return complex(val), float(err)


def b_delta(atoms: SpectralAtoms, z: complex, delta: float) -> complex:
    """Pole part  sum_{s_i >= delta} c(s_i) w_i / (z - s_i + 1)."""
    if delta <= 0.0:
        raise DomainError("b_delta needs delta > 0")
    z = complex(z)
    out = 0.0 + 0.0j
    for s, w in atoms.atoms:
        if s < delta:
            continue
        den = z - s + 1.0
        if abs(den) < POLE_CLEARANCE:
            raise PoleError(f"z = {z} is at the pole of atom (s={s}, w={w})",
                            location=s - 1.0)
        out += c_function(s) * w / den
    return out


def _defect_transform(s: float, z: complex, atol: float) -> complex:
    """int_0^inf e^{-zt} (phi_s(t) - c(s) e^{(s-1)t}) dt, Re z > -1 + small."""
    decay = z.real + 1.0 + s          # the integrand is O(e^{-(1+s)t})
    if decay <= 0.05:
        raise DomainError(f"defect transform diverges at z = {z} for atom s = {s}")
    scale = abs(c_function(-s)) + 1.0
    t_cut = math.log(scale / TAIL_TARGET) / decay

    def integrand(t):
        return np.exp(-z * t) * phi_defect(s, t)

    val, _ = adaptive_gl(integrand, 0.0, t_cut, atol=atol)
    return complex(val)


def extended_F(atoms: SpectralAtoms, z: complex, delta: float,
               atol: float = 1e-10) -> complex:
    """Holomorphic extension of the Laplace transform of
    C(t) = sum w_i phi_{s_i}(g_t) to {Re z > -1 + 2 delta} minus the
    poles {s_i - 1 : s_i >= delta}.

    Computed as A_delta(z) + B_delta(z); for Re z > 0 this agrees with
    ``laplace_numeric`` applied to C.  A_delta is only probed pointwise;
    its boundedness on the closed half-plane is not certified here.
    """
    z = complex(z)
    if delta <= 0.0:
        raise DomainError("extended_F needs delta > 0")
    if z.real <= -1.0 + 2.0 * delta - 1e-12:
        raise DomainError(f"z = {z} outside the extension half-plane"
                          f" Re z > {-1.0 + 2.0 * delta}")
    out = b_delta(atoms, z, delta)
    for s, w in atoms.atoms:
        if w == 0.0:
            continue
        if s >= delta:
            if s < 1.0:  # trivial atom has zero defect
                out += w * _defect_transform(s, z, atol)
        else:
            # Below the cut: keep the full transform of w phi_s in A_delta.
            out += w * _defect_transform(s, z, atol)
            den = z - s + 1.0
            if abs(den) < POLE_CLEARANCE:
                raise PoleError(f"z = {z} at pole of sub-cut atom s = {s}",
                                location=s - 1.0)
            out += c_function(s) * w / den
    return out


# ----------------------------------------------------------------------
# Contours, resolvents, projections.

def residue_contour(f, z0: complex, radius: float,
                    n_nodes: int = 32) -> tuple[complex, float]:
    """(1/2 pi i) contour integral of f around a circle at z0.

    Trapezoid rule (spectrally accurate for f holomorphic near the
    circle) with node doubling; returns (value, error_estimate).
    """
    if radius <= 0.0:
        raise InvalidInputError("radius must be positive")

    def fv(zs):
        return np.array([f(z) for z in np.atleast_1d(zs)], dtype=complex)

    return trapezoid_circle(fv, complex(z0), float(radius), n_nodes=n_nodes)


def _check_toy(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError("toy operator must be square")
    if M.shape[0] > MAX_TOY_DIM:
        raise InvalidInputError(f"toy operator dimension capped at {MAX_TOY_DIM}")
    if not np.all(np.isfinite(M.real)) or not np.all(np.isfinite(M.imag)):
        raise InvalidInputError("toy operator has non-finite entries")
    return M


def resolvent_S(M, z0: complex, z: complex) -> np.ndarray:
    """S(z) = (z0-z)^{-1} M ((z0-z)^{-1} I - M)^{-1}, evaluated stably as
    M (I - (z0-z) M)^{-1}; when M = (z0 I - L)^{-1} this equals
    (z I - L)^{-1}."""
    M = _check_toy(M)
    w = complex(z0) - complex(z)
    A = np.eye(M.shape[0], dtype=complex) - w * M
    try:
        out = np.linalg.solve(A.T, M.T).T  # M A^{-1}
    except np.linalg.LinAlgError as exc:
        raise PoleError(f"1/(z0-z) = {1.0/w if w != 0 else math.inf} is an "
                        f"eigenvalue of M", location=z) from exc
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e14:
        raise PoleError(f"resolvent solve nearly singular at z = {z}", location=z)
    return out


def spectral_projection(L, lam: complex, radius: float,
                        n_nodes: int = 64) -> np.ndarray:
    """Riesz projection (1/2 pi i) oint (w I - L)^{-1} dw on the circle
    |w - lam| = radius; the circle must not meet the spectrum."""
    L = _check_toy(L)
    eigs = np.linalg.eigvals(L)
    dist = np.abs(np.abs(eigs - lam) - radius)
    if dist.min() < 1e-8 * max(1.0, radius):
        raise InvalidInputError(
            f"an eigenvalue lies on the contour around {lam} (radius {radius})")
    eye = np.eye(L.shape[0], dtype=complex)

    def res(zs):
        return np.stack([np.linalg.solve(z * eye - L, eye) for z in zs])

    def estimate(n):
        theta = np.arange(n) * (2.0 * np.pi / n)
        zs = lam + radius * np.exp(1j * theta)
        vals = res(zs)
        return radius * np.mean(vals * np.exp(1j * theta)[:, None, None], axis=0)

    n = max(16, n_nodes)
    prev = estimate(n)
    for _ in range(10):
        n *= 2
        cur = estimate(n)
        if np.abs(cur - prev).max() <= 1e-11 * max(1.0, np.abs(cur).max()):
            return cur
        prev = cur
    raise NumericalFailureError("projection contour did not stabilise", partial=prev)


def spectral_radius_via_iterates(L, n_max: int) -> float:
    """min_{n <= n_max} ||L^n||^{1/n} (spectral norm), with rescaling to
    avoid overflow; an upper bound decreasing towards the spectral radius."""
    L = _check_toy(L)
    if n_max < 1:
        raise InvalidInputError("n_max must be >= 1")
    best = math.inf
    P = np.eye(L.shape[0], dtype=complex)
    log_scale = 0.0
    for n in range(1, n_max + 1):
        P = P @ L
        nrm = float(np.linalg.norm(P, 2))
        if not math.isfinite(nrm):
            raise NumericalFailureError(f"power iterate overflowed at n = {n}",
                                        partial=best)
        if nrm == 0.0:
            return 0.0
        log_scale += math.log(nrm)
        P /= nrm
        best = min(best, math.exp(log_scale / n))
    return best


# ----------------------------------------------------------------------
# Cauchy transforms on [0, 1].

def cauchy_transform(nu: MeasureOnInterval, z: complex) -> complex:
    """F(z) = int dnu(s) / (z - s + 1); atoms summed directly, constant
    density pieces integrated in closed form (principal logs are the
    correct branch for w = z + 1 off the real pieces)."""
    z = complex(z)
    w = z + 1.0
    out = 0.0 + 0.0j
    for x, m in nu.atoms:
        den = z - x + 1.0
        if abs(den) < 1e-14:
            raise PoleError(f"z = {z} at the image of atom {x}", location=x - 1.0)
        out += m / den
    for a, b, rho in nu.density:
        if abs(w.imag) < 1e-300 and a - 1e-14 <= w.real <= b + 1e-14:
            raise PoleError(f"z = {z} meets the density piece [{a}, {b}]",
                            location=z)
        out += rho * (np.log(w - a) - np.log(w - b))
    return out


def atom_mass(nu: MeasureOnInterval, x: float, y_ladder) -> float:
    """Mass nu({x}) via the boundary jump of the Cauchy transform.

    For each rung y,  -(y/2) Im(F(x-1+iy) - F(x-1-iy)) equals
    int y^2 / ((x-s)^2 + y^2) dnu(s), which converges to nu({x}) as
    y -> 0 with an expansion in powers of y; the geometric ladder is
    Richardson-extrapolated to the limit.
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x = {x} outside [0, 1]")
    ys = np.asarray(y_ladder, dtype=float)
    if ys.ndim != 1 or ys.size < 3:
        raise InvalidInputError("y_ladder needs at least 3 rungs")
    if not (np.all(ys > 0.0) and np.all(np.diff(ys) < 0.0)):
        raise InvalidInputError("y_ladder must be positive and strictly decreasing")
    ratios = ys[:-1] / ys[1:]
    rho = float(ratios.mean())
    if rho <= 1.0 + 1e-9 or np.abs(ratios - rho).max() > 1e-9 * rho:
        raise InvalidInputError("y_ladder must be geometric with ratio > 1")

    vals = []
    for y in ys:
        jump = (cauchy_transform(nu, complex(x - 1.0, y))
                - cauchy_transform(nu, complex(x - 1.0, -y)))
        vals.append(-(y / 2.0) * jump.imag)
    # Neville table eliminating y, y^2, ... successively.
    T = np.asarray(vals, dtype=float)
    for j in range(1, T.size):
        fac = rho ** j
        T = (fac * T[1:] - T[:-1]) / (fac - 1.0)
    return float(T[0])
