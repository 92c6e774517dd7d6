"""Spherical functions of SL(2,R): series evaluation, an independent
integral oracle, and the classical decay estimates built from them.

Two evaluation routes are kept deliberately separate so they can
cross-check each other:

* ``phi`` sums the two-branch series
      c(s) e^{(s-1)t} sum_n G_n(s) e^{-2nt}
    + c(-s) e^{(-s-1)t} sum_n G_n(-s) e^{-2nt},
  where the coefficients G_n obey the recursion implemented in
  ``gamma_coeffs`` (G_0 = 1, G_n = 0 for odd n) and c is the
  Harish-Chandra function c(s) = Gamma(s/2) / (sqrt(pi) Gamma((s+1)/2));

* ``phi_oracle`` integrates the rotation-averaged matrix coefficient
      (1/2pi) int_0^{2pi} (e^{2t} cos^2 + e^{-2t} sin^2)^{(s-1)/2} dtheta
  by adaptive Gauss-Legendre panels.

Both are normalised to phi(s, 0) = 1.  On SO-invariant vectors the
radial Casimir reduces to  phi'' + 2 coth(2t) phi' = (s^2 - 1) phi;
``casimir_residual`` measures how well the series satisfies it (the
eigenvalue convention matches lambda = (1 - s^2)/4).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._quad import adaptive_gl
from .errors import DomainError, NumericalFailureError

__all__ = [
    "SphericalParam",
    "GammaSeries",
    "gamma_coeffs",
    "log_gamma",
    "c_function",
    "phi",
    "phi_defect",
    "phi_oracle",
    "harish_defect",
    "ratner_check",
    "casimir_residual",
]

T_MIN_SERIES = 0.05     # below this, the series converges too slowly
N_MAX_TERMS = 500
TRIVIAL_TOL = 1e-9      # |s-1| window treated as the trivial representation
S_ZERO_TOL = 1e-6       # |s| window where the two branches are degenerate


# ----------------------------------------------------------------------
# Log-gamma (Lanczos, g=7 with 9 coefficients, reflection for Re z < 1/2).
# Validated in the test suite against a 40-digit table.

_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _near_nonpositive_integer(z: complex, tol: float = 1e-13) -> bool:
    if abs(z.imag) > tol:
        return False
    r = round(z.real)
    return r <= 0 and abs(z.real - r) <= tol


def log_gamma(z) -> complex:
    """Principal-branch-agnostic complex log-gamma.

    Only differences of values are consumed downstream (through exp),
    so 2 pi i branch offsets introduced by the reflection formula are
    harmless.
    """
    z = complex(z)
    if _near_nonpositive_integer(z):
        raise DomainError(f"log_gamma pole at z = {z}")
    if z.real < 0.5:
        return cmath.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - log_gamma(1.0 - z)
    z -= 1.0
    x = _LANCZOS_C[0]
    for i, coeff in enumerate(_LANCZOS_C[1:], start=1):
        x += coeff / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def c_function(s) -> complex:
    """Harish-Chandra's function Gamma(s/2) / (sqrt(pi) Gamma((s+1)/2)).

    At a pole of the numerator (s a nonpositive even integer, incl. 0)
    a DomainError is raised; at a pole of the denominator the zero limit
    is returned (so c(-1) = 0).
    """
    s = complex(s)
    num, den = s / 2.0, (s + 1.0) / 2.0
    if _near_nonpositive_integer(num):
        raise DomainError(f"c(s) pole: Gamma({num}) diverges")
    if _near_nonpositive_integer(den):
        return 0.0 + 0.0j
    val = cmath.exp(log_gamma(num) - log_gamma(den)) / math.sqrt(math.pi)
    if s.imag == 0.0:
        return complex(val.real, 0.0)
    return val


# ----------------------------------------------------------------------
# Representation parameter and series coefficients.

@dataclass(frozen=True)
class SphericalParam:
    """Parameter s of a spherical unitary irreducible representation.

    complementary: s real in (0,1); principal: s = iv, v >= 0;
    trivial: s = 1.  Casimir eigenvalue lam = (1 - s^2)/4.
    """

    s: complex
    klass: str

    @classmethod
    def classify(cls, value) -> "SphericalParam":
        if isinstance(value, cls):
            return value
        s = complex(value)
        if abs(s.imag) <= 1e-14:
            x = s.real
            if abs(x - 1.0) <= TRIVIAL_TOL:
                return cls(complex(1.0), "trivial")
            if 0.0 < x < 1.0:
                return cls(complex(x), "complementary")
            raise DomainError(f"inadmissible real spherical parameter s = {x}")
        if abs(s.real) <= 1e-14 and s.imag > 0.0:
            return cls(complex(0.0, s.imag), "principal")
        raise DomainError(f"inadmissible spherical parameter s = {s}")

    @property
    def lam(self) -> float:
        return float(((1.0 - self.s * self.s) / 4.0).real)


def _classify_loose(value) -> SphericalParam:
    # Accepts s = 0 (principal with v = 0) which classify() maps from iv form.
    if isinstance(value, SphericalParam):
        return value
    s = complex(value)
    if s == 0 or (abs(s.real) <= 1e-14 and abs(s.imag) <= S_ZERO_TOL):
        return SphericalParam(complex(0.0, max(s.imag, 0.0)), "principal")
    return SphericalParam.classify(value)


@dataclass(frozen=True)
class GammaSeries:
    """Coefficients G_0..G_N of the asymptotic series at parameter s."""

    s: complex
    coeffs: np.ndarray
    N: int


def gamma_coeffs(s, N: int) -> GammaSeries:
    """Series coefficients from G_0 = 1, G_odd = 0 and, for even n,

        n (n - s) G_n(s) = sum_{0 < k <= n/2} G_{n-2k}(s) (2n - 4k - s + 1).

    Requires Re(s) <= 1 so the left-hand factor never vanishes.
    """
    s = complex(s)
    if s.real > 1.0 + 1e-12:
        raise DomainError(f"gamma_coeffs needs Re(s) <= 1, got {s}")
    if N < 0:
        raise DomainError("N must be >= 0")
    G = np.zeros(N + 1, dtype=complex)
    G[0] = 1.0
    for n in range(2, N + 1, 2):
        acc = 0.0 + 0.0j
        for k in range(1, n // 2 + 1):
            acc += G[n - 2 * k] * (2 * n - 4 * k - s + 1.0)
        G[n] = acc / (n * (n - s))
    return GammaSeries(s=s, coeffs=G, N=N)


# ----------------------------------------------------------------------
# Series evaluation.

def _branch_sums(s: complex, t: np.ndarray, n_terms: int, order: int) -> list[np.ndarray]:
    """Partial sums sum_n G_n(s) (s-1-2n)^j e^{(s-1-2n)t} for j <= order."""
    G = gamma_coeffs(s, n_terms).coeffs
    ns = np.arange(0, n_terms + 1, 2)
    expo = (s - 1.0) - 2.0 * ns                      # (n_even,)
    terms = G[ns, None] * np.exp(np.outer(expo, t))  # (n_even, nt)
    out = [terms.sum(axis=0)]
    for j in range(1, order + 1):
        out.append((expo[:, None] ** j * terms).sum(axis=0))
    return out


def _series_terms_needed(s: complex, t_min: float, tol: float) -> int | None:
    """Smallest even N passing the stop rule at the hardest grid point,
    or None when the cap N_MAX_TERMS is insufficient."""
    cp, cm = c_function(s), c_function(-s)
    n = 32
    while n <= N_MAX_TERMS:
        Gp = gamma_coeffs(s, n).coeffs
        Gm = gamma_coeffs(-s, n).coeffs
        ns = np.arange(0, n + 1, 2)
        tp = np.abs(cp * Gp[ns]) * np.exp((s.real - 1.0 - 2.0 * ns) * t_min)
        tm = np.abs(cm * Gm[ns]) * np.exp((-s.real - 1.0 - 2.0 * ns) * t_min)
        both = tp + tm
        partial = np.cumsum(both)
        ok = (both <= tol * np.maximum(partial, 1e-300)) & (ns >= 10)
        idx = np.nonzero(ok)[0]
        if idx.size:
            return int(ns[idx[0]])
        n *= 2
    return None


def _phi_series(s: complex, t: np.ndarray, tol: float, order: int = 0) -> list[np.ndarray]:
    """phi and its first ``order`` t-derivatives by term-wise differentiation."""
    t = np.asarray(t, dtype=float)
    n_terms = _series_terms_needed(s, float(t.min()), tol)
    capped = n_terms is None
    if capped:
        n_terms = N_MAX_TERMS

    cp, cm = c_function(s), c_function(-s)
    if abs(s.imag) <= 1e-14:
        plus = _branch_sums(s, t, n_terms, order)
        minus = _branch_sums(-s, t, n_terms, order)
        out = [np.real(cp * p + cm * m) for p, m in zip(plus, minus)]
    else:
        # Principal s = iv: the -s branch is the conjugate of the +s branch.
        plus = _branch_sums(s, t, n_terms, order)
        out = [2.0 * np.real(cp * p) for p in plus]
    if capped:
        raise NumericalFailureError(
            f"spherical series did not converge within {N_MAX_TERMS} terms "
            f"(s = {s}, t = {float(t.min())})",
            partial=out[0])
    return out


def phi(s, t: float, tol: float = 1e-12) -> float:
    """Spherical function phi_{xi_s}(g_t), normalised to phi(s, 0) = 1.

    Series-based for t >= 0.05; falls back to the quadrature oracle for
    small t and for the degenerate parameters (s near 1, where the
    representation is trivial, and s near 0, where the two series
    branches collide).  For principal s the value is real; the residual
    imaginary part is checked against ``tol`` and discarded.
    """
    param = _classify_loose(s)
    if t < 0.0:
        raise DomainError(f"phi needs t >= 0, got {t}")
    if param.klass == "trivial":
        return 1.0
    if t < T_MIN_SERIES or abs(param.s) <= S_ZERO_TOL:
        val = phi_oracle(param.s, t)
        if abs(val.imag) > max(tol, 1e-9) * max(1.0, abs(val)):
            raise NumericalFailureError(
                f"oracle fallback returned non-real phi: {val}", partial=val.real)
        return float(val.real)
    (val,) = _phi_series(param.s, np.array([t]), tol)
    return float(val[0])


def phi_defect(s, t) -> np.ndarray | float:
    """phi(s, t) - c(s) e^{(s-1)t}, accurate uniformly in t >= 0.

    Only defined for s real in (0, 1]; this is the integrand of the
    holomorphic part of the extended Laplace transform.  For t >= 1/2
    the tail of the series is summed directly (no cancellation, the
    defect is exponentially small there); below that the defect is O(1)
    and plain subtraction from the quadrature oracle is accurate.
    """
    param = SphericalParam.classify(s)
    if param.klass == "principal":
        raise DomainError("phi_defect is defined for s in (0, 1]")
    scalar = np.isscalar(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    sv = param.s.real
    if param.klass == "trivial":
        out = np.zeros_like(t)
        return float(out[0]) if scalar else out
    cp, cm = c_function(sv).real, c_function(-sv).real
    out = np.empty_like(t)
    small = t < 0.5
    for i in np.nonzero(small)[0]:
        out[i] = phi_oracle(sv, t[i]).real - cp * math.exp((sv - 1.0) * t[i])
    if (~small).any():
        tb = t[~small]
        n_terms = _series_terms_needed(param.s, float(tb.min()), 1e-14)
        if n_terms is None:  # unreachable for t >= 1/2, kept defensive
            raise NumericalFailureError("defect series did not converge")
        Gp = gamma_coeffs(sv, n_terms).coeffs.real
        Gm = gamma_coeffs(-sv, n_terms).coeffs.real
        ns = np.arange(0, n_terms + 1, 2)
        tail = ns[1:]
        plus_tail = (Gp[tail, None] * np.exp(np.outer(sv - 1.0 - 2.0 * tail, tb))).sum(axis=0)
        minus = (Gm[ns, None] * np.exp(np.outer(-sv - 1.0 - 2.0 * ns, tb))).sum(axis=0)
        out[~small] = cp * plus_tail + cm * minus
    return float(out[0]) if scalar else out


# ----------------------------------------------------------------------
# Quadrature oracle.

def phi_oracle(s, t: float, atol: float = 1e-12) -> complex:
    """(1/2pi) int_0^{2pi} (e^{2t} cos^2 th + e^{-2t} sin^2 th)^{(s-1)/2} dth.

    Independent of the series route; adaptive Gauss-Legendre panels with
    an absolute target of 1e-12.  By symmetry the integral is taken over
    [0, pi/2] and rescaled.
    """
    if t < 0.0:
        raise DomainError(f"phi_oracle needs t >= 0, got {t}")
    s = complex(s)
    e2t, em2t = math.exp(2.0 * t), math.exp(-2.0 * t)
    p = (s - 1.0) / 2.0

    def integrand(theta):
        u = e2t * np.cos(theta) ** 2 + em2t * np.sin(theta) ** 2
        return np.exp(p * np.log(u))

    val, _err = adaptive_gl(integrand, 0.0, math.pi / 2.0, atol=atol * math.pi / 2.0)
    return complex(val) * (2.0 / math.pi)


# ----------------------------------------------------------------------
# Decay estimates.

def harish_defect(s: float, t_grid) -> float:
    """max over the grid of e^t |phi(s, t) - c(s) e^{(s-1)t}|, s in (0, 1]."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise DomainError("harish_defect needs a nonempty grid")
    param = SphericalParam.classify(s)
    if param.klass == "principal":
        raise DomainError("harish_defect applies to s in (0, 1]")
    if param.klass == "trivial":
        return 0.0  # phi == 1 == c(1) e^{0 t} exactly
    sv = param.s.real
    cs = c_function(sv).real
    vals = [math.exp(t) * abs(phi(param, t) - cs * math.exp((sv - 1.0) * t))
            for t in t_grid]
    out = max(vals)
    if not math.isfinite(out):
        raise NumericalFailureError("harish defect overflowed", partial=vals)
    return out


def ratner_check(v: float, delta: float, t_grid) -> float:
    """max over the grid of e^{(1-delta)t} |phi_{iv}(g_t)|."""
    if v < 0.0:
        raise DomainError(f"ratner_check needs v >= 0, got {v}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"ratner_check needs delta in (0,1), got {delta}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise DomainError("ratner_check needs a nonempty grid")
    vals = [math.exp((1.0 - delta) * t) * abs(phi(complex(0.0, v), t)) for t in t_grid]
    out = max(vals)
    if not math.isfinite(out):
        raise NumericalFailureError("ratner bound overflowed", partial=vals)
    return out


def casimir_residual(s, t: float, tol: float = 1e-12) -> float:
    """|phi'' + 2 coth(2t) phi' - (s^2 - 1) phi| with term-wise derivatives.

    The radial form is pinned against centred finite differences of the
    oracle in the test suite; t >= 0.25 keeps away from the coth
    singularity.
    """
    if t < 0.25:
        raise DomainError(f"casimir_residual needs t >= 0.25, got {t}")
    param = _classify_loose(s)
    sc = param.s
    if param.klass == "trivial":
        return 0.0
    if abs(sc) <= S_ZERO_TOL:
        raise DomainError("casimir_residual: series degenerates at s = 0")
    val, d1, d2 = _phi_series(sc, np.array([t]), tol, order=2)
    lam_factor = (sc * sc - 1.0).real
    res = d2[0] + 2.0 / math.tanh(2.0 * t) * d1[0] - lam_factor * val[0]
    return abs(float(res))
