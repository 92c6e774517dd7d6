"""Map Laplacian eigenvalues to correlation decay rates and fit
exponential sums to correlation data.

Eigenvalues lambda in [0, 1/4] correspond to decay rates
a = 1 - sqrt(1 - 4 lambda); correlations of well-behaved observables
expand as sum_i c_i e^{-a_i t} up to a fast remainder, so the rates are
recovered from uniformly sampled data by Prony's method (linear
prediction + companion-matrix rooting) and polished by
variable-projection least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError, InvalidInputError, NumericalFailureError

__all__ = [
    "RateTable",
    "eigenvalue_to_rate",
    "rate_to_eigenvalue",
    "fit_exponential_sum",
]

MAX_MODEL_ORDER = 4
IMAG_RATE_TOL = 1e-7


@dataclass(frozen=True)
class RateTable:
    """Fitted decay rates and coefficients, rates strictly increasing."""

    rates: tuple[float, ...]
    coefficients: tuple[float, ...]
    residual: float

    def __post_init__(self):
        if any(b - a <= 0.0 for a, b in zip(self.rates, self.rates[1:])):
            raise InvalidInputError("rates must be strictly increasing")
        if self.rates and self.rates[0] < 0.0:
            raise InvalidInputError("rates must be nonnegative")

    def model(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return sum(c * np.exp(-a * t) for a, c in zip(self.rates, self.coefficients))


def eigenvalue_to_rate(lam: float) -> float:
    """a = 1 - sqrt(1 - 4 lambda) for lambda in [0, 1/4]."""
    if not 0.0 <= lam <= 0.25:
        raise DomainError(f"eigenvalue {lam} outside [0, 1/4]")
    return 1.0 - math.sqrt(1.0 - 4.0 * lam)


def rate_to_eigenvalue(a: float) -> float:
    """Inverse map lambda = (2a - a^2)/4 for a in [0, 1]."""
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"rate {a} outside [0, 1]")
    return (2.0 * a - a * a) / 4.0


def _design(rates: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.exp(-np.outer(t, rates))


def fit_exponential_sum(t_grid, values, k: int) -> RateTable:
    """Fit sum_{i<k} c_i e^{-a_i t} to uniformly sampled values.

    Prony linear prediction provides starting rates (companion-matrix
    roots rho_i give a_i = -log rho_i / dt); variable-projection least
    squares then refines the rates with the coefficients solved linearly
    at each step.

    Parameters
    ----------
    t_grid : 1-d array
        Uniformly spaced sample times, at least 4k of them.
    values : 1-d array
        Sampled correlation values, same shape as t_grid.
    k : int
        Model order, 1..4.  Deliberately user-specified: the number of
        spectral atoms is the unknown being probed, and automatic order
        selection would hide conditioning failures.

    Returns
    -------
    RateTable
        Strictly increasing nonnegative rates, coefficients, and the
        l2 residual of the final linear solve.

    Raises
    ------
    NumericalFailureError
        Rank-deficient prediction system, complex decay rates (model
        order does not match the data), or degenerate refined rates.
    """
    t = np.asarray(t_grid, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != y.shape:
        raise InvalidInputError("t_grid and values must be matching 1-d arrays")
    if not 1 <= k <= MAX_MODEL_ORDER:
        raise InvalidInputError(f"model order k must be in 1..{MAX_MODEL_ORDER}")
    if t.size < 4 * k:
        raise InvalidInputError(f"need at least {4 * k} samples for k = {k}")
    dt = np.diff(t)
    if np.abs(dt - dt[0]).max() > 1e-9 * abs(dt[0]):
        raise InvalidInputError("fit_exponential_sum needs a uniform grid")
    step = float(dt[0])

    # Linear prediction y[j+k] = sum_i alpha_i y[j+i].
    m = t.size - k
    A = np.column_stack([y[i:i + m] for i in range(k)])
    rhs = y[k:]
    alpha, _res, rank, sv = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < k or (sv[0] > 0 and sv[-1] / sv[0] < 1e-14):
        raise NumericalFailureError(
            f"Prony prediction system is rank-deficient; try a smaller k than {k}")

    poly = np.concatenate([[1.0], -alpha[::-1]])  # z^k - sum alpha_i z^i
    roots = np.roots(poly)
    log_roots = np.log(roots.astype(complex))
    rates = -log_roots / step
    if np.abs(rates.imag).max() > IMAG_RATE_TOL:
        raise NumericalFailureError(
            f"complex decay rates {rates}; the model order {k} does not match "
            "the data (try a smaller k)")
    rates = np.sort(rates.real)

    # Variable projection: optimise rates, coefficients solved linearly.
    def coeffs_for(r):
        V = _design(r, t)
        c, *_ = np.linalg.lstsq(V, y, rcond=None)
        return c, V

    def resid(r):
        c, V = coeffs_for(r)
        return V @ c - y

    try:
        sol = least_squares(resid, rates, method="lm", xtol=1e-15, ftol=1e-15)
        rates = np.sort(sol.x)
    except Exception:
        pass  # keep the Prony estimate when refinement fails
    if rates[0] < -1e-8:
        raise NumericalFailureError(f"negative decay rate {rates[0]} fitted")
    rates = np.maximum(rates, 0.0)
    if np.any(np.diff(rates) <= 0.0):
        raise NumericalFailureError(
            f"degenerate rates {rates}; the model order {k} is too large")
    coeffs, V = coeffs_for(rates)
    residual = float(np.linalg.norm(V @ coeffs - y))
    return RateTable(rates=tuple(float(r) for r in rates),
                     coefficients=tuple(float(c) for c in coeffs),
                     residual=residual)
