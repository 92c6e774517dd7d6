"""Recurrence experiments for the diagonal flow and Monte Carlo
correlation estimation on the space of unimodular lattices.

The recurrence side averages the height function V_delta over the
horocycle segment {g_t h_r x : r in [0, 1]} and fits the smallest C with

    avg(t) <= C (e^{-(1-2 delta) t} V_delta(x) + 1)

on a time grid (the statement being probed is an inequality, so the
max-ratio estimator is used instead of least squares).

The Monte Carlo side samples Haar-distributed unimodular lattices by
rejection from the hyperbolic density dx dy / y^2 on the standard
fundamental domain, evaluates a smooth bump of the systole, and reports
autocorrelation estimates under g_t with delete-one jackknife errors.
All randomness flows through a counter-based Philox generator keyed by
the seed, drawn in a fixed vectorised order, so outputs are
bit-deterministic given (N, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import simpson_doubling
from .errors import DomainError, InvalidInputError, TeichLabError
from .lattice import shortest_vector_batch
from .origami import Origami, apply_element, v_delta

__all__ = [
    "RecurrenceProfile",
    "CorrelationSeries",
    "SystoleBump",
    "horocycle_vdelta_average",
    "recurrence_profile",
    "sample_fundamental_domain",
    "sample_modular_surface",
    "correlation_mc",
    "log_slope",
]

Y_FLOOR = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class RecurrenceProfile:
    """Horocycle-averaged V_delta along a time grid with the fitted
    envelope constant (c1 = c2 = max-ratio estimator)."""

    delta: float
    t: tuple[float, ...]
    avg: tuple[float, ...]
    quad_err: tuple[float, ...]
    failed: tuple[bool, ...]
    v_delta_start: float
    c1: float
    c2: float

    def envelope(self, t: float) -> float:
        return self.c1 * (math.exp(-(1.0 - 2.0 * self.delta) * t) * self.v_delta_start
                          + 1.0)


@dataclass(frozen=True)
class CorrelationSeries:
    """Monte Carlo correlation estimates with jackknife standard errors."""

    t: tuple[float, ...]
    estimate: tuple[float, ...]
    stderr: tuple[float, ...]
    n_samples: int
    seed: int


def _vdelta_on_nodes(x: Origami, t: float, delta: float, rs: np.ndarray) -> np.ndarray:
    """V_delta(g_t h_r x) on an array of horocycle parameters."""
    B = x.deformation
    gt = np.diag([math.exp(t), math.exp(-t)])
    if x.all_marked:
        # Every primitive period is realised, so the systole equals the
        # lattice minimum; reduce all node lattices in one batch.
        mats = np.empty((rs.size, 2, 2))
        mats[:, 0, 0] = B[0, 0] + rs * B[1, 0]
        mats[:, 0, 1] = B[0, 1] + rs * B[1, 1]
        mats[:, 1, 0] = B[1, 0]
        mats[:, 1, 1] = B[1, 1]
        mats = np.einsum("ij,njk->nik", gt, mats)
        sys_vals = shortest_vector_batch(mats)
        return np.maximum(sys_vals ** (-(1.0 + delta)), 1.0)
    out = np.empty(rs.size)
    for i, r in enumerate(rs):
        hr = np.array([[1.0, r], [0.0, 1.0]])
        out[i] = v_delta(apply_element(x, gt @ hr), delta)
    return out


def horocycle_vdelta_average(x: Origami, t: float, delta: float,
                             n_nodes: int = 64) -> float:
    """Composite-Simpson average of V_delta(g_t h_r x) over r in [0, 1],
    with node doubling; see ``recurrence_profile`` for the error track."""
    val, _ = _horocycle_average(x, t, delta, n_nodes)
    return val


def _horocycle_average(x: Origami, t: float, delta: float, n_nodes: int):
    if t < 0.0:
        raise DomainError(f"need t >= 0, got {t}")
    if n_nodes < 16:
        raise InvalidInputError("n_nodes must be at least 16")
    if not 0.0 < delta < 0.25:
        raise DomainError(f"delta must lie in (0, 1/4), got {delta}")

    def f(rs):
        return _vdelta_on_nodes(x, t, delta, np.asarray(rs, dtype=float))

    max_nodes = 4097 if x.all_marked else 1025
    return simpson_doubling(f, 0.0, 1.0, n0=n_nodes, rtol=1e-5, atol=1e-8,
                            max_nodes=max_nodes)


def recurrence_profile(x: Origami, delta: float, t_grid,
                       n_nodes: int = 64) -> RecurrenceProfile:
    """Averages over the time grid plus the minimal envelope constant
    C = max_t avg(t) / (e^{-(1-2 delta) t} V_delta(x) + 1).

    A failing average is flagged and skipped by the fit rather than
    aborting the profile.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or np.any(np.diff(t_grid) <= 0.0):
        raise InvalidInputError("t_grid must be nonempty and increasing")
    v0 = v_delta(x, delta)
    avgs, errs, failed = [], [], []
    for t in t_grid:
        try:
            val, err = _horocycle_average(x, float(t), delta, n_nodes)
            avgs.append(val)
            errs.append(err)
            failed.append(False)
        except TeichLabError:
            avgs.append(math.nan)
            errs.append(math.nan)
            failed.append(True)
    rate = 1.0 - 2.0 * delta
    ratios = [a / (math.exp(-rate * t) * v0 + 1.0)
              for a, t, bad in zip(avgs, t_grid, failed) if not bad]
    if not ratios:
        raise TeichLabError("every average in the profile failed")
    c = max(ratios)
    return RecurrenceProfile(delta=delta, t=tuple(map(float, t_grid)),
                             avg=tuple(avgs), quad_err=tuple(errs),
                             failed=tuple(failed), v_delta_start=v0,
                             c1=c, c2=c)


# ----------------------------------------------------------------------
# Haar sampling on SL(2,R)/SL(2,Z).

def _rng(seed: int) -> np.random.Generator:
    if not 0 <= seed < 2 ** 64:
        raise InvalidInputError(f"seed must be a u64, got {seed}")
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def sample_fundamental_domain(N: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """(x, y) with density dx dy / y^2 on {|x| <= 1/2, x^2 + y^2 >= 1}.

    Rejection from the product of U(-1/2, 1/2) and the normalised 1/y^2
    tail on [sqrt(3)/2, inf); acceptance probability is
    (pi/3) / (2/sqrt(3)) ~ 0.9069.
    """
    if N < 1:
        raise InvalidInputError("need N >= 1")
    rng = _rng(seed)
    xs, ys = [], []
    got = 0
    while got < N:
        m = max(1024, int(1.2 * (N - got)))
        x = rng.uniform(-0.5, 0.5, m)
        y = Y_FLOOR / rng.random(m)
        keep = x * x + y * y >= 1.0
        xs.append(x[keep])
        ys.append(y[keep])
        got += int(keep.sum())
    return np.concatenate(xs)[:N], np.concatenate(ys)[:N]


def sample_modular_surface(N: int, seed: int) -> np.ndarray:
    """N Haar-distributed unimodular lattices as a (N, 2, 2) stack.

    The point x + iy of the fundamental domain lifts to the
    upper-triangular frame [[1/sqrt(y), x/sqrt(y)], [0, sqrt(y)]]; an
    independent uniform angle rotates the frame.  Deterministic given
    the seed.
    """
    x, y = sample_fundamental_domain(N, seed)
    if not 0 <= seed < 2 ** 64:
        raise InvalidInputError(f"seed must be a u64, got {seed}")
    fiber = np.random.Generator(np.random.Philox(key=np.uint64(seed)).jumped(1))
    theta = fiber.uniform(0.0, 2.0 * math.pi, N)
    sq = np.sqrt(y)
    mats = np.empty((N, 2, 2))
    mats[:, 0, 0] = 1.0 / sq
    mats[:, 0, 1] = x / sq
    mats[:, 1, 0] = 0.0
    mats[:, 1, 1] = sq
    ct, st = np.cos(theta), np.sin(theta)
    rot = np.empty((N, 2, 2))
    rot[:, 0, 0] = ct
    rot[:, 0, 1] = st
    rot[:, 1, 0] = -st
    rot[:, 1, 1] = ct
    return np.einsum("nij,njk->nik", rot, mats)


# ----------------------------------------------------------------------
# Correlation Monte Carlo.

@dataclass(frozen=True)
class SystoleBump:
    """Smooth bump of the systole supported on [lo, hi], peak value 1.

    Rotation-invariance is automatic: the systole only sees the lattice.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 < self.lo < self.hi:
            raise InvalidInputError(f"need 0 < lo < hi, got [{self.lo}, {self.hi}]")

    def __call__(self, sys_vals: np.ndarray) -> np.ndarray:
        xi = (2.0 * np.asarray(sys_vals) - (self.lo + self.hi)) / (self.hi - self.lo)
        out = np.zeros_like(xi)
        inside = np.abs(xi) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi[inside] ** 2))
        return out


def _as_observable(observable):
    if isinstance(observable, tuple) and len(observable) == 2:
        return SystoleBump(*observable)
    if callable(observable):
        return observable
    raise InvalidInputError("observable must be (lo, hi) or a callable on systoles")


def correlation_mc(observable, t_grid, N: int, seed: int) -> CorrelationSeries:
    """Estimates (1/N) sum f(L_i) f(g_t L_i) - ((1/N) sum f(L_i))^2 over
    Haar samples L_i, with delete-one jackknife standard errors."""
    f = _as_observable(observable)
    t_grid = np.asarray(t_grid, dtype=float)
    if N < 2:
        raise InvalidInputError("need N >= 2 for jackknife errors")
    lat = sample_modular_surface(N, seed)
    a = np.asarray(f(shortest_vector_batch(lat)), dtype=float)
    sum_a = a.sum()
    estimates, stderrs = [], []
    for t in t_grid:
        gt = np.diag([math.exp(t), math.exp(-t)])
        b = np.asarray(f(shortest_vector_batch(np.einsum("ij,njk->nik", gt, lat))),
                       dtype=float)
        ab = a * b
        sum_ab = ab.sum()
        est = sum_ab / N - (sum_a / N) ** 2
        # Delete-one jackknife in closed form.
        mean_ab_i = (sum_ab - ab) / (N - 1)
        mean_a_i = (sum_a - a) / (N - 1)
        theta_i = mean_ab_i - mean_a_i ** 2
        se = math.sqrt((N - 1) / N * np.sum((theta_i - theta_i.mean()) ** 2))
        estimates.append(float(est))
        stderrs.append(se)
    return CorrelationSeries(t=tuple(map(float, t_grid)),
                             estimate=tuple(estimates), stderr=tuple(stderrs),
                             n_samples=N, seed=seed)


def log_slope(series: CorrelationSeries, t_min: float, t_max: float) -> float:
    """Least-squares slope of log |estimate| on grid points inside
    [t_min, t_max]; NaN when an estimate in the window is <= 0."""
    ts, logs = [], []
    for t, est in zip(series.t, series.estimate):
        if t_min - 1e-12 <= t <= t_max + 1e-12:
            if est <= 0.0:
                return math.nan
            ts.append(t)
            logs.append(math.log(est))
    if len(ts) < 2:
        raise InvalidInputError("log_slope needs at least two grid points in window")
    return float(np.polyfit(ts, logs, 1)[0])
