"""Shared quadrature kernels: adaptive Gauss-Legendre panels, trapezoid
contours and Simpson averaging, each with a computable error estimate.

Integrands are called on node *arrays* so that series-based callers can
vectorise over quadrature nodes.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalFailureError

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def gl_panel(f, a: float, b: float, n: int) -> complex:
    x, w = gl_nodes(n)
    half = 0.5 * (b - a)
    vals = f(a + half * (x + 1.0))
    return half * complex(np.sum(np.asarray(vals) * w))


def adaptive_gl(f, a: float, b: float, atol: float = 1e-12,
                n: int = 20, max_depth: int = 60, max_panels: int = 4000):
    """Adaptive bisection with a GL(n) vs GL(2n) error estimate per panel.

    Returns (value, error_estimate).  Raises NumericalFailureError when
    the panel budget or recursion depth is exhausted before reaching the
    absolute target.
    """
    stack = [(float(a), float(b), 0)]
    total = 0.0 + 0.0j
    err_total = 0.0
    panels = 0
    while stack:
        lo, hi, depth = stack.pop()
        coarse = gl_panel(f, lo, hi, n)
        fine = gl_panel(f, lo, hi, 2 * n)
        err = abs(fine - coarse)
        # Per-panel tolerance proportional to its share of the interval.
        share = atol * max((hi - lo) / (b - a), 1e-3)
        if err <= share or depth >= max_depth:
            if depth >= max_depth and err > share:
                raise NumericalFailureError(
                    f"adaptive quadrature: max depth at [{lo}, {hi}], err={err:g}",
                    partial=total)
            total += fine
            err_total += err
            panels += 1
            if panels > max_panels:
                raise NumericalFailureError(
                    "adaptive quadrature: panel budget exhausted", partial=total)
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    return total, err_total


def trapezoid_circle(f, center: complex, radius: float, n_nodes: int = 32,
                     agree: float = 1e-10, max_nodes: int = 1 << 15):
    """(1/2 pi i) times the contour integral of f over a circle.

    Periodic trapezoid rule with node doubling until two consecutive
    estimates agree to ``agree`` (absolute, with a relative fallback at
    large magnitudes).  Returns (value, error_estimate).
    """
    def estimate(n):
        theta = np.arange(n) * (2.0 * np.pi / n)
        z = center + radius * np.exp(1j * theta)
        vals = np.asarray(f(z), dtype=complex)
        # (1/2pi i) * sum f(z_k) * i * radius * e^{i theta_k} * (2pi/n)
        return radius * np.mean(vals * np.exp(1j * theta))

    n = max(8, int(n_nodes))
    prev = estimate(n)
    while n <= max_nodes:
        n *= 2
        cur = estimate(n)
        err = abs(cur - prev)
        if err <= max(agree, agree * abs(cur)):
            return cur, err
        prev = cur
    raise NumericalFailureError(
        f"contour quadrature did not stabilise below {agree:g}", partial=prev)


def simpson_doubling(f, a: float, b: float, n0: int = 16,
                     rtol: float = 1e-6, atol: float = 1e-9,
                     max_nodes: int = 4097):
    """Composite Simpson with interval doubling; f maps node arrays to
    value arrays.  Returns (value, error_estimate) from the last doubling."""
    def simpson(n):
        x = np.linspace(a, b, n + 1)
        y = np.asarray(f(x), dtype=float)
        h = (b - a) / n
        return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())

    n = max(4, int(n0))
    if n % 2:
        n += 1
    prev = simpson(n)
    err = np.inf
    while 2 * n + 1 <= max_nodes:
        n *= 2
        cur = simpson(n)
        err = abs(cur - prev)
        prev = cur
        if err <= max(atol, rtol * abs(cur)):
            break
    return prev, err
