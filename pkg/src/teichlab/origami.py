"""Square-tiled translation surfaces.

An origami is encoded by two permutations of its unit squares
(sigma_h = square to the right, sigma_v = square above) and a GL+(2,R)
deformation applied to the periods.  Vertices correspond to cycles of
the corner permutation c = sigma_h sigma_v sigma_h^-1 sigma_v^-1 (the
cycle through square i is the vertex at the bottom-left corner of i);
the cycle length kappa is the cone angle divided by 2 pi.  Classes with
kappa >= 2 are singular and belong to the marked set; on genus-one
surfaces every class is a marked point.

Saddle connections are enumerated by rasterised separatrix tracing.
All vertices sit on the integer grid, so base holonomies are integer
vectors and tracing is exact integer combinatorics; the deformation
enters only through the metric.  Each traced connection records the
signed multiplicities of the (bottom_i, left_i) edges along a staircase
path snapped to the traversed squares, so closed cochains can be paired
with it exactly.

The saddle-connection norm is

    ||v||_x = sup_gamma |v(gamma) / Phi(x)(gamma)|,

approximated over all connections of deformed length <= L, with a
stabilisation flag obtained by doubling L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm, null_space

from .errors import BudgetError, DomainError, InvalidInputError
from .lattice import short_primitive_vectors, shortest_vector
from .sl2kernel import GroupElement

__all__ = [
    "Origami",
    "SaddleConnection",
    "Cocycle",
    "ConnectionSet",
    "NormResult",
    "PathNormReport",
    "build_origami",
    "parse_origami_record",
    "format_origami_record",
    "saddle_connections",
    "systole",
    "v_delta",
    "evaluate_cocycle",
    "saddle_connection_norm",
    "apply_element",
    "pushforward_cocycle",
    "path_norm_bounds",
    "straight_path_length",
    "jacobian_unstable",
    "tautological_cocycle",
    "flow_tangent_cocycle",
    "cocycle_basis",
    "random_cocycle",
    "default_norm_radius",
]

DEFAULT_EVENT_BUDGET = 20_000_000
STABILIZE_TOL = 1e-9


# ----------------------------------------------------------------------
# Construction.

@dataclass(frozen=True, eq=False)
class Origami:
    n: int
    sigma_h: tuple[int, ...]
    sigma_v: tuple[int, ...]
    deformation: np.ndarray
    vertex_class: tuple[int, ...]   # class id of the bottom-left corner of square i
    kappa: tuple[int, ...]          # cone order per class id
    marked: tuple[bool, ...]        # class belongs to the marked set Sigma
    genus: int

    @property
    def surface_key(self) -> tuple:
        return (self.n, self.sigma_h, self.sigma_v)

    @property
    def all_marked(self) -> bool:
        return all(self.marked)

    @property
    def n_marked(self) -> int:
        return sum(self.marked)

    @property
    def period_dimension(self) -> int:
        """dim H^1(M, Sigma; R) = 2 genus + |Sigma| - 1."""
        return 2 * self.genus + self.n_marked - 1

    def stratum(self) -> tuple[int, ...]:
        """Cone orders (kappa - 1) of the marked singular classes."""
        return tuple(sorted((k - 1 for k in self.kappa if k >= 2), reverse=True))


def _check_permutation(perm, n, name):
    perm = tuple(int(p) for p in perm)
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise InvalidInputError(f"{name} is not a permutation of 0..{n - 1}: {perm}")
    return perm


def _invert(perm):
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def build_origami(sigma_h, sigma_v, deformation=None) -> Origami:
    """Assemble an origami and its singularity data.

    ``sigma_h``/``sigma_v`` are 0-based permutation sequences (image of
    square i is the square to its right / above).  The pair must act
    transitively; the deformation needs det > 0.
    """
    n = len(sigma_h)
    if n < 1:
        raise InvalidInputError("need at least one square")
    sh = _check_permutation(sigma_h, n, "sigma_h")
    sv = _check_permutation(sigma_v, n, "sigma_v")

    # Connectivity under <sigma_h, sigma_v>.
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in (sh[i], sv[i]):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    if len(seen) != n:
        missing = sorted(set(range(n)) - seen)
        raise InvalidInputError(
            f"permutations do not act transitively; unreachable squares {missing}")

    if deformation is None:
        deformation = np.eye(2)
    if isinstance(deformation, GroupElement):
        deformation = deformation.mat
    B = np.array(deformation, dtype=float)
    if B.shape != (2, 2) or not np.all(np.isfinite(B)):
        raise InvalidInputError("deformation must be a finite 2x2 matrix")
    if np.linalg.det(B) <= 0.0:
        raise InvalidInputError(f"deformation must have det > 0, got {np.linalg.det(B)}")
    B.setflags(write=False)

    sh_inv, sv_inv = _invert(sh), _invert(sv)
    corner = tuple(sh[sv[sh_inv[sv_inv[i]]]] for i in range(n))

    cls = [-1] * n
    kappa = []
    for i in range(n):
        if cls[i] >= 0:
            continue
        cid = len(kappa)
        j, size = i, 0
        while cls[j] < 0:
            cls[j] = cid
            j = corner[j]
            size += 1
        kappa.append(size)

    V = len(kappa)
    if (n - V) % 2 != 0:
        raise InvalidInputError("inconsistent singularity data (odd Euler count)")
    genus = (n - V) // 2 + 1
    assert sum(k - 1 for k in kappa) == 2 * genus - 2

    marked = tuple(k >= 2 or genus == 1 for k in kappa)
    return Origami(n=n, sigma_h=sh, sigma_v=sv, deformation=B,
                   vertex_class=tuple(cls), kappa=tuple(kappa),
                   marked=marked, genus=genus)


def apply_element(x: Origami, m) -> Origami:
    """Postcompose the translation charts: deformation becomes m . B."""
    if isinstance(m, GroupElement):
        m = m.mat
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2) or np.linalg.det(m) <= 0.0:
        raise InvalidInputError("apply_element needs a 2x2 matrix with det > 0")
    return Origami(n=x.n, sigma_h=x.sigma_h, sigma_v=x.sigma_v,
                   deformation=(m @ x.deformation),
                   vertex_class=x.vertex_class, kappa=x.kappa,
                   marked=x.marked, genus=x.genus)


# ----------------------------------------------------------------------
# Text record format: "n; sigma_h cycles; sigma_v cycles; a b c d".

def _parse_cycles(text: str, n: int) -> tuple[int, ...]:
    text = text.strip()
    perm = list(range(n))
    if text in ("id", "()", ""):
        return tuple(perm)
    depth = 0
    cycles, cur = [], []
    for tok in text.replace("(", " ( ").replace(")", " ) ").replace(",", " ").split():
        if tok == "(":
            depth += 1
            cur = []
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise InvalidInputError(f"unbalanced parentheses in {text!r}")
            cycles.append(cur)
        else:
            cur.append(int(tok))
    if depth != 0:
        raise InvalidInputError(f"unbalanced parentheses in {text!r}")
    for cyc in cycles:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            if not (1 <= a <= n and 1 <= b <= n):
                raise InvalidInputError(f"cycle entry out of range 1..{n} in {text!r}")
            perm[a - 1] = b - 1
    return tuple(perm)


def parse_origami_record(text: str) -> Origami:
    parts = [p.strip() for p in text.strip().split(";")]
    if len(parts) not in (3, 4):
        raise InvalidInputError(
            "origami record must be 'n; sigma_h; sigma_v[; a b c d]'")
    n = int(parts[0])
    sh = _parse_cycles(parts[1], n)
    sv = _parse_cycles(parts[2], n)
    if len(parts) == 4 and parts[3]:
        vals = [float(v) for v in parts[3].split()]
        if len(vals) != 4:
            raise InvalidInputError("deformation needs four entries 'a b c d'")
        B = np.array(vals).reshape(2, 2)
    else:
        B = np.eye(2)
    return build_origami(sh, sv, B)


def _format_cycles(perm) -> str:
    n = len(perm)
    seen = [False] * n
    out = []
    for i in range(n):
        if seen[i]:
            continue
        cyc = []
        j = i
        while not seen[j]:
            seen[j] = True
            cyc.append(j + 1)
            j = perm[j]
        if len(cyc) > 1:
            out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) if out else "id"


def format_origami_record(x: Origami) -> str:
    a, b, c, d = (repr(float(v)) for v in x.deformation.ravel())
    return (f"{x.n}; {_format_cycles(x.sigma_h)}; {_format_cycles(x.sigma_v)}; "
            f"{a} {b} {c} {d}")


# ----------------------------------------------------------------------
# Separatrix tracing.

@dataclass(frozen=True)
class SaddleConnection:
    """Straight segment between marked vertices with integer base holonomy.

    ``edge_coeffs`` holds the signed multiplicities of the edges
    (bottom_0..bottom_{n-1}, left_0..left_{n-1}) along a staircase path
    homologous to the segment; ``steps`` counts primitive lattice steps
    (regular-vertex pass-throughs make it larger than 1).
    """

    surface_key: tuple
    start_class: int
    end_class: int
    p: int
    q: int
    steps: int
    start_square: int
    edge_coeffs: tuple[int, ...]

    def holonomy(self, deformation) -> complex:
        vec = np.asarray(deformation, dtype=float) @ np.array([self.p, self.q], float)
        return complex(vec[0], vec[1])


class _Tracer:
    """One separatrix in a fixed primitive direction; exact integer events."""

    def __init__(self, x: Origami, sh_inv: tuple[int, ...],
                 start_square: int, dp: int, dq: int):
        self.x = x
        self.sh_inv = sh_inv
        self.dp, self.dq = dp, dq
        self.cur = start_square
        self.coeffs = np.zeros(2 * x.n, dtype=np.int64)
        self.events = 0

    def step(self) -> int:
        """Trace one primitive lattice step; returns the landing class id."""
        x, dp, dq = self.x, self.dp, self.dq
        sh, sv, sh_inv = x.sigma_h, x.sigma_v, self.sh_inv
        n = x.n
        cur = self.cur
        co = self.coeffs
        self.events += abs(dp) + dq
        if dq == 0:                      # east
            co[cur] += 1
            nxt = sh[cur]
            self.cur = nxt
            return x.vertex_class[nxt]
        if dp == 0:                      # north
            co[n + cur] += 1
            nxt = sv[cur]
            self.cur = nxt
            return x.vertex_class[nxt]
        if dp > 0:                       # open first quadrant
            co[cur] += 1
            i = j = 1
            while i < dp or j < dq:
                if i < dp and (j >= dq or i * dq < j * dp):
                    cur = sh[cur]
                    co[cur] += 1
                    i += 1
                else:
                    assert not (i < dp and i * dq == j * dp), "simultaneous crossing"
                    co[n + sh[cur]] += 1
                    cur = sv[cur]
                    j += 1
            co[n + sh[cur]] += 1
            nxt = sv[sh[cur]]
            self.cur = nxt
            return x.vertex_class[nxt]
        # open second quadrant: dp < 0, dq > 0
        P = -dp
        co[cur] -= 1
        i = j = 1
        while i < P or j < dq:
            if i < P and (j >= dq or i * dq < j * P):
                cur = sh_inv[cur]
                co[cur] -= 1
                i += 1
            else:
                assert not (i < P and i * dq == j * P), "simultaneous crossing"
                co[n + cur] += 1
                cur = sv[cur]
                j += 1
        co[n + cur] += 1
        top = sv[cur]
        self.cur = sh_inv[top]
        return x.vertex_class[top]


def _start_squares(x: Origami, dp: int) -> list[int]:
    if dp >= 0:
        return [b for b in range(x.n) if x.marked[x.vertex_class[b]]]
    return [b for b in range(x.n) if x.marked[x.vertex_class[x.sigma_h[b]]]]


def _start_class(x: Origami, square: int, dp: int) -> int:
    if dp >= 0:
        return x.vertex_class[square]
    return x.vertex_class[x.sigma_h[square]]


def saddle_connections(x: Origami, L: float,
                       budget: int | None = None) -> list[SaddleConnection]:
    """All saddle connections with deformed length <= L, one per
    unoriented connection (directions range over the upper half-plane).

    Sorted by deformed length, then base holonomy, then start square.
    Exceeding the tracing budget raises BudgetError carrying the partial
    (flagged) list.
    """
    if L <= 0.0:
        raise InvalidInputError("saddle_connections needs L > 0")
    if budget is None:
        budget = DEFAULT_EVENT_BUDGET
    sh_inv = _invert(x.sigma_h)
    B = x.deformation
    out = []
    spent = 0
    for (dp, dq), blen in short_primitive_vectors(B, L):
        m_max = int(L / blen + 1e-9)
        if m_max < 1:
            continue
        for s0 in _start_squares(x, dp):
            tracer = _Tracer(x, sh_inv, s0, dp, dq)
            start_cls = _start_class(x, s0, dp)
            for m in range(1, m_max + 1):
                cls = tracer.step()
                if spent + tracer.events > budget:
                    raise BudgetError(
                        f"saddle-connection tracing budget {budget} exhausted",
                        partial=out)
                if x.marked[cls]:
                    out.append(SaddleConnection(
                        surface_key=x.surface_key,
                        start_class=start_cls, end_class=cls,
                        p=m * dp, q=m * dq, steps=m, start_square=s0,
                        edge_coeffs=tuple(int(v) for v in tracer.coeffs)))
                    break
            spent += tracer.events
    out.sort(key=lambda c: (abs(c.holonomy(B)), c.p, c.q, c.start_square))
    return out


_CONN_CACHE: dict[tuple, list[SaddleConnection]] = {}


def _cached_connections(x: Origami, L: float,
                        budget: int | None) -> list[SaddleConnection]:
    """Memoised enumeration; origamis are immutable so the key is safe."""
    key = (x.surface_key, x.deformation.tobytes(), round(L, 12), budget)
    if key not in _CONN_CACHE:
        if len(_CONN_CACHE) > 16:
            _CONN_CACHE.clear()
        _CONN_CACHE[key] = saddle_connections(x, L, budget)
    return _CONN_CACHE[key]


def _truncation_pair(x: Origami, L: float, budget: int | None):
    """Connection sets at radius L and 2L from a single tracing pass."""
    wide = _cached_connections(x, 2.0 * L, budget)
    B = x.deformation
    narrow = [c for c in wide if abs(c.holonomy(B)) <= L * (1.0 + 1e-12)]
    if not narrow:
        raise InvalidInputError(f"no saddle connection within radius {L}")
    return ConnectionSet(x, narrow), ConnectionSet(x, wide)


# ----------------------------------------------------------------------
# Systole and the height function V_delta.

def systole(x: Origami, method: str = "auto") -> float:
    """Length of the shortest saddle connection.

    The search radius starts at the Lagrange-Gauss shortest vector of
    the deformed period lattice and doubles until a connection is
    realised.  When every vertex class is marked, each primitive lattice
    vector is realised from every corner, so the lattice minimum *is*
    the systole and tracing is skipped (method="trace" forces it).
    """
    lam1, _ = shortest_vector(x.deformation)
    if method == "auto" and x.all_marked:
        return lam1
    if method not in ("auto", "trace"):
        raise InvalidInputError(f"unknown systole method {method!r}")
    L = lam1 * (1.0 + 1e-12)
    for _ in range(64):
        conns = saddle_connections(x, L)
        if conns:
            return min(abs(c.holonomy(x.deformation)) for c in conns)
        L *= 2.0
    raise BudgetError("systole search radius expansion failed")


def v_delta(x: Origami, delta: float) -> float:
    """Systole height function max(sys^{-(1+delta)}, 1)."""
    if not 0.0 < delta < 0.25:
        raise DomainError(f"v_delta needs delta in (0, 1/4), got {delta}")
    return max(systole(x) ** (-(1.0 + delta)), 1.0)


def jacobian_unstable(x: Origami, t: float) -> float:
    """det of g_t on real period coordinates: e^{d t}, d = 2g + |Sigma| - 1."""
    return math.exp(x.period_dimension * t)


# ----------------------------------------------------------------------
# Cocycles.

@dataclass(frozen=True)
class Cocycle:
    """Closed complex cochain on the square edges.

    bottom_i / left_i are the pairings with the bottom and left edge of
    square i; closedness means
    bottom_i + left_{sh(i)} - bottom_{sv(i)} - left_i = 0 per square.
    """

    surface_key: tuple
    bottom: tuple[complex, ...]
    left: tuple[complex, ...]

    def __post_init__(self):
        n, sh, sv = self.surface_key
        b, l = self.bottom, self.left
        scale = max(1.0, max(abs(v) for v in b + l))
        for i in range(n):
            res = b[i] + l[sh[i]] - b[sv[i]] - l[i]
            if abs(res) > 1e-12 * scale:
                raise InvalidInputError(
                    f"cochain is not closed around square {i}: residual {res}")

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.bottom + self.left, dtype=complex)

    def is_real(self, tol=0.0) -> bool:
        return all(abs(v.imag) <= tol for v in self.bottom + self.left)


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, GroupElement):
        return m.mat
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise InvalidInputError("expected a 2x2 matrix")
    return m


def _map_value(m: np.ndarray, z: complex) -> complex:
    return complex(m[0, 0] * z.real + m[0, 1] * z.imag,
                   m[1, 0] * z.real + m[1, 1] * z.imag)


def tautological_cocycle(x: Origami) -> Cocycle:
    """Phi(x): bottom -> B.(1,0), left -> B.(0,1) as complex periods."""
    B = x.deformation
    b = complex(B[0, 0], B[1, 0])
    l = complex(B[0, 1], B[1, 1])
    return Cocycle(x.surface_key, (b,) * x.n, (l,) * x.n)


def flow_tangent_cocycle(x: Origami, direction) -> Cocycle:
    """Tangent D . Phi(x) of u -> exp(uD) x at u = 0."""
    return pushforward_cocycle(_as_matrix(direction), tautological_cocycle(x))


def pushforward_cocycle(m, v: Cocycle) -> Cocycle:
    """Map every edge value, read as a real 2-vector, by the matrix m."""
    mm = _as_matrix(m)
    return Cocycle(v.surface_key,
                   tuple(_map_value(mm, z) for z in v.bottom),
                   tuple(_map_value(mm, z) for z in v.left))


@lru_cache(maxsize=32)
def _closed_basis(surface_key) -> np.ndarray:
    """Real basis (2n, d) of closed cochains; d = n + 1 when connected."""
    n, sh, sv = surface_key
    C = np.zeros((n, 2 * n))
    for i in range(n):
        C[i, i] += 1.0
        C[i, n + sh[i]] += 1.0
        C[i, sv[i]] -= 1.0
        C[i, n + i] -= 1.0
    return null_space(C)


def cocycle_basis(x: Origami) -> list[Cocycle]:
    """Real closed cochains spanning the (n+1)-dimensional real space."""
    ns = _closed_basis(x.surface_key)
    out = []
    for k in range(ns.shape[1]):
        col = ns[:, k]
        out.append(Cocycle(x.surface_key,
                           tuple(complex(v) for v in col[:x.n]),
                           tuple(complex(v) for v in col[x.n:])))
    return out


def random_cocycle(x: Origami, rng: np.random.Generator,
                   kind: str = "complex") -> Cocycle:
    """Random closed cochain: 'real', 'imaginary' or 'complex' valued."""
    ns = _closed_basis(x.surface_key)
    d = ns.shape[1]
    if kind == "real":
        col = ns @ rng.standard_normal(d)
    elif kind == "imaginary":
        col = 1j * (ns @ rng.standard_normal(d))
    elif kind == "complex":
        col = ns @ rng.standard_normal(d) + 1j * (ns @ rng.standard_normal(d))
    else:
        raise InvalidInputError(f"unknown cocycle kind {kind!r}")
    return Cocycle(x.surface_key,
                   tuple(complex(v) for v in col[:x.n]),
                   tuple(complex(v) for v in col[x.n:]))


def evaluate_cocycle(v: Cocycle, gamma: SaddleConnection) -> complex:
    """Pairing v(gamma): signed sum of edge values along the staircase.

    Independent of the staircase convention by closedness; for the
    tautological cocycle it equals the deformed holonomy exactly.
    """
    if v.surface_key != gamma.surface_key:
        raise InvalidInputError("cocycle and connection live on different origamis")
    return complex(np.dot(np.asarray(gamma.edge_coeffs, dtype=float), v.vec))


# ----------------------------------------------------------------------
# The saddle-connection Finsler norm and path estimates.

class ConnectionSet:
    """Vectorised view of a list of connections for norm evaluation."""

    def __init__(self, x: Origami, conns: list[SaddleConnection]):
        if not conns:
            raise InvalidInputError("empty connection set")
        self.surface_key = x.surface_key
        self.conns = conns
        self.hol = np.array([[c.p, c.q] for c in conns], dtype=float)
        self.coeff = np.array([c.edge_coeffs for c in conns], dtype=float)

    def periods(self, deformation) -> np.ndarray:
        B = np.asarray(deformation, dtype=float)
        xy = self.hol @ B.T
        return xy[:, 0] + 1j * xy[:, 1]

    def values(self, v: Cocycle) -> np.ndarray:
        if v.surface_key != self.surface_key:
            raise InvalidInputError("cocycle lives on a different origami")
        return self.coeff @ v.vec

    def norm(self, v: Cocycle, deformation) -> float:
        return float(np.max(np.abs(self.values(v)) / np.abs(self.periods(deformation))))


class NormResult(NamedTuple):
    value: float
    stabilized: bool


def default_norm_radius(x: Origami) -> float:
    return max(20.0, 40.0 * systole(x))


def saddle_connection_norm(x: Origami, v: Cocycle, L: float | None = None,
             budget: int | None = None) -> NormResult:
    """sup |v(gamma)/Phi(x)(gamma)| over connections of length <= L.

    Monotone nondecreasing in L.  The stabilized flag reports whether
    doubling L moved the value by less than 1e-9; the sup over *all*
    connections has no proven truncation radius, so the flag is exposed
    instead of silently trusting the cutoff.
    """
    sys_x = systole(x)
    if L is None:
        L = default_norm_radius(x)
    if L < 4.0 * sys_x:
        raise InvalidInputError(f"norm radius L = {L} below 4 sys = {4 * sys_x}")
    base, doubled = _truncation_pair(x, L, budget)
    val = base.norm(v, x.deformation)
    val2 = doubled.norm(v, x.deformation)
    return NormResult(value=val, stabilized=bool(val2 - val < STABILIZE_TOL))


@dataclass(frozen=True)
class PathNormReport:
    """Outcome of the slow-variation checks along a deformation path."""

    duration: float
    length: float
    length_err: float
    norm_start: float
    norm_end: float
    connection_violations: int
    max_connection_excess: float
    ratio_within_bound: bool
    stabilized: bool


def _tangent_norm_on_set(cs: ConnectionSet, D: np.ndarray, B_u: np.ndarray) -> float:
    periods = cs.hol @ B_u.T
    tangents = periods @ D.T
    num = np.hypot(tangents[:, 0], tangents[:, 1])
    den = np.hypot(periods[:, 0], periods[:, 1])
    return float(np.max(num / den))


def _path_length(cs: ConnectionSet, D: np.ndarray, mats, duration: float):
    """Integral of the set-truncated tangent norm along u -> mats(u) by
    Simpson doubling; returns (length, error_estimate, n_intervals)."""
    def quad(n):
        us = np.linspace(0.0, duration, n + 1)
        ys = np.array([_tangent_norm_on_set(cs, D, mats(u)) for u in us])
        h = duration / n
        return h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum())

    n = 16
    prev = quad(n)
    err = math.inf
    while n < 512:
        n *= 2
        cur = quad(n)
        err = abs(cur - prev)
        prev = cur
        if err <= max(1e-10, 1e-9 * abs(cur)):
            break
    return prev, err, n


def path_norm_bounds(x: Origami, direction, duration: float, v: Cocycle,
                     L: float | None = None,
                     budget: int | None = None,
                     stabilize_rtol: float = 1e-4) -> PathNormReport:
    """Slow-variation report for the path u -> exp(u direction) . x.

    Uses one matched truncation set (radius L around the start point)
    for the whole path: the tangent-norm integral, the per-connection
    ratio bounds |log |kappa(T)(gamma)/kappa(0)(gamma)|| <= length, and
    the endpoint norm ratio of v within [e^-length, e^length].  With a
    matched set these inequalities are exact at any radius; the
    stabilisation check (relative movement of the tangent norm under a
    doubled radius) guards using the truncated integral as a stand-in
    for the true Finsler length.
    """
    if duration < 0.0 or duration > 0.3:
        raise InvalidInputError(f"duration must lie in [0, 0.3], got {duration}")
    D = _as_matrix(direction)
    if L is None:
        L = default_norm_radius(x)
    base, doubled = _truncation_pair(x, L, budget)
    B0 = x.deformation

    n0 = _tangent_norm_on_set(base, D, B0)
    n0_doubled = _tangent_norm_on_set(doubled, D, B0)
    stabilized = abs(n0_doubled - n0) <= stabilize_rtol * max(1.0, abs(n0))
    if not stabilized:
        raise BudgetError(
            f"tangent norm not stabilised at L = {L}: {n0} vs {n0_doubled}")

    if duration == 0.0:
        nv = base.norm(v, B0)
        return PathNormReport(duration=0.0, length=0.0, length_err=0.0,
                              norm_start=nv, norm_end=nv,
                              connection_violations=0, max_connection_excess=0.0,
                              ratio_within_bound=True, stabilized=True)

    def mats(u):
        return expm(u * D) @ B0

    length, lerr, _ = _path_length(base, D, mats, duration)
    slack = 3.0 * lerr + 1e-12

    B1 = mats(duration)
    p0 = np.abs(base.periods(B0))
    p1 = np.abs(base.periods(B1))
    log_ratios = np.abs(np.log(p1 / p0))
    excess = float(np.max(log_ratios) - (length + slack))
    violations = int(np.sum(log_ratios > length + slack))

    vals = np.abs(base.values(v))
    norm_start = float(np.max(vals / p0))
    norm_end = float(np.max(vals / p1))
    log_norm_ratio = math.log(norm_start / norm_end)
    ratio_ok = abs(log_norm_ratio) <= length + slack

    return PathNormReport(duration=duration, length=float(length),
                          length_err=float(lerr),
                          norm_start=norm_start, norm_end=norm_end,
                          connection_violations=violations,
                          max_connection_excess=excess,
                          ratio_within_bound=bool(ratio_ok),
                          stabilized=stabilized)


def straight_path_length(x: Origami, target_deformation,
                         L: float | None = None, n_nodes: int = 64,
                         budget: int | None = None) -> tuple[float, float]:
    """Finsler length of the straight segment B_u = (1-u) B + u B' in
    period coordinates, by Simpson quadrature of the truncated tangent
    norm (the tangent is the constant cochain (B' - B) . unit periods)."""
    B0 = x.deformation
    B1 = _as_matrix(target_deformation)
    if np.linalg.det(B1) <= 0.0:
        raise InvalidInputError("target deformation must have det > 0")
    for u in np.linspace(0.0, 1.0, 33):
        if np.linalg.det((1.0 - u) * B0 + u * B1) <= 0.0:
            raise InvalidInputError("straight path leaves GL+(2,R)")
    if L is None:
        L = default_norm_radius(x)
    cs = ConnectionSet(x, _cached_connections(x, L, budget))
    D = B1 - B0

    def tangent_over_base(u):
        periods = cs.hol @ ((1.0 - u) * B0 + u * B1).T
        tangents = cs.hol @ D.T
        num = np.hypot(tangents[:, 0], tangents[:, 1])
        den = np.hypot(periods[:, 0], periods[:, 1])
        return float(np.max(num / den))

    def quad(n):
        us = np.linspace(0.0, 1.0, n + 1)
        ys = np.array([tangent_over_base(u) for u in us])
        h = 1.0 / n
        return h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum())

    n = max(8, n_nodes)
    prev = quad(n)
    cur = quad(2 * n)
    return float(cur), float(abs(cur - prev))
