"""Command-line front end.

Every run writes one self-describing artifact (CSV or JSON) whose
header embeds the version, the command, the full parameter set and the
seed; identical configurations produce byte-identical output (floats
are serialised as shortest round-trip decimals).  ``--plot PATH``
additionally renders a matplotlib figure for curve-like commands,
alongside the delimited output.

Exit codes: 0 success, 1 usage error, 2 numerical failure or exhausted
budget, 3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from . import dynamics, origami, specfit, spherical, transforms
from .errors import InvalidInputError, NumericalFailureError
from .sl2kernel import FLOW_GENERATORS

__all__ = ["main", "run", "rebuild_argv"]

_INTERNAL_KEYS = {"func", "command", "group", "sub", "out", "plot"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ----------------------------------------------------------------------
# Argument helpers.

def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise _UsageError(f"cannot parse complex number {text!r}") from exc


def _parse_floats(text: str) -> list[float]:
    """Comma list and/or start:stop:step ranges (inclusive stop)."""
    out: list[float] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            parts = tok.split(":")
            if len(parts) != 3:
                raise _UsageError(f"range must be start:stop:step, got {tok!r}")
            start, stop, step = map(float, parts)
            n = int(round((stop - start) / step))
            out.extend(start + i * step for i in range(n + 1))
        else:
            out.append(float(tok))
    if not out:
        raise _UsageError(f"empty number list {text!r}")
    return out


def _parse_complex_list(text: str) -> list[complex]:
    return [_parse_complex(tok) for tok in text.split(",") if tok.strip()]


def _parse_atoms(text: str) -> transforms.SpectralAtoms:
    pairs = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        s, _, w = tok.partition(":")
        pairs.append((float(s), float(w) if w else 1.0))
    pairs.sort(key=lambda p: p[0])
    return transforms.SpectralAtoms.of(*pairs)


def _parse_measure(atoms_text: str | None,
                   density_text: str | None) -> transforms.MeasureOnInterval:
    atoms = []
    if atoms_text:
        for tok in atoms_text.split(","):
            x, _, m = tok.strip().partition(":")
            atoms.append((float(x), float(m) if m else 1.0))
    pieces = []
    if density_text:
        for tok in density_text.split(","):
            parts = tok.strip().split(":")
            if len(parts) != 3:
                raise _UsageError("density piece must be a:b:rho")
            pieces.append((float(parts[0]), float(parts[1]), float(parts[2])))
    return transforms.MeasureOnInterval(atoms=tuple(atoms), density=tuple(pieces))


def _parse_matrix(text: str) -> np.ndarray:
    vals = [float(v) for v in text.replace(",", " ").split()]
    if len(vals) != 4:
        raise _UsageError("matrix must be four entries 'a b c d'")
    return np.array(vals).reshape(2, 2)


def _load_origami(args) -> origami.Origami:
    if getattr(args, "record", None):
        return origami.parse_origami_record(args.record)
    if getattr(args, "file", None):
        with open(args.file, "r", encoding="utf-8") as fh:
            return origami.parse_origami_record(fh.read())
    raise _UsageError("an origami is required: pass --file or --record")


def _load_series(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Two-column (t, value) data from a CSV file; '#' lines and one
    optional header row are skipped."""
    ts, ys = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                t, y = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                continue  # header row
            ts.append(t)
            ys.append(y)
    if len(ts) < 2:
        raise InvalidInputError(f"no usable (t, value) rows in {path}")
    return np.asarray(ts), np.asarray(ys)


def _load_matrix_file(path: str) -> np.ndarray:
    M = np.loadtxt(path, delimiter=",", dtype=complex, ndmin=2)
    return M


def _toy_operator(args) -> np.ndarray:
    if getattr(args, "file", None):
        return _load_matrix_file(args.file)
    if getattr(args, "random", None):
        _require_seed(args)
        rng = np.random.default_rng(args.seed)
        n = int(args.random)
        return rng.standard_normal((n, n)) - (args.shift or 0.0) * np.eye(n)
    raise _UsageError("a toy operator is required: pass --file or --random N")


def _require_seed(args):
    if args.seed is None:
        raise _UsageError("this command is stochastic: --seed is required")
    if not 0 <= args.seed < 2 ** 64:
        raise _UsageError(f"--seed must be a u64, got {args.seed}")


def _tol(args, default: float) -> float:
    return default if args.tol is None else args.tol


# ----------------------------------------------------------------------
# Output.

def _py(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _meta(args, command: str) -> dict:
    params = {k: _py(v) for k, v in vars(args).items()
              if k not in _INTERNAL_KEYS and v is not None}
    return {"version": __version__, "command": command,
            "seed": args.seed, "params": params}


def rebuild_argv(meta: dict) -> list[str]:
    """Reconstruct the command line from an embedded artifact header."""
    argv = meta["command"].split()
    for key, val in sorted(meta["params"].items()):
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        else:
            argv.extend([flag, str(val)])
    return argv


def _render_csv(meta: dict, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_py(v) for v in row])
    return buf.getvalue()


def _render_json(meta: dict, columns: list[str], rows: list[list]) -> str:
    doc = {"meta": meta, "columns": columns,
           "rows": [[_py(v) for v in row] for row in rows]}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _emit(args, command: str, columns, rows, extra_meta=None, plotspec=None) -> None:
    meta = _meta(args, command)
    if extra_meta:
        meta.update({k: _py(v) for k, v in extra_meta.items()})
    text = (_render_json if args.format == "json" else _render_csv)(
        meta, columns, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        if plotspec is None:
            print(f"note: {command!r} has no figure; --plot ignored",
                  file=sys.stderr)
        else:
            from . import report
            report.render(plotspec, args.plot)


# ----------------------------------------------------------------------
# Handlers.  Each returns (columns, rows, extra_meta, plotspec).

def _cmd_spherical_eval(args):
    ss = _parse_complex_list(args.s)
    ts = _parse_floats(args.t)
    tol = _tol(args, 1e-12)
    rows = []
    series = []
    for s in ss:
        vals = [spherical.phi(s, t, tol) for t in ts]
        rows.extend([str(s), t, v] for t, v in zip(ts, vals))
        series.append((f"s={s}", vals))
    plot = {"kind": "lines", "x": ts, "series": series, "xlabel": "t",
            "ylabel": "phi(s, t)", "title": "spherical function"}
    return ["s", "t", "phi"], rows, {}, plot


def _cmd_spherical_defect(args):
    s = float(args.s)
    ts = _parse_floats(args.t)
    cs = spherical.c_function(s).real
    vals = [math.exp(t) * abs(spherical.phi(s, t) - cs * math.exp((s - 1) * t))
            for t in ts]
    rows = [[t, v] for t, v in zip(ts, vals)]
    extra = {"max_defect": spherical.harish_defect(s, ts), "c_s": cs}
    plot = {"kind": "lines", "x": ts, "series": [(f"s={s}", vals)],
            "xlabel": "t", "ylabel": "e^t |phi - c(s) e^{(s-1)t}|",
            "title": "leading-term defect"}
    return ["t", "scaled_defect"], rows, extra, plot


def _cmd_spherical_ratner(args):
    v = float(args.v)
    delta = float(args.delta)
    ts = _parse_floats(args.t)
    vals = [math.exp((1 - delta) * t) * abs(spherical.phi(complex(0, v), t))
            for t in ts]
    rows = [[t, val] for t, val in zip(ts, vals)]
    extra = {"max_value": spherical.ratner_check(v, delta, ts)}
    plot = {"kind": "lines", "x": ts, "series": [(f"v={v}", vals)],
            "xlabel": "t", "ylabel": "e^{(1-delta)t} |phi_iv|",
            "title": "tempered decay check"}
    return ["t", "scaled_phi"], rows, extra, plot


def _cmd_spherical_casimir(args):
    s = _parse_complex(args.s)
    ts = _parse_floats(args.t)
    vals = [spherical.casimir_residual(s, t) for t in ts]
    rows = [[t, v] for t, v in zip(ts, vals)]
    plot = {"kind": "lines", "x": ts, "series": [(f"s={s}", vals)],
            "xlabel": "t", "ylabel": "radial ODE residual", "logy": True,
            "title": "Casimir residual"}
    return ["t", "residual"], rows, {"max_residual": max(vals)}, plot


def _cmd_gamma(args):
    s = _parse_complex(args.s)
    N = int(args.n)
    G = spherical.gamma_coeffs(s, N).coeffs
    rows = [[n, G[n].real, G[n].imag] for n in range(N + 1)]
    ns = [n for n in range(2, N + 1, 2) if abs(G[n]) > 0]
    growth = [abs(G[n]) ** (1.0 / n) for n in ns]
    plot = {"kind": "lines", "x": ns, "series": [(f"s={s}", growth)],
            "xlabel": "n", "ylabel": "|Gamma_n|^(1/n)",
            "title": "series coefficient growth"} if ns else None
    return ["n", "re", "im"], rows, {}, plot


def _cmd_transform_laplace(args):
    ts, ys = _load_series(args.infile)
    z = _parse_complex(args.z)
    val, err = transforms.laplace_numeric((ts, ys), z, atol=_tol(args, 1e-10))
    return (["z", "re", "im", "error"],
            [[str(z), val.real, val.imag, err]], {}, None)


def _cmd_transform_extend(args):
    atoms = _parse_atoms(args.atoms)
    z = _parse_complex(args.z)
    val = transforms.extended_F(atoms, z, float(args.delta),
                                atol=_tol(args, 1e-10))
    return ["z", "re", "im"], [[str(z), val.real, val.imag]], {}, None


def _cmd_transform_residue(args):
    atoms = _parse_atoms(args.atoms)
    z0 = _parse_complex(args.z0)
    delta = float(args.delta)
    val, err = transforms.residue_contour(
        lambda z: transforms.extended_F(atoms, z, delta), z0,
        float(args.radius), n_nodes=int(args.nodes))
    return (["z0", "re", "im", "error"],
            [[str(z0), val.real, val.imag, err]], {}, None)


def _cmd_transform_atoms(args):
    nu = _parse_measure(args.nu_atoms, args.nu_density)
    ladder = float(args.y0) * 0.5 ** np.arange(int(args.rungs))
    mass = transforms.atom_mass(nu, float(args.x), ladder)
    return (["x", "mass"], [[float(args.x), mass]],
            {"total_mass": nu.total_mass}, None)


def _matrix_rows(M: np.ndarray) -> list[list]:
    return [[i, j, M[i, j].real, M[i, j].imag]
            for i in range(M.shape[0]) for j in range(M.shape[1])]


def _cmd_toy_resolvent(args):
    L = _toy_operator(args)
    z0, z = _parse_complex(args.z0), _parse_complex(args.z)
    eye = np.eye(L.shape[0], dtype=complex)
    M = np.linalg.inv(z0 * eye - L)
    S = transforms.resolvent_S(M, z0, z)
    residual = float(np.linalg.norm(S - np.linalg.inv(z * eye - L), 2))
    return (["i", "j", "re", "im"], _matrix_rows(S),
            {"identity_residual": residual}, None)


def _cmd_toy_projection(args):
    L = _toy_operator(args)
    lam = _parse_complex(args.eigenvalue)
    P = transforms.spectral_projection(L, lam, float(args.radius))
    extra = {
        "idempotency": float(np.linalg.norm(P @ P - P, 2)),
        "commutation": float(np.linalg.norm(P @ L - L @ P, 2)),
        "rank": int(round(np.trace(P).real)),
    }
    return ["i", "j", "re", "im"], _matrix_rows(P), extra, None


def _cmd_toy_specradius(args):
    L = _toy_operator(args)
    est = transforms.spectral_radius_via_iterates(L, int(args.n_max))
    oracle = float(np.abs(np.linalg.eigvals(L)).max())
    return (["estimate", "eig_oracle"], [[est, oracle]], {}, None)


def _cmd_origami_info(args):
    x = _load_origami(args)
    row = [x.n, x.genus, " ".join(map(str, x.kappa)),
           " ".join(map(str, x.stratum())), x.n_marked, x.period_dimension]
    return (["squares", "genus", "kappa", "stratum", "marked_classes",
             "period_dimension"], [row], {}, None)


def _cmd_origami_saddles(args):
    x = _load_origami(args)
    conns = origami.saddle_connections(x, float(args.length), budget=args.budget)
    rows = [[c.p, c.q, c.steps, abs(c.holonomy(x.deformation)),
             c.start_class, c.end_class, c.start_square] for c in conns]
    pts = ([c.holonomy(x.deformation).real for c in conns],
           [c.holonomy(x.deformation).imag for c in conns])
    plot = {"kind": "scatter", "points": pts, "xlabel": "Re hol",
            "ylabel": "Im hol", "title": f"{len(conns)} saddle connections"}
    return (["p", "q", "steps", "length", "start_class", "end_class",
             "start_square"], rows, {"count": len(conns)}, plot)


def _cmd_origami_systole(args):
    x = _load_origami(args)
    sys_val = origami.systole(x)
    row = [sys_val]
    cols = ["systole"]
    if args.delta is not None:
        cols.append("v_delta")
        row.append(origami.v_delta(x, float(args.delta)))
    return cols, [row], {}, None


def _cocycle_from_name(x, name, seed):
    if name == "tautological":
        return origami.tautological_cocycle(x)
    if name in FLOW_GENERATORS:
        return origami.flow_tangent_cocycle(x, FLOW_GENERATORS[name])
    if name == "random":
        if seed is None:
            raise _UsageError("--cocycle random needs --seed")
        return origami.random_cocycle(x, np.random.default_rng(seed))
    raise _UsageError(f"unknown cocycle {name!r} (tautological, geodesic, "
                      "horocycle, opp_horocycle, rotation, random)")


def _cmd_origami_norm(args):
    x = _load_origami(args)
    v = _cocycle_from_name(x, args.cocycle, args.seed)
    L = float(args.length) if args.length is not None else None
    res = origami.saddle_connection_norm(x, v, L=L, budget=args.budget)
    return (["value", "stabilized"], [[res.value, res.stabilized]], {}, None)


def _cmd_origami_path(args):
    x = _load_origami(args)
    D = _parse_matrix(args.direction)
    v = _cocycle_from_name(x, args.cocycle, args.seed)
    L = float(args.length) if args.length is not None else None
    rep = origami.path_norm_bounds(x, D, float(args.duration), v, L=L,
                                   budget=args.budget)
    row = [rep.length, rep.length_err, rep.norm_start, rep.norm_end,
           rep.connection_violations, rep.max_connection_excess,
           rep.ratio_within_bound]
    return (["length", "length_err", "norm_start", "norm_end",
             "violations", "max_excess", "ratio_within_bound"],
            [row], {}, None)


def _cmd_flow_recurrence(args):
    x = _load_origami(args)
    ts = _parse_floats(args.t)
    prof = dynamics.recurrence_profile(x, float(args.delta), ts,
                                       n_nodes=int(args.nodes))
    rows = [[t, a, e, f] for t, a, e, f in
            zip(prof.t, prof.avg, prof.quad_err, prof.failed)]
    extra = {"c": prof.c1, "v_delta_start": prof.v_delta_start}
    env = [prof.envelope(t) for t in prof.t]
    plot = {"kind": "lines", "x": list(prof.t),
            "series": [("average", list(prof.avg)), ("envelope", env)],
            "xlabel": "t", "ylabel": "horocycle average of V_delta",
            "logy": True, "title": f"recurrence profile (delta={prof.delta})"}
    return ["t", "average", "quad_err", "failed"], rows, extra, plot


def _cmd_mc_correlate(args):
    _require_seed(args)
    ts = _parse_floats(args.t)
    series = dynamics.correlation_mc((float(args.lo), float(args.hi)), ts,
                                     int(args.n), args.seed)
    rows = [[t, e, se] for t, e, se in
            zip(series.t, series.estimate, series.stderr)]
    try:
        slope = dynamics.log_slope(series, min(ts), max(ts))
    except InvalidInputError:
        slope = math.nan
    plot = {"kind": "errorbar", "x": list(series.t),
            "series": [("correlation", list(series.estimate),
                        list(series.stderr))],
            "xlabel": "t", "ylabel": "covariance estimate",
            "title": f"systole bump [{args.lo}, {args.hi}], N={args.n}"}
    return (["t", "estimate", "stderr"], rows,
            {"log_slope": slope}, plot)


def _cmd_fit_rates(args):
    ts, ys = _load_series(args.infile)
    table = specfit.fit_exponential_sum(ts, ys, int(args.k))
    rows = [[a, c] for a, c in zip(table.rates, table.coefficients)]
    model = table.model(ts)
    plot = {"kind": "lines", "x": list(ts),
            "series": [("data", list(ys)), ("model", list(model))],
            "xlabel": "t", "ylabel": "value", "logy": bool(np.all(ys > 0)),
            "title": f"exponential-sum fit, k={args.k}"}
    return (["rate", "coefficient"], rows,
            {"residual": table.residual,
             "eigenvalues": [specfit.rate_to_eigenvalue(a) if a <= 1.0 else None
                             for a in table.rates]}, plot)


# ----------------------------------------------------------------------
# Parser assembly.

def _common() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--seed", type=int, default=None, help="RNG seed (u64)")
    c.add_argument("--out", default=None, help="output path (default stdout)")
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    c.add_argument("--tol", type=float, default=None, help="tolerance override")
    c.add_argument("--threads", type=int, default=1,
                   help="worker count (recorded; results are independent of it)")
    c.add_argument("--budget", type=int, default=None,
                   help="tracing event budget for enumerations")
    c.add_argument("--plot", default=None, metavar="PNG",
                   help="also render a figure to this path")
    return c


def _origami_source(p):
    p.add_argument("--file", default=None, help="origami record file")
    p.add_argument("--record", default=None, help="inline origami record")


def _toy_source(p):
    p.add_argument("--file", default=None, help="CSV matrix for the toy operator")
    p.add_argument("--random", type=int, default=None, metavar="N",
                   help="random N x N toy (needs --seed)")
    p.add_argument("--shift", type=float, default=None,
                   help="subtract shift * I from the random toy")


def build_parser() -> _Parser:
    common = _common()
    p = _Parser(prog="teichlab",
                description="spherical functions, toy transforms, origamis, "
                            "flow recurrence and correlation experiments")
    sub = p.add_subparsers(dest="group", required=True)

    sph = sub.add_parser("spherical").add_subparsers(dest="sub", required=True)
    q = sph.add_parser("eval", parents=[common])
    q.add_argument("--s", required=True, help="comma list (use j for iv)")
    q.add_argument("--t", required=True, help="comma list / start:stop:step")
    q.set_defaults(func=_cmd_spherical_eval, command="spherical eval")
    q = sph.add_parser("defect", parents=[common])
    q.add_argument("--s", required=True, type=float)
    q.add_argument("--t", default="1:15:1")
    q.set_defaults(func=_cmd_spherical_defect, command="spherical defect")
    q = sph.add_parser("ratner", parents=[common])
    q.add_argument("--v", required=True, type=float)
    q.add_argument("--delta", default=0.1, type=float)
    q.add_argument("--t", default="1:15:1")
    q.set_defaults(func=_cmd_spherical_ratner, command="spherical ratner")
    q = sph.add_parser("casimir", parents=[common])
    q.add_argument("--s", required=True)
    q.add_argument("--t", default="1:6:0.5")
    q.set_defaults(func=_cmd_spherical_casimir, command="spherical casimir")

    q = sub.add_parser("gamma", parents=[common])
    q.add_argument("--s", required=True)
    q.add_argument("--n", required=True, type=int)
    q.set_defaults(func=_cmd_gamma, command="gamma")

    tr = sub.add_parser("transform").add_subparsers(dest="sub", required=True)
    q = tr.add_parser("laplace", parents=[common])
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--z", required=True)
    q.set_defaults(func=_cmd_transform_laplace, command="transform laplace")
    q = tr.add_parser("extend", parents=[common])
    q.add_argument("--atoms", required=True, help="s:w pairs, e.g. 0.6:1,0.4:0.5")
    q.add_argument("--z", required=True)
    q.add_argument("--delta", default=0.1, type=float)
    q.set_defaults(func=_cmd_transform_extend, command="transform extend")
    q = tr.add_parser("residue", parents=[common])
    q.add_argument("--atoms", required=True)
    q.add_argument("--z0", required=True)
    q.add_argument("--radius", default=0.08, type=float)
    q.add_argument("--delta", default=0.2, type=float)
    q.add_argument("--nodes", default=32, type=int)
    q.set_defaults(func=_cmd_transform_residue, command="transform residue")
    q = tr.add_parser("atoms", parents=[common])
    q.add_argument("--nu-atoms", default=None, help="x:m pairs")
    q.add_argument("--nu-density", default=None, help="a:b:rho pieces")
    q.add_argument("--x", required=True, type=float)
    q.add_argument("--y0", default=0.1, type=float)
    q.add_argument("--rungs", default=10, type=int)
    q.set_defaults(func=_cmd_transform_atoms, command="transform atoms")

    toy = sub.add_parser("toy").add_subparsers(dest="sub", required=True)
    q = toy.add_parser("resolvent", parents=[common])
    _toy_source(q)
    q.add_argument("--z0", required=True)
    q.add_argument("--z", required=True)
    q.set_defaults(func=_cmd_toy_resolvent, command="toy resolvent")
    q = toy.add_parser("projection", parents=[common])
    _toy_source(q)
    q.add_argument("--eigenvalue", required=True)
    q.add_argument("--radius", required=True, type=float)
    q.set_defaults(func=_cmd_toy_projection, command="toy projection")
    q = toy.add_parser("specradius", parents=[common])
    _toy_source(q)
    q.add_argument("--n-max", default=200, type=int)
    q.set_defaults(func=_cmd_toy_specradius, command="toy specradius")

    org = sub.add_parser("origami").add_subparsers(dest="sub", required=True)
    q = org.add_parser("info", parents=[common])
    _origami_source(q)
    q.set_defaults(func=_cmd_origami_info, command="origami info")
    q = org.add_parser("saddles", parents=[common])
    _origami_source(q)
    q.add_argument("--length", required=True, type=float, help="radius L")
    q.set_defaults(func=_cmd_origami_saddles, command="origami saddles")
    q = org.add_parser("systole", parents=[common])
    _origami_source(q)
    q.add_argument("--delta", default=None, type=float,
                   help="also report V_delta")
    q.set_defaults(func=_cmd_origami_systole, command="origami systole")
    q = org.add_parser("norm", parents=[common])
    _origami_source(q)
    q.add_argument("--cocycle", default="tautological")
    q.add_argument("--length", default=None, type=float)
    q.set_defaults(func=_cmd_origami_norm, command="origami norm")
    q = org.add_parser("path", parents=[common])
    _origami_source(q)
    q.add_argument("--direction", required=True, help="'a b c d' generator")
    q.add_argument("--duration", required=True, type=float)
    q.add_argument("--cocycle", default="tautological")
    q.add_argument("--length", default=None, type=float)
    q.set_defaults(func=_cmd_origami_path, command="origami path")

    flow = sub.add_parser("flow").add_subparsers(dest="sub", required=True)
    q = flow.add_parser("recurrence", parents=[common])
    _origami_source(q)
    q.add_argument("--delta", default=0.1, type=float)
    q.add_argument("--t", default="0:8:0.5")
    q.add_argument("--nodes", default=64, type=int)
    q.set_defaults(func=_cmd_flow_recurrence, command="flow recurrence")

    mc = sub.add_parser("mc").add_subparsers(dest="sub", required=True)
    q = mc.add_parser("correlate", parents=[common])
    q.add_argument("--lo", default=0.8, type=float)
    q.add_argument("--hi", default=1.0, type=float)
    q.add_argument("--t", default="0:4:1")
    q.add_argument("--n", required=True, type=int)
    q.set_defaults(func=_cmd_mc_correlate, command="mc correlate")

    fit = sub.add_parser("fit").add_subparsers(dest="sub", required=True)
    q = fit.add_parser("rates", parents=[common])
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--k", required=True, type=int)
    q.set_defaults(func=_cmd_fit_rates, command="fit rates")

    return p


def run(argv) -> int:
    """Parse, dispatch and emit; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise _UsageError("--threads must be >= 1")
        columns, rows, extra, plotspec = args.func(args)
        _emit(args, args.command, columns, rows, extra, plotspec)
        return 0
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
