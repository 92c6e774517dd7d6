"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line with its measured figure of merit.  Criterion 16 is soft: it
reports and warns but does not fail the build."""

import math
import time
import warnings

import numpy as np
from teichlab.dynamics import correlation_mc, log_slope, recurrence_profile
from teichlab.origami import (
    ConnectionSet,
    saddle_connection_norm,
    build_origami,
    flow_tangent_cocycle,
    path_norm_bounds,
    random_cocycle,
    saddle_connections,
    straight_path_length,
    systole,
    tautological_cocycle,
    v_delta,
    _closed_basis,
)
from teichlab.sl2kernel import FLOW_GENERATORS
from teichlab.specfit import eigenvalue_to_rate, fit_exponential_sum, rate_to_eigenvalue
from teichlab.spherical import (
    c_function,
    casimir_residual,
    gamma_coeffs,
    phi,
    phi_oracle,
)
from teichlab.transforms import (
    MeasureOnInterval,
    SpectralAtoms,
    atom_mass,
    extended_F,
    residue_contour,
    resolvent_S,
    spectral_projection,
)

S_SET = [0.1, 0.25, 0.5, 0.75, 0.95, 0.5j, 2.0j]
C06 = 1.449724260959791115029348


def report(num, ok, detail):
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} - {detail}",
          flush=True)
    assert ok, f"criterion {num}: {detail}"


def torus(deformation=None):
    return build_origami((0,), (0,), deformation)


def l_origami(deformation=None):
    return build_origami((1, 0, 2), (2, 1, 0), deformation)


def test_criterion_01_series_vs_oracle():
    start = time.perf_counter()
    worst = 0.0
    for s in S_SET:
        for t in (0.5, 1.0, 2.0, 4.0, 8.0):
            worst = max(worst, abs(phi(s, t) - phi_oracle(s, t).real))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 10.0
    report(1, ok, f"max |phi - oracle| = {worst:.2e} (<= 1e-8), "
                  f"runtime {elapsed:.2f}s (< 10s)")


def test_criterion_02_normalisation_at_identity():
    worst = max(abs(phi(s, 0.0) - 1.0) for s in S_SET)
    report(2, worst <= 1e-10, f"max |phi(s,0) - 1| = {worst:.2e} (<= 1e-10)")


def test_criterion_03_casimir_residual():
    worst = 0.0
    for s in (0.3, 0.7, 1.0j):
        for t in np.arange(1.0, 6.5, 0.5):
            worst = max(worst, casimir_residual(s, float(t)))
    report(3, worst <= 1e-6, f"max radial ODE residual = {worst:.2e} (<= 1e-6)")


def test_criterion_04_harish_bounded_defect():
    worst_ratio = 0.0
    for s in (0.2, 0.5, 0.9):
        cs = c_function(s).real
        def defect(t):
            return math.exp(t) * abs(phi(s, t) - cs * math.exp((s - 1.0) * t))
        full = max(defect(t) for t in range(1, 16))
        early = max(defect(t) for t in (1, 2, 3))
        worst_ratio = max(worst_ratio, full / early)
    report(4, worst_ratio <= 2.0,
           f"max_t<=15 / max_t<=3 of e^t defect = {worst_ratio:.3f} (<= 2)")


def test_criterion_05_ratner_bound():
    worst_ratio = 0.0
    for v in (0.0, 0.5, 1.0, 5.0):
        vals = [math.exp(0.9 * t) * abs(phi(complex(0.0, v), t))
                for t in range(1, 16)]
        ratio = max(vals) / max(vals[:3])
        worst_ratio = max(worst_ratio, ratio)
    report(5, worst_ratio <= 2.0,
           f"max_t<=15 / max_t<=3 of e^0.9t |phi_iv| = {worst_ratio:.3f} (<= 2)")


def test_criterion_06_gamma_growth():
    worst = 0.0
    for s in (0.2, -0.2, 0.5, -0.5, 0.9, -0.9):
        G = gamma_coeffs(s, 400).coeffs
        ns = np.arange(100, 401, 2)
        worst = max(worst, float((np.abs(G[ns]) ** (1.0 / ns)).max()))
    report(6, worst <= 1.05, f"max |Gamma_n|^(1/n), n in [100,400]: "
                             f"{worst:.4f} (<= 1.05)")


def test_criterion_07_residue_reproduction():
    atoms = SpectralAtoms.of((0.6, 1.0))
    val, _ = residue_contour(lambda z: extended_F(atoms, z, 0.2), -0.4, 0.08,
                             n_nodes=16)
    res_err = abs(val - C06)
    off, _ = residue_contour(lambda z: extended_F(atoms, z, 0.2), -0.1, 0.05,
                             n_nodes=16)
    ok = res_err <= 1e-6 and abs(off) <= 1e-10
    report(7, ok, f"|residue - c(0.6)| = {res_err:.2e} (<= 1e-6), "
                  f"non-pole residue = {abs(off):.2e} (<= 1e-10)")


def test_criterion_08_resolvent_and_projections():
    rng = np.random.default_rng(2718)
    D = np.diag([-0.5, -1.2, -2.0, -3.1, -4.4])
    Q = rng.standard_normal((5, 5))
    Qi = np.linalg.inv(Q)
    L = Q @ D @ Qi
    z0 = 0.4
    eye = np.eye(5)
    M = np.linalg.inv(z0 * eye - L)

    worst_S = 0.0
    for z in np.linspace(-0.3, 1.6, 20) + 0.25j:
        S = resolvent_S(M, z0, z)
        worst_S = max(worst_S, float(np.linalg.norm(
            S - np.linalg.inv(z * eye - L), 2)))

    worst_pi = 0.0
    worst_res = 0.0
    for i, ell in enumerate(np.diag(D)):
        P = spectral_projection(L, ell, 0.2)
        worst_pi = max(worst_pi, float(np.linalg.norm(P @ P - P, 2)))
        ei = np.zeros(5)
        ei[i] = 1.0
        P_exact = Q @ np.diag(ei) @ Qi
        # residue of S(z) at z0 - 1/lambda_i (= ell for this toy)
        n = 128
        theta = np.arange(n) * (2 * np.pi / n)
        acc = sum(resolvent_S(M, z0, ell + 0.2 * np.exp(1j * th))
                  * 0.2 * np.exp(1j * th) for th in theta) / n
        worst_res = max(worst_res, float(np.abs(acc - P_exact).max()))

    ok = worst_S <= 1e-10 and worst_pi <= 1e-8 and worst_res <= 1e-8
    report(8, ok, f"resolvent identity {worst_S:.2e} (<= 1e-10), "
                  f"idempotency {worst_pi:.2e} (<= 1e-8), "
                  f"S-residue vs projection {worst_res:.2e} (<= 1e-8)")


def test_criterion_09_atom_extraction():
    nu = MeasureOnInterval(atoms=((0.5, 0.3),), density=((0.0, 1.0, 1.0),))
    ladder = 0.1 * 0.5 ** np.arange(10)
    at_half = atom_mass(nu, 0.5, ladder)
    at_quarter = atom_mass(nu, 0.25, ladder)
    ok = abs(at_half - 0.3) <= 1e-3 and abs(at_quarter) <= 1e-3
    report(9, ok, f"mass at 0.5: {at_half:.6f} (0.3 +- 1e-3), "
                  f"at 0.25: {abs(at_quarter):.2e} (<= 1e-3)")


def test_criterion_10_origami_exactness():
    x = l_origami()
    combinatorics_ok = (x.genus == 2 and x.kappa == (3,)
                        and sum(k - 1 for k in x.kappa) == 2 * x.genus - 2)
    conns = saddle_connections(x, 1.0)
    got = sorted((c.p, c.q, c.start_square) for c in conns)
    expected = [(0, 1, 0), (0, 1, 1), (0, 1, 2),
                (1, 0, 0), (1, 0, 1), (1, 0, 2)]
    saddles_ok = got == expected and all(
        c.start_class == c.end_class == 0 for c in conns)
    worst_sys = 0.0
    for t in np.linspace(0.0, 5.0, 26):
        expect = math.exp(-float(t))
        worst_sys = max(worst_sys,
                        abs(systole(torus(np.diag([1 / expect, expect]))) - expect))
    ok = combinatorics_ok and saddles_ok and worst_sys <= 1e-12
    report(10, ok, f"H(2) data ok={combinatorics_ok}, unit saddle set "
                   f"ok={saddles_ok}, |sys(g_t torus) - e^-t| max "
                   f"{worst_sys:.2e} (<= 1e-12)")


def test_criterion_11_norm_identities_and_hyperbolicity():
    x = l_origami()
    taut = saddle_connection_norm(x, tautological_cocycle(x), L=8.0)
    geo = saddle_connection_norm(x, flow_tangent_cocycle(x, FLOW_GENERATORS["geodesic"]), L=8.0)
    identities_ok = taut.value == 1.0 and abs(geo.value - 1.0) <= 1e-12

    cs = ConnectionSet(x, saddle_connections(x, 8.0))
    basis = _closed_basis(x.surface_key)
    rng = np.random.default_rng(424242)
    n_cocycles = 1000
    real_vals = np.abs(cs.coeff @ (basis @ rng.standard_normal((basis.shape[1],
                                                                n_cocycles))))
    imag_vals = np.abs(cs.coeff @ (basis @ rng.standard_normal((basis.shape[1],
                                                                n_cocycles))))
    p0 = np.abs(cs.periods(x.deformation))[:, None]
    violations = 0
    for t in (0.5, 1.0, 2.0):
        gt = np.diag([math.exp(t), math.exp(-t)])
        pt = np.abs(cs.periods(gt @ x.deformation))[:, None]
        slack = 1.0 + 1e-12
        # real cocycles scale by e^t and must not contract
        before = real_vals / p0
        after = math.exp(t) * real_vals / pt
        violations += int(np.sum(after < before / slack))
        nz = real_vals > 1e-13
        ratio = (after / np.where(nz, before, 1.0))[nz]
        violations += int(np.sum(ratio > math.exp(2 * t) * slack))
        violations += int(np.sum(ratio < math.exp(-2 * t) / slack))
        # imaginary cocycles scale by e^-t and must not expand
        before_i = imag_vals / p0
        after_i = math.exp(-t) * imag_vals / pt
        violations += int(np.sum(after_i > before_i * slack))
    ok = identities_ok and violations == 0
    report(11, ok, f"|Phi| = {taut.value}, geodesic tangent = {geo.value}, "
                   f"hyperbolicity violations = {violations} "
                   f"(1000 cocycles x 3 times, per connection)")


def test_criterion_12_slow_variation_paths():
    x = l_origami()
    rng = np.random.default_rng(31415)
    violations = 0
    ratio_failures = 0
    for _ in range(200):
        D = rng.standard_normal((2, 2))
        D /= max(1.0, np.linalg.norm(D, 2))
        duration = float(rng.uniform(0.02, 0.3))
        v = random_cocycle(x, rng)
        rep = path_norm_bounds(x, D, duration, v)
        violations += rep.connection_violations
        ratio_failures += 0 if rep.ratio_within_bound else 1
    ok = violations == 0 and ratio_failures == 0
    report(12, ok, f"200 paths: per-connection violations = {violations}, "
                   f"endpoint-ratio failures = {ratio_failures}")


def test_criterion_13_lipschitz_systole():
    from teichlab.errors import InvalidInputError

    rng = np.random.default_rng(16180)
    delta = 0.1
    checked = 0
    draws = 0
    worst_sys_gap = -math.inf
    worst_v_gap = -math.inf
    while checked < 500:
        draws += 1
        assert draws < 5000, "pair sampling rejected too often"
        make = l_origami if checked % 2 else torus
        B0 = np.eye(2) + 0.3 * rng.standard_normal((2, 2))
        B1 = B0 + 0.12 * rng.standard_normal((2, 2))
        if np.linalg.det(B0) <= 0.25 or np.linalg.det(B1) <= 0.25:
            continue
        x, y = make(B0), make(B1)
        sys_x = systole(x)
        try:
            length, err = straight_path_length(x, B1, L=8.0 * sys_x)
        except InvalidInputError:
            continue  # straight segment left GL+(2,R)
        bound = length + 3.0 * err + 1e-9
        worst_sys_gap = max(worst_sys_gap,
                            abs(math.log(systole(x)) - math.log(systole(y))) - bound)
        worst_v_gap = max(worst_v_gap,
                          abs(math.log(v_delta(x, delta)) - math.log(v_delta(y, delta)))
                          - (1.0 + delta) * bound)
        checked += 1
    ok = worst_sys_gap <= 0.0 and worst_v_gap <= 0.0
    report(13, ok, f"500 pairs: worst |dlog sys| - bound = {worst_sys_gap:.2e}"
                   f" (<= 0), worst |dlog V_delta| - (1+delta) bound = "
                   f"{worst_v_gap:.2e} (<= 0)")


def test_criterion_14_recurrence_profiles():
    start = time.perf_counter()
    delta = 0.1
    ok = True
    details = []
    for make, tmax in ((torus, 8.0), (l_origami, 6.0)):
        x = make()
        grid = np.arange(0.0, tmax + 0.25, 0.5)
        prof = recurrence_profile(x, delta, grid)
        finite = math.isfinite(prof.c1) and not any(prof.failed)
        within = all(a <= 1.1 * prof.envelope(t)
                     for t, a in zip(prof.t, prof.avg))
        ok = ok and finite and within
        details.append(f"C={prof.c1:.3f}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 300.0
    report(14, ok, f"envelope constants {details[0]} (torus), "
                   f"{details[1]} (L-origami); runtime {elapsed:.1f}s (< 5 min)")


def test_criterion_15_rate_map_and_fit():
    worst_rt = max(abs(rate_to_eigenvalue(eigenvalue_to_rate(l)) - l)
                   for l in np.linspace(0.0, 0.25, 251))
    t = np.arange(6.0, 16.25, 0.25)
    y = np.array([phi(0.8, ti) + 0.5 * phi(0.4, ti) for ti in t])
    table = fit_exponential_sum(t, y, 2)
    fit_err = max(abs(table.rates[0] - 0.2), abs(table.rates[1] - 0.6))
    ok = worst_rt <= 1e-14 and fit_err <= 1e-2
    report(15, ok, f"rate round-trip {worst_rt:.2e} (<= 1e-14), "
                   f"two-atom rates {tuple(round(r, 4) for r in table.rates)}"
                   f" err {fit_err:.2e} (<= 1e-2)")


def test_criterion_16_mc_decay_soft():
    series = correlation_mc((0.8, 1.0), [1.0, 2.0, 3.0, 4.0], 1_000_000,
                            seed=20240817)
    errors_ok = all(se > 0.0 for se in series.stderr)
    slope = log_slope(series, 1.0, 4.0)
    soft_ok = (not math.isnan(slope)) and slope <= -0.5
    detail = (f"log-slope on [1,4] = {slope:.3f} (target <= -0.5, soft), "
              f"estimates {[f'{e:.1e}' for e in series.estimate]}, "
              f"stderr {[f'{e:.1e}' for e in series.stderr]}")
    if not soft_ok:
        warnings.warn("criterion 16 (soft): " + detail)
    print(f"[criterion 16] {'PASS' if soft_ok else 'WARN'} - {detail}",
          flush=True)
    assert errors_ok  # the hard part: the pipeline reports standard errors
