import math

import numpy as np
import pytest

from teichlab.errors import DomainError, InvalidInputError, PoleError
from teichlab.spherical import phi
from teichlab.transforms import (
    MeasureOnInterval,
    SpectralAtoms,
    atom_mass,
    b_delta,
    cauchy_transform,
    extended_F,
    laplace_numeric,
    resolvent_S,
    residue_contour,
    spectral_projection,
    spectral_radius_via_iterates,
)

C04 = 1.995374262453490047164291   # frozen c(s) oracle values
C06 = 1.449724260959791115029348
C08 = 1.171091986162465311402937


def test_laplace_constant():
    val, err = laplace_numeric(lambda t: np.ones_like(t), 1.0)
    assert val == pytest.approx(1.0, abs=1e-10)
    assert err < 1e-8


def test_laplace_exponential_closed_form():
    for a in (0.2, 1.0, 3.0):
        for z in (0.5, 1.0 + 0.7j, 2.0):
            val, _ = laplace_numeric(lambda t, a=a: np.exp(-a * t), z)
            assert abs(val - 1.0 / (complex(z) + a)) <= 1e-10


def test_laplace_linearity():
    f = lambda t: np.exp(-0.5 * t)
    g = lambda t: np.cos(t) * np.exp(-0.1 * t)
    z = 1.2
    v1, _ = laplace_numeric(f, z)
    v2, _ = laplace_numeric(g, z)
    v3, _ = laplace_numeric(lambda t: 2.0 * f(t) - 3.0 * g(t), z)
    assert abs(v3 - (2.0 * v1 - 3.0 * v2)) <= 1e-9


def test_laplace_sampled_input():
    ts = np.linspace(0.0, 60.0, 6001)
    val, _ = laplace_numeric((ts, np.exp(-ts)), 1.0)
    assert val == pytest.approx(0.5, abs=1e-5)  # limited by linear interpolation


def test_laplace_domain():
    with pytest.raises(DomainError):
        laplace_numeric(lambda t: np.ones_like(t), 0.01)


def test_b_delta_empty():
    assert b_delta(SpectralAtoms.of(), 1.0, 0.1) == 0.0


def test_b_delta_two_atom_hand_value():
    atoms = SpectralAtoms.of((0.4, 0.5), (0.8, 1.0))
    got = b_delta(atoms, 1.0, 0.1)
    expected = C04 * 0.5 / 1.6 + C08 * 1.0 / 1.2
    assert got.real == pytest.approx(expected, rel=1e-12)
    assert got.imag == 0.0


def test_b_delta_pole_error():
    atoms = SpectralAtoms.of((0.6, 1.0))
    with pytest.raises(PoleError):
        b_delta(atoms, -0.4, 0.1)


def test_b_delta_respects_cut():
    atoms = SpectralAtoms.of((0.05, 2.0), (0.6, 1.0))
    got = b_delta(atoms, 1.0, 0.1)  # the 0.05 atom is below delta
    assert got.real == pytest.approx(C06 / 1.4, rel=1e-12)


def test_atoms_validation():
    with pytest.raises(InvalidInputError):
        SpectralAtoms.of((0.8, 1.0), (0.4, 1.0))
    with pytest.raises(InvalidInputError):
        SpectralAtoms.of((1.2, 1.0))
    with pytest.raises(InvalidInputError):
        SpectralAtoms.of((0.5, -1.0))


def test_extended_F_trivial_atom_exact():
    atoms = SpectralAtoms.of((1.0, 1.0))
    for z in (0.3, 1.0, 2.0 + 1.0j):
        got = extended_F(atoms, z, 0.2)
        assert abs(got - 1.0 / complex(z)) <= 1e-12


def test_extended_F_matches_laplace_on_right_half_plane():
    atoms = SpectralAtoms.of((0.4, 0.5), (0.8, 1.0))

    def corr(t):
        t = np.atleast_1d(t)
        return np.array([0.5 * phi(0.4, ti) + 1.0 * phi(0.8, ti) for ti in t])

    for z in (0.5, 0.5 + 1.0j, 0.5 - 2.0j):
        direct, _ = laplace_numeric(corr, z, bound=2.0)
        ext = extended_F(atoms, z, 0.1)
        assert abs(direct - ext) <= 1e-8


def test_extended_F_single_atom_cross_module():
    atoms = SpectralAtoms.of((0.8, 1.0))

    def corr(t):
        t = np.atleast_1d(t)
        return np.array([phi(0.8, ti) for ti in t])

    direct, _ = laplace_numeric(corr, 0.5)
    ext = extended_F(atoms, 0.5, 0.1)
    assert abs(direct - ext) <= 1e-8


def test_extended_F_extends_past_axis():
    val = extended_F(SpectralAtoms.of((0.6, 1.0)), -0.2, 0.2)
    assert np.isfinite(val.real) and np.isfinite(val.imag)


def test_extended_F_against_termwise_series_oracle():
    # Frozen references from an independent route: termwise integration
    # of the two-branch series, summed to N = 9000 in 35-digit arithmetic
    # (themselves good to ~2e-9 from the polynomial coefficient tail).
    atoms = SpectralAtoms.of((0.4, 0.5), (0.8, 1.0))
    refs = {
        0.5 + 0.0j: 2.22019422040561506567 + 0.0j,
        -0.1 + 0.3j: 2.14052575202605464761 - 4.281249068060964060175j,
        0.25 - 1.0j: 0.6254135083378348959612 + 1.369565106318720987044j,
    }
    for z, ref in refs.items():
        assert abs(extended_F(atoms, z, 0.1) - ref) <= 5e-8


def test_extended_F_holomorphy_probe():
    # Discrete Cauchy-Riemann residual away from the pole at -0.4.
    atoms = SpectralAtoms.of((0.6, 1.0))
    h = 1e-4
    for z in (-0.2 + 0.3j, 0.1 - 0.2j, -0.5 + 0.6j):
        fx = (extended_F(atoms, z + h, 0.2) - extended_F(atoms, z - h, 0.2)) / (2 * h)
        fy = (extended_F(atoms, z + 1j * h, 0.2) - extended_F(atoms, z - 1j * h, 0.2)) / (2 * h)
        assert abs(fx + 1j * fy) / 2.0 <= 1e-6


def test_residue_simple_pole():
    val, err = residue_contour(lambda z: 1.0 / (z - 0.7), 0.7, 0.2)
    assert abs(val - 1.0) <= 1e-12
    assert err <= 1e-10


def test_residue_entire_function():
    val, _ = residue_contour(lambda z: np.exp(z) * z**3, 0.3, 0.5)
    assert abs(val) <= 1e-12


def test_residue_of_extended_F_reproduces_c():
    atoms = SpectralAtoms.of((0.6, 1.0))
    val, _ = residue_contour(lambda z: extended_F(atoms, z, 0.2), -0.4, 0.08,
                             n_nodes=16)
    assert abs(val - C06) <= 1e-6
    # Residue at a non-pole point vanishes.
    val0, _ = residue_contour(lambda z: extended_F(atoms, z, 0.2), -0.1, 0.05,
                              n_nodes=16)
    assert abs(val0) <= 1e-10


def test_resolvent_diagonal_hand_value():
    L = np.diag([-1.0, -2.0])
    M = np.linalg.inv(0.4 * np.eye(2) - L)
    S = resolvent_S(M, 0.4, 0.1)
    assert np.abs(S - np.diag([1.0 / 1.1, 1.0 / 2.1])).max() <= 1e-12


def test_resolvent_identity_random():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((5, 5))
    L = A - 6.0 * np.eye(5)  # spectrum pushed into Re < 0
    z0 = 0.4
    M = np.linalg.inv(z0 * np.eye(5) - L)
    for z in np.linspace(-0.5, 1.5, 20) + 0.3j:
        S = resolvent_S(M, z0, z)
        R = np.linalg.inv(z * np.eye(5) - L)
        assert np.linalg.norm(S - R, 2) <= 1e-10


def test_resolvent_continuity_at_z0():
    rng = np.random.default_rng(3)
    M = rng.standard_normal((4, 4)) * 0.2
    S = resolvent_S(M, 0.5, 0.5)
    assert np.abs(S - M).max() <= 1e-12
    S2 = resolvent_S(M, 0.5, 0.5 + 1e-9)
    assert np.abs(S2 - M).max() <= 1e-7


def test_resolvent_pole_error():
    M = np.diag([2.0, 3.0])
    with pytest.raises(PoleError):
        resolvent_S(M, 1.0, 1.0 - 0.5)  # 1/(z0-z) = 2 is an eigenvalue


def test_projection_diagonal():
    L = np.diag([1.0, 2.0, 3.0])
    P = spectral_projection(L, 2.0, 0.3)
    assert np.abs(P - np.diag([0.0, 1.0, 0.0])).max() <= 1e-10


def test_projection_jordan_block():
    L = np.array([[2.0, 1.0], [0.0, 2.0]])
    P = spectral_projection(L, 2.0, 0.5)
    assert np.abs(P - np.eye(2)).max() <= 1e-10
    assert round(np.trace(P).real) == 2


def test_projection_properties_random():
    rng = np.random.default_rng(5)
    L = rng.standard_normal((5, 5))
    eigs = np.linalg.eigvals(L)
    target = eigs[np.argmax(eigs.real)]
    radius = 0.25 * min(abs(e - target) for e in eigs if abs(e - target) > 1e-8)
    P = spectral_projection(L, target, radius)
    assert np.linalg.norm(P @ P - P, 2) <= 1e-8
    assert np.linalg.norm(P @ L - L @ P, 2) <= 1e-8
    assert round(np.trace(P).real) == 1


def test_projection_sum_is_identity():
    rng = np.random.default_rng(17)
    D = np.diag([0.5, -0.3, 1.2, 2.0, -1.0])
    Q = rng.standard_normal((5, 5))
    L = Q @ D @ np.linalg.inv(Q)
    total = sum(spectral_projection(L, lam, 0.15) for lam in np.diag(D))
    assert np.linalg.norm(total - np.eye(5), 2) <= 1e-8


def test_projection_residue_of_S_cross_check():
    # Residue of z -> S(z) at z0 - 1/lam_i equals the eigenprojection.
    rng = np.random.default_rng(23)
    D = np.diag([-0.5, -1.5, -2.5, -3.0, -4.0])
    Q = rng.standard_normal((5, 5))
    Qi = np.linalg.inv(Q)
    L = Q @ D @ Qi
    z0 = 0.4
    M = np.linalg.inv(z0 * np.eye(5) - L)
    for i, ell in enumerate(np.diag(D)):
        # S(z) = (zI - L)^{-1}; its residue at z = ell is the projection.
        def entry(z):
            return resolvent_S(M, z0, z)

        n = 64
        theta = np.arange(n) * (2 * np.pi / n)
        zs = ell + 0.2 * np.exp(1j * theta)
        acc = sum(entry(z) * 0.2 * np.exp(1j * th) for z, th in zip(zs, theta)) / n
        ei = np.zeros(5)
        ei[i] = 1.0
        P_exact = Q @ np.diag(ei) @ Qi
        assert np.abs(acc - P_exact).max() <= 1e-8


def test_projection_contour_hits_eigenvalue():
    with pytest.raises(InvalidInputError):
        spectral_projection(np.diag([1.0, 2.0]), 1.5, 0.5)


def test_spectral_radius_diagonal():
    est = spectral_radius_via_iterates(np.diag([0.5, 0.2]), 60)
    assert 0.5 <= est <= np.linalg.norm(np.diag([0.5, 0.2]), 2) + 1e-12
    assert est == pytest.approx(0.5, abs=1e-6)


def test_spectral_radius_rotation():
    k = np.array([[math.cos(0.3), math.sin(0.3)], [-math.sin(0.3), math.cos(0.3)]])
    assert spectral_radius_via_iterates(k, 50) == pytest.approx(1.0, abs=1e-6)


def test_spectral_radius_triangular():
    # Random strict upper part; dominant diagonal entry separated so the
    # n_max = 200 iterate bound resolves it to 1e-3 (eigenvalue oracle).
    rng = np.random.default_rng(29)
    d = rng.uniform(0.3, 1.5, 6)
    d[0] = 2.0
    L = np.triu(0.05 * rng.standard_normal((6, 6)), k=1) + np.diag(d)
    est = spectral_radius_via_iterates(L, 200)
    target = np.abs(np.diag(L)).max()
    assert est >= target - 1e-6
    assert est == pytest.approx(target, abs=1e-3)


def test_cauchy_atom():
    nu = MeasureOnInterval(atoms=((0.5, 1.0),))
    assert cauchy_transform(nu, 0.5) == pytest.approx(1.0)


def test_cauchy_lebesgue_log():
    nu = MeasureOnInterval(density=((0.0, 1.0, 1.0),))
    for z in (0.5, 1.0, 3.0):
        got = cauchy_transform(nu, z)
        assert got.real == pytest.approx(math.log((z + 1.0) / z), abs=1e-14)
        assert got.imag == 0.0


def test_cauchy_linearity():
    nu1 = MeasureOnInterval(atoms=((0.3, 0.7),))
    nu2 = MeasureOnInterval(density=((0.2, 0.9, 1.3),))
    mixed = MeasureOnInterval(atoms=((0.3, 0.7),), density=((0.2, 0.9, 1.3),))
    z = 0.4 + 0.2j
    assert abs(cauchy_transform(mixed, z)
               - cauchy_transform(nu1, z) - cauchy_transform(nu2, z)) <= 1e-14


LADDER = 0.1 * 0.5 ** np.arange(10)


def test_atom_mass_pure_atom():
    nu = MeasureOnInterval(atoms=((0.5, 0.7),))
    assert atom_mass(nu, 0.5, LADDER) == pytest.approx(0.7, abs=1e-6)


def test_atom_mass_absolutely_continuous():
    nu = MeasureOnInterval(density=((0.0, 1.0, 1.0),))
    assert abs(atom_mass(nu, 0.5, LADDER)) <= 1e-3


def test_atom_mass_mixed():
    nu = MeasureOnInterval(atoms=((0.5, 0.3),), density=((0.0, 1.0, 1.0),))
    assert atom_mass(nu, 0.5, LADDER) == pytest.approx(0.3, abs=1e-3)
    assert abs(atom_mass(nu, 0.25, LADDER)) <= 1e-3


def test_atom_mass_ladder_validation():
    nu = MeasureOnInterval(atoms=((0.5, 0.3),))
    with pytest.raises(InvalidInputError):
        atom_mass(nu, 0.5, [0.1, 0.2, 0.05])
    with pytest.raises(InvalidInputError):
        atom_mass(nu, 0.5, [0.1, 0.05, 0.03, 0.02])
