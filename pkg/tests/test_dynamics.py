import math

import numpy as np
import pytest

from teichlab.dynamics import (
    SystoleBump,
    correlation_mc,
    horocycle_vdelta_average,
    log_slope,
    recurrence_profile,
    sample_fundamental_domain,
    sample_modular_surface,
)
from teichlab.errors import DomainError, InvalidInputError
from teichlab.lattice import shortest_vector
from teichlab.origami import build_origami


def torus(deformation=None):
    return build_origami((0,), (0,), deformation)


def l_origami():
    return build_origami((1, 0, 2), (2, 1, 0))


def test_average_at_t0_unit_torus_is_one():
    # Lattice oracle: h_r Z^2 keeps (1, 0), so sys == 1 and V == 1 on [0, 1].
    for r in np.linspace(0.0, 1.0, 17):
        hr = np.array([[1.0, r], [0.0, 1.0]])
        assert shortest_vector(hr)[0] == pytest.approx(1.0, abs=1e-12)
    avg = horocycle_vdelta_average(torus(), 0.0, 0.1)
    assert avg == pytest.approx(1.0, abs=1e-10)


def test_average_lower_bound():
    for t in (0.0, 1.0, 3.0):
        assert horocycle_vdelta_average(torus(), t, 0.1) >= 1.0 - 1e-12


def test_average_batch_matches_slow_path():
    # The all-marked fast path must agree with per-node origami systoles.
    from teichlab.dynamics import _vdelta_on_nodes
    from teichlab.origami import apply_element, v_delta

    x = l_origami()
    rs = np.linspace(0.0, 1.0, 9)
    t, delta = 1.5, 0.1
    fast = _vdelta_on_nodes(x, t, delta, rs)
    gt = np.diag([math.exp(t), math.exp(-t)])
    slow = [v_delta(apply_element(x, gt @ np.array([[1.0, r], [0.0, 1.0]])), delta)
            for r in rs]
    assert np.allclose(fast, slow, rtol=1e-12)


def test_average_validation():
    with pytest.raises(DomainError):
        horocycle_vdelta_average(torus(), -1.0, 0.1)
    with pytest.raises(DomainError):
        horocycle_vdelta_average(torus(), 1.0, 0.5)
    with pytest.raises(InvalidInputError):
        horocycle_vdelta_average(torus(), 1.0, 0.1, n_nodes=4)


def test_recurrence_profile_singleton():
    prof = recurrence_profile(torus(), 0.1, [0.0])
    assert prof.c1 >= prof.avg[0] / (prof.v_delta_start + 1.0) - 1e-12
    assert prof.c1 == prof.c2
    assert not any(prof.failed)


def test_recurrence_profile_torus():
    grid = np.arange(0.0, 4.5, 0.5)
    prof = recurrence_profile(torus(), 0.1, grid, n_nodes=32)
    assert math.isfinite(prof.c1)
    assert all(a >= 1.0 - 1e-12 for a in prof.avg)
    # Envelope holds by construction of the max-ratio fit.
    for t, a in zip(prof.t, prof.avg):
        assert a <= prof.envelope(t) * (1.0 + 1e-12)
    assert prof.avg[-1] <= prof.avg[0] + prof.c1


def test_recurrence_profile_l_origami():
    grid = np.arange(0.0, 3.5, 0.5)
    prof = recurrence_profile(l_origami(), 0.1, grid, n_nodes=32)
    assert math.isfinite(prof.c1)
    assert not any(prof.failed)


def test_fundamental_domain_membership_and_mass():
    x, y = sample_fundamental_domain(200_000, seed=7)
    assert np.all(np.abs(x) <= 0.5)
    assert np.all(x * x + y * y >= 1.0 - 1e-12)
    # mass of {y > 2} relative to the domain: (1/2) / (pi/3)
    p_hat = float(np.mean(y > 2.0))
    p = 0.5 / (math.pi / 3.0)
    se = math.sqrt(p * (1.0 - p) / x.size)
    assert abs(p_hat - p) <= 3.0 * se


def test_fundamental_domain_inverse_height_moment():
    # E[1/y] = (integral of y^-3 over the domain) / (pi/3) = 3 ln 3 / (2 pi).
    x, y = sample_fundamental_domain(200_000, seed=21)
    m_hat = float(np.mean(1.0 / y))
    m = 3.0 * math.log(3.0) / (2.0 * math.pi)
    se = float(np.std(1.0 / y) / math.sqrt(y.size))
    assert abs(m_hat - m) <= 4.0 * se


def test_sample_determinism_and_det():
    a = sample_modular_surface(512, seed=123)
    b = sample_modular_surface(512, seed=123)
    assert np.array_equal(a, b)
    c = sample_modular_surface(512, seed=124)
    assert not np.array_equal(a, c)
    dets = np.linalg.det(a)
    assert np.abs(dets - 1.0).max() <= 1e-12


def test_bump_shape():
    f = SystoleBump(0.8, 1.0)
    assert f(np.array([0.9]))[0] == pytest.approx(1.0)
    assert f(np.array([0.79, 1.01, 0.5])).max() == 0.0
    assert np.all(f(np.linspace(0.81, 0.99, 21)) > 0.0)
    with pytest.raises(InvalidInputError):
        SystoleBump(1.0, 0.5)


def test_correlation_t0_is_variance():
    N = 20_000
    series = correlation_mc((0.8, 1.0), [0.0], N, seed=11)
    lat = sample_modular_surface(N, seed=11)
    from teichlab.lattice import shortest_vector_batch

    a = SystoleBump(0.8, 1.0)(shortest_vector_batch(lat))
    assert series.estimate[0] == pytest.approx(float(np.var(a)), abs=1e-12)
    assert series.estimate[0] > 0.0
    assert series.stderr[0] > 0.0


def test_correlation_constant_observable_vanishes():
    series = correlation_mc(lambda s: np.full_like(s, 0.7), [0.0, 1.0, 2.0],
                            5_000, seed=3)
    assert max(abs(e) for e in series.estimate) <= 1e-12


def test_correlation_decays():
    # The signal drops well below e^{-t} scaling on [0, 1] and reaches the
    # Monte Carlo noise floor by t ~ 1.5; assert the strong-signal part.
    series = correlation_mc((0.8, 1.0), [0.0, 0.5, 1.0], 200_000, seed=42)
    assert series.estimate[0] > series.estimate[1] > series.estimate[2] > 0.0
    assert series.estimate[2] > 5.0 * series.stderr[2]
    slope = log_slope(series, 0.0, 1.0)
    assert slope < -0.5


def test_correlation_determinism():
    s1 = correlation_mc((0.8, 1.0), [1.0], 10_000, seed=5)
    s2 = correlation_mc((0.8, 1.0), [1.0], 10_000, seed=5)
    assert s1 == s2
