import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resonator_lab import resonator as rz
from resonator_lab.errors import DomainError


def test_g_sigma_cutoff_and_real_part():
    spec = rz.GSigmaSpec(100, 0.5)
    assert spec.cutoff == 10
    x = np.linspace(-3, 3, 101)
    assert np.allclose(rz.eval_g_sigma_complex(x, spec).real, rz.eval_g_sigma(x, spec), atol=1e-13)
    assert rz.eval_g_sigma(0.0, spec) == pytest.approx(sum(1 / math.sqrt(n) for n in range(1, 11)))
    with pytest.raises(DomainError):
        rz.GSigmaSpec(1.0, 0.5)
    with pytest.raises(DomainError):
        rz.GSigmaSpec(10, 2.0)


@settings(max_examples=100)
@given(
    st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
    st.integers(min_value=1, max_value=40),
    st.integers(min_value=1, max_value=12),
)
def test_fejer_closed_form_matches_spectral(x, nu, lam):
    a = rz.fejer_kernel(x, nu, lam)
    b = rz.fejer_spectral(x, nu, lam)
    assert abs(a - b) <= 1e-9 * lam
    assert abs(a) <= lam + 1e-9


def test_fejer_peak_and_integer_points():
    assert rz.fejer_kernel(0.0, 5, 9) == pytest.approx(9)
    assert abs(rz.fejer_kernel(1.0, 5, 9)) == pytest.approx(9)
    assert abs(rz.fejer_kernel(1 / 9, 5, 9)) < 1e-12


def test_dirichlet_matches_direct_sum():
    t = np.array([0.0, 1e-6, 0.1, 0.25, 1.0, 2.3])
    direct = sum(rz.e(-n * t) for n in range(1, 8))
    assert np.allclose(rz.dirichlet_g(t, 7), direct, atol=1e-12)


def test_transition_phi():
    phi = rz.TransitionPhi()
    x = np.linspace(0, 3, 3001)
    v = phi(x)
    assert np.all(v[x <= 1] == 0) and np.all(v[x >= 2] == 1)
    assert np.all(np.diff(v) >= 0)
    assert phi(1.5) == pytest.approx(0.5)


def test_F_thconv_matches_direct():
    a = [1, 2 - 1j, 0.5j]
    x = np.linspace(0.5, 3, 40)
    direct = rz.TransitionPhi()(x) * sum(c * rz.e((k + 1) * x) for k, c in enumerate(a))
    assert np.allclose(rz.eval_F_thconv(x, a), direct, atol=1e-13)


def test_sine_series():
    p = rz.GapProfile((1, 3), (2, 1j), 1)
    x = np.array([0.1, 0.37])
    expect = 2 * np.sin(2 * np.pi * x) + 1j * np.sin(6 * np.pi * x)
    assert np.allclose(rz.sine_series_S(x, p), expect)


@pytest.mark.parametrize("u,v", [(1, 2), (0.5, 2.5)])
def test_weight_measure_normalised(u, v):
    w = rz.WeightMeasure(u, v)
    x, wt = rz.composite_gauss(u, v, 300)
    assert np.sum(wt * w.psi(x)) == pytest.approx(1, abs=1e-10)
    assert w.first_moment() == pytest.approx((u + v) / 2, abs=1e-10)  # symmetric bump
    assert np.all(w.psi(np.array([u + 1e-3, v - 1e-3])) < 1e-100)
    assert w.psi(u - 0.1) == 0 and w.psi(v + 0.1) == 0


def test_weight_scaling():
    w = rz.WeightMeasure().scaled(50)
    assert w.support == (50, 100)
    x, wt = rz.composite_gauss(50, 100, 300)
    assert np.sum(wt * w.density(x)) == pytest.approx(1, abs=1e-10)
    with pytest.raises(DomainError):
        rz.WeightMeasure(2, 1)


def test_weight_transform_at_zero():
    assert rz.WeightMeasure().transform(0.0)[0] == pytest.approx(1, abs=1e-10)


@pytest.fixture(scope="module")
def mollifier():
    return rz.MollifierPhi()


def test_mollifier_transform(mollifier):
    assert mollifier.hat(0.0) == pytest.approx(1, abs=1e-8)
    xi = np.linspace(0, 139, 777) + 0.0013
    assert np.max(np.abs(mollifier.hat(xi) - mollifier.hat_direct(xi))) < 1e-9
    assert np.allclose(mollifier.hat(-xi), mollifier.hat(xi))


def test_mollifier_decay(mollifier):
    # fit c_k on [1, 20], then require the bound to hold out to 140
    fit = np.linspace(1, 20, 2000)
    far = np.linspace(20, 140, 5000)
    for k in (2, 4):
        ck = np.max(np.abs(mollifier.hat_direct(fit)) * fit**k)
        bound = np.minimum(1.01, ck * far ** (-k))
        assert np.all(np.abs(mollifier.hat_direct(far)) <= bound), k
    assert mollifier.negligible_beyond(1e-12) < 100


def test_csc_bound():
    ok, slack = rz.csc_bound_check(10_000)
    assert ok
    assert slack == pytest.approx(0.00528, abs=1e-5)


def test_gap_profile_validation():
    p = rz.GapProfile((1, 10, 25), (1, 1, 1), 2)
    assert p.gap == 9 and p.nu_n == 10
    with pytest.raises(DomainError):
        rz.GapProfile((1, 1), (1, 1), 1)
    with pytest.raises(DomainError):
        rz.GapProfile((1, 2), (1, 0), 1)
    with pytest.raises(DomainError):
        rz.GapProfile((1, 2, 3), (1, 1, 1), 1).require_interior()
