import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from resonator_lab import lattice
from resonator_lab.errors import AccuracyError, DomainError
from resonator_lab.quad import (
    QuadraturePolicy,
    event_edges,
    integrate_panels,
    integrate_weighted,
    integrate_with_events,
    pairwise_sum,
)
from resonator_lab.resonator import WeightMeasure


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=300))
def test_pairwise_sum_accuracy(xs):
    assert pairwise_sum(np.array(xs)) == pytest.approx(math.fsum(xs), abs=1e-6)


def test_policy_validation_and_panels():
    with pytest.raises(DomainError):
        QuadraturePolicy(panels_per_period=3)
    pol = QuadraturePolicy().with_frequency(100)
    assert pol.panel_count(2.0) == 800
    assert QuadraturePolicy().panel_count(1.0) == 64


def test_moments_of_the_measure():
    m = WeightMeasure().scaled(40)
    assert float(integrate_weighted(lambda t: np.ones_like(t), m)) == pytest.approx(1, abs=1e-10)
    assert float(integrate_weighted(lambda t: t, m)) == pytest.approx(60, rel=1e-10)


def test_oscillatory_integral_against_transform():
    # int e(-xi t) psi(t) dt is the weight transform
    m = WeightMeasure()
    pol = QuadraturePolicy().with_frequency(4)
    val = integrate_weighted(lambda t: np.exp(-2j * np.pi * 4 * t), m, pol)
    assert abs(val.value - m.transform(4.0)[0]) < 1e-12


def test_accuracy_error_carries_best_estimate():
    edges = np.linspace(0, 1, 5)
    pol = QuadraturePolicy(max_refinements=1, absolute_tolerance=1e-30, relative_tolerance=0)
    with pytest.raises(AccuracyError) as info:
        integrate_panels(edges, lambda t, _: np.sqrt(np.abs(t - 0.3)), pol)
    assert info.value.best == pytest.approx(0.3**1.5 / 1.5 + 0.7**1.5 / 1.5, abs=1e-3)
    assert info.value.error_estimate > 0


def test_threads_do_not_change_bits():
    edges = np.linspace(0, 50, 20_001)
    f = lambda t, _: np.cos(7.3 * t) * np.exp(-0.01 * t)  # noqa: E731
    a = integrate_panels(edges, f, QuadraturePolicy(threads=1, chunk_panels=1000))
    b = integrate_panels(edges, f, QuadraturePolicy(threads=8, chunk_panels=1000))
    assert a == b


def test_event_edges_split_at_radii():
    m = WeightMeasure().scaled(1)
    edges = event_edges(np.array([0.5, 1.2345, 3.0]), m, QuadraturePolicy())
    assert 1.2345 in edges and edges[0] == 1 and edges[-1] == 2
    assert np.all(np.diff(edges) > 0)


def test_constant_series_integrates_exactly():
    m = WeightMeasure().scaled(3)
    s = lattice.ErrorTermSeries.constant(-2.25, 3, 6)
    assert float(integrate_with_events(s, m)) == pytest.approx(-2.25, abs=1e-12)


def _segmentwise_quadpack(series, m, f):
    # independent oracle: adaptive QUADPACK on each stretch between jumps
    a, b = m.support
    cuts = np.concatenate([[a], series.radii[(series.radii > a) & (series.radii < b)], [b]])
    parts = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        level = float(series.nstar((lo + hi) / 2))
        g = lambda t: f(level - series.main_coeff * t**3) * float(m.density(t))  # noqa: E731
        parts.append(quad(g, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)[0])
    return math.fsum(parts)


@pytest.mark.parametrize("R", [5.0, 12.0])
def test_step_function_against_quadpack(small_tables, R):
    m = WeightMeasure().scaled(R)
    s = lattice.build_error_series(R, 2 * R, small_tables)
    val = float(integrate_with_events(s, m))
    assert val == pytest.approx(_segmentwise_quadpack(s, m, lambda x: x), rel=1e-9, abs=1e-10)


def test_power_moment_against_quadpack(small_tables):
    m = WeightMeasure().scaled(12)
    s = lattice.build_error_series(12, 24, small_tables)
    val = float(integrate_with_events(s, m, transform=lambda x: np.abs(x) ** 1.5))
    assert val == pytest.approx(_segmentwise_quadpack(s, m, lambda x: abs(x) ** 1.5), rel=1e-9)


def test_series_must_cover_support(small_tables):
    s = lattice.build_error_series(5, 8, small_tables)
    with pytest.raises(DomainError):
        integrate_with_events(s, WeightMeasure().scaled(5))
