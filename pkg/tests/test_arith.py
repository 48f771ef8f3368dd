import itertools
import math
import struct
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import zeta

from resonator_lab import arith
from resonator_lab.errors import (
    ConfigError,
    DomainError,
    ResourceError,
    TableRangeError,
)
from resonator_lab.experiments.mconv import mobius
from resonator_lab.lattice import direct_norm_histograms


def test_r3_first_values(small_tables):
    assert small_tables.r3[:11].tolist() == [1, 6, 12, 8, 6, 24, 24, 0, 12, 30, 24]


def test_r3_fft_matches_exact_slice_sum():
    t = arith.build_tables(20_000)
    assert np.array_equal(t.r3, arith.r3_direct(20_000))


def test_r3_matches_point_enumeration():
    all_h, _ = direct_norm_histograms(3000)
    t = arith.build_tables(3000)
    assert np.array_equal(t.r3, all_h)


def test_r3_vanishes_on_legendre_exceptions(small_tables):
    # n = 4^a (8b + 7) is never a sum of three squares
    n = np.arange(small_tables.limit + 1)
    m = n.copy()
    m[0] = 1
    while True:
        div = (m % 4 == 0)
        if not div.any():
            break
        m[div] //= 4
    excluded = (m % 8 == 7) & (n > 0)
    assert np.array_equal(small_tables.r3 == 0, excluded)


def test_mobius_matches_trial_division(small_tables):
    assert [int(small_tables.mu[n]) for n in range(1, 3000)] == [mobius(n) for n in range(1, 3000)]


def test_spf_and_primes(small_tables):
    assert small_tables.primes(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert small_tables.spf[91] == 7


@given(st.integers(min_value=1, max_value=200_000))
def test_factor_reconstructs(small_tables, n):
    t = small_tables
    f = t.factor(n)
    assert math.prod(p**e for p, e in f.items()) == n
    assert all(t.spf[p] == p for p in f)


@given(st.integers(min_value=1, max_value=200_000))
def test_squarefree_decomposition(small_tables, n):
    t = small_tables
    d = arith.squarefree_decompose(n, t)
    assert d.s * d.s * d.m == n
    assert t.mu[d.m] != 0


def test_table_errors(small_tables):
    with pytest.raises(DomainError):
        arith.build_tables(1)
    with pytest.raises(ResourceError):
        arith.build_tables(10**6, memory_budget=10**6)
    with pytest.raises(TableRangeError):
        small_tables.check(small_tables.limit + 1)
    with pytest.raises(IndexError):  # TableRangeError is also an IndexError
        small_tables.check(10**9)


def test_tables_are_read_only(small_tables):
    with pytest.raises(ValueError):
        small_tables.r3[0] = 2


# ----------------------------------------------------------- square roots


def test_sqrt_combination_examples():
    assert arith.sqrt_combination_is_zero([(1, 2), (1, 18), (-1, 8), (-1, 8)])
    assert not arith.sqrt_combination_is_zero([(1, 1), (1, 2), (-1, 3), (-1, 4)])
    assert arith.sqrt_combination_is_zero([(1, 12), (-1, 3), (-1, 3)])
    with pytest.raises(DomainError):
        arith.sqrt_combination_is_zero([(2, 4)])


def test_sqrt_combinations_all_sign_patterns_no_dead_zone():
    r = np.arange(1, 31)
    tup = np.stack(np.meshgrid(r, r, r, r, indexing="ij"), axis=-1).reshape(-1, 4)
    roots = np.sqrt(tup)
    dead = 0
    for signs in itertools.product((1, -1), repeat=4):
        signs = np.array(signs)
        exact = arith.sqrt_combinations_are_zero(signs, tup)
        L = np.abs(roots @ signs)
        dead += int(np.sum((L >= 1e-9) & (L < 1e-6)))
        assert np.array_equal(exact, L < 1e-9), signs
    assert dead == 0


@settings(max_examples=200)
@given(st.lists(st.tuples(st.sampled_from((1, -1)), st.integers(1, 500)), min_size=1, max_size=6))
def test_sqrt_scalar_matches_vectorised(terms):
    signs = np.array([s for s, _ in terms])
    tup = np.array([[n for _, n in terms]])
    assert arith.sqrt_combination_is_zero(terms) == bool(arith.sqrt_combinations_are_zero(signs, tup)[0])


# ----------------------------------------------------------- v(d)


def test_v_values(small_tables):
    assert [arith.v_formula(d, small_tables) for d in (1, 2, 3, 5, 6, 7)] == [1, 8, 99, 725, 792, 2695]
    assert arith.v_bruteforce(5) == 725


def test_v_formula_matches_bruteforce(small_tables):
    for d in range(1, 16):
        if small_tables.mu[d]:
            assert arith.v_formula(d, small_tables) == arith.v_bruteforce(d)


def test_v_gauss_route():
    for p in (3, 5, 7, 11):
        assert arith.gauss_sum_v(p) == pytest.approx(arith.v_prime(p), rel=1e-9)


def test_v_errors(small_tables):
    with pytest.raises(DomainError):
        arith.v_formula(12, small_tables)
    with pytest.raises(ResourceError):
        arith.v_bruteforce(21)
    with pytest.raises(DomainError):
        arith.gauss_sum_v(9)


def test_r3_scaled_matches_table(small_tables):
    m = np.arange(1, 200)
    for d in range(1, 30):
        if small_tables.mu[d] and 199 * d * d <= small_tables.limit:
            assert np.array_equal(arith.r3_scaled(m, d, small_tables), small_tables.r3[m * d * d]), d


# ----------------------------------------------------------- constants


def test_zeta3_against_scipy():
    value, bound = arith.zeta3(10**5)
    assert abs(value - zeta(3)) <= bound + 1e-15


def test_C0_exact_small_product():
    assert arith.euler_product_C0_exact(3) == Fraction(7, 8) * (1 - Fraction(11, 81))
    assert float(arith.euler_product_C0_exact(3)) == pytest.approx(0.7561728395, abs=1e-10)


def test_C0_float_matches_exact_product(small_tables):
    value, _ = arith.euler_product_C0(200, small_tables)
    assert value == pytest.approx(float(arith.euler_product_C0_exact(200)), rel=1e-13)


def test_C0_routes_agree(small_tables):
    a, ta = arith.euler_product_C0(200_000, small_tables)
    b, tb = arith.C0_series(100_000, small_tables)
    assert abs(a - b) <= ta + tb
    assert a == pytest.approx(0.68205, abs=1e-5)


def test_multiplicative_ratio_is_multiplicative(small_tables):
    w = arith.multiplicative_ratio(1000, small_tables)
    for a, b in [(3, 5), (2, 7), (6, 35), (11, 13)]:
        assert w[a * b] == pytest.approx(w[a] * w[b], rel=1e-14)
    assert w[4] == 0


# ----------------------------------------------------------- sieve cache


def test_sieve_cache_format(tmp_path):
    t = arith.build_tables(500)
    path = tmp_path / "s.bin"
    arith.save_tables(t, path)
    raw = path.read_bytes()
    assert raw[:5] == b"RLAB1"
    assert struct.unpack("<Q", raw[5:13])[0] == 500
    assert np.frombuffer(raw, dtype="i1", count=501, offset=13).tolist() == t.mu.tolist()
    u = arith.load_tables(path)
    assert np.array_equal(u.r3, t.r3) and np.array_equal(u.spf, t.spf)


def test_sieve_cache_reuse_and_rejection(tmp_path, monkeypatch):
    monkeypatch.setenv("RESONATOR_LAB_SIEVE_DIR", str(tmp_path))
    big = arith.cached_tables(2000)
    assert (tmp_path / "sieve_2000.bin").exists()
    assert arith.cached_tables(1000).limit == 2000
    assert np.array_equal(arith.cached_tables(1500).r3, big.r3)
    (tmp_path / "bad.bin").write_bytes(b"XXXXX")
    with pytest.raises(ConfigError):
        arith.load_tables(tmp_path / "bad.bin")
