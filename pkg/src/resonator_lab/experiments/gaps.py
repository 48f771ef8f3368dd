"""Oscillation of lacunary sine sums, certified with the shifted Fejer resonator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..arith import _spf_sieve
from ..errors import DomainError, PropertyFailure, SearchFailure
from ..quad import QuadraturePolicy, integrate_panels
from ..resonator import GapProfile, fejer_resonator, sine_series_S


def gaps_bound(profile_or_gap, alpha: float) -> float:
    """B_{n,alpha} = pi^(alpha-1) (1-alpha^2) L / (L^(1-alpha) - 5^-(1-alpha)).

    At alpha = 1 the limit 2L / log(5L) is returned. Accepts a
    :class:`GapProfile` or the integer gap L itself.
    """
    lam = profile_or_gap.gap if isinstance(profile_or_gap, GapProfile) else int(profile_or_gap)
    if lam < 1:
        raise DomainError(f"gap must be >= 1, got {lam}")
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 1:
        return 2 * lam / math.log(5 * lam)
    b = 1 - alpha
    # expm1 keeps the denominator accurate as alpha -> 1
    denom = math.exp(-b * math.log(5)) * math.expm1(b * math.log(5 * lam))
    return math.pi ** (alpha - 1) * (1 - alpha * alpha) * lam / denom


def _fejer_integral(profile: GapProfile, policy: QuadraturePolicy | None) -> complex:
    profile.require_interior()
    freq = max(profile.nu) + profile.nu_n + profile.gap
    policy = (policy or QuadraturePolicy(absolute_tolerance=1e-12)).with_frequency(freq)
    edges = np.linspace(-0.5, 0.5, policy.panel_count(1.0) + 1)
    res = integrate_panels(
        edges, lambda t, _: sine_series_S(t, profile) * fejer_resonator(t, profile), policy
    )
    return complex(res.value)


def fejer_correlation_raw(profile: GapProfile, policy: QuadraturePolicy | None = None) -> complex:
    """int_{-1/2}^{1/2} S(t) g(t) dt with g the shifted Fejer kernel; equals a_n / (2i)."""
    return _fejer_integral(profile, policy)


def gaps_correlation(profile: GapProfile, policy: QuadraturePolicy | None = None) -> complex:
    """int S(t) (i g(t)) dt, which equals a_n / 2.

    sin(2 pi nu t) carries e(nu t) with coefficient 1/(2i), so the resonator
    is paired with the unimodular factor i; |g| and every bound built on it
    are unchanged.
    """
    return 1j * _fejer_integral(profile, policy)


@dataclass(frozen=True)
class Witness:
    x: float
    margin: float
    positive_fraction: float


def gaps_witness(profile: GapProfile, alpha: float, grid: int = 10_000) -> Witness:
    """Point x in [-1/2, 1/2] where |S(x)| > B |a_n| |x|^alpha / 4.

    Grid search followed by a bounded golden-section refinement around the
    best grid point; ``positive_fraction`` is the share of grid points with
    positive margin, a crude measure estimate.
    """
    profile.require_interior()
    thresh = gaps_bound(profile, alpha) * abs(profile.a_n) / 4

    def margin(x):
        return np.abs(sine_series_S(x, profile)) - thresh * np.abs(x) ** alpha

    xs = np.linspace(-0.5, 0.5, grid + 1)
    vals = margin(xs)
    i = int(np.argmax(vals))
    h = xs[1] - xs[0]
    lo, hi = max(-0.5, xs[i] - h), min(0.5, xs[i] + h)
    res = minimize_scalar(lambda x: -float(margin(x)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    x, m = (float(res.x), -float(res.fun)) if -res.fun >= vals[i] else (float(xs[i]), float(vals[i]))
    if not m > 0:
        raise SearchFailure(
            f"no x with |S(x)| > B|a_n||x|^alpha/4 found for alpha={alpha}; best margin {m:.3g}"
        )
    return Witness(x, m, float(np.mean(vals > 0)))


def f_alpha(alpha):
    """2^-alpha + 0.3 (alpha - 1) - (pi/5)^(1-alpha) / (1 + alpha)."""
    alpha = np.asarray(alpha, dtype=float)
    return 2.0**-alpha + 0.3 * (alpha - 1) - (math.pi / 5) ** (1 - alpha) / (1 + alpha)


@dataclass(frozen=True)
class MonotonicityReport:
    grid_size: int
    f0: float
    f1: float
    min_decrease: float
    decreasing: bool


def f_alpha_monotonicity(grid_size: int = 10_000) -> MonotonicityReport:
    if grid_size < 1000:
        raise DomainError(f"grid_size must be >= 1000, got {grid_size}")
    a = np.linspace(0.0, 1.0, grid_size)
    f = f_alpha(a)
    steps = f[:-1] - f[1:]
    rep = MonotonicityReport(grid_size, float(f[0]), float(f[-1]), float(steps.min()),
                             bool(np.all(steps > 0)))
    if not rep.decreasing:
        raise PropertyFailure(
            f"f(alpha) is not decreasing on [0,1]: min step {rep.min_decrease:.3g}"
        )
    return rep


def random_profiles(count: int = 50, max_len: int = 6, max_nu: int = 100, seed: int = 0):
    """Deterministic random profiles with 3 <= N <= max_len and an interior index."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        N = int(rng.integers(3, max_len + 1))
        nu = np.sort(rng.choice(np.arange(1, max_nu + 1), size=N, replace=False))
        a = rng.normal(size=N) + 1j * rng.normal(size=N)
        n = int(rng.integers(2, N))
        out.append(GapProfile(tuple(int(v) for v in nu), tuple(a), n))
    return out


def cube_prime_gaps(count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Primes p_n, gaps of nu_n = p_n^3 and B_{n,1}, for 2 <= n < count.

    Every gap is at least p_n^2.
    """
    if count < 3:
        raise DomainError(f"need at least 3 primes, got {count}")
    # p_n < n (log n + log log n) for n >= 6
    top = max(15, int(count * (math.log(count) + math.log(math.log(count + 2)))) + 1)
    spf = _spf_sieve(top)
    p = np.nonzero(spf[2:] == np.arange(2, top + 1))[0][:count].astype(np.int64) + 2
    cubes = p**3
    lam = np.minimum(cubes[1:-1] - cubes[:-2], cubes[2:] - cubes[1:-1])
    interior = p[1:-1]
    if np.any(lam < interior**2):
        raise PropertyFailure("cube gap below p_n^2")
    bounds = np.array([gaps_bound(int(g), 1.0) for g in lam])
    return interior, lam, bounds
