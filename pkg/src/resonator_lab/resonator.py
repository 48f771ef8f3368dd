"""Resonator kernels and the smooth bumps that define the weights.

Conventions: ``e(x) = exp(2 pi i x)`` and the Fourier transform is
``hat f(xi) = int f(x) e(-x xi) dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import roots_legendre

from .errors import DomainError

TWO_PI = 2 * math.pi
# below this distance to an integer the closed forms divide by ~0
NEAR_INTEGER = 1e-4


def e(x):
    return np.exp(1j * TWO_PI * np.asarray(x, dtype=float))


def _snap_floor(x: float) -> int:
    # floor() that treats values within a few ulps of an integer as that integer
    k = round(x)
    if abs(x - k) <= 1e-12 * max(1.0, abs(x)):
        return int(k)
    return math.floor(x)


def composite_gauss(a: float, b: float, panels: int, order: int = 16):
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    g, gw = roots_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    x = (edges[:-1, None] + h[:, None] * (g + 1) / 2).ravel()
    w = (h[:, None] * gw / 2).ravel()
    return x, w


# ---------------------------------------------------------------- g_sigma


@dataclass(frozen=True)
class GSigmaSpec:
    R: float
    sigma: float

    def __post_init__(self):
        if not self.R > 1:
            raise DomainError(f"R must exceed 1, got {self.R}")
        if not 0 < self.sigma < 2:
            raise DomainError(f"sigma must lie in (0, 2), got {self.sigma}")

    @property
    def cutoff(self) -> int:
        return max(1, _snap_floor(self.R**self.sigma))

    @property
    def max_frequency(self) -> float:
        return math.sqrt(self.cutoff)


def eval_g_sigma(x, spec: GSigmaSpec, cutoff: int | None = None):
    """sum_{n <= R^sigma} cos(2 pi x sqrt(n)) / sqrt(n)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for n in range(1, (cutoff or spec.cutoff) + 1):
        r = math.sqrt(n)
        out += np.cos(TWO_PI * r * x) / r
    return out


def eval_g_sigma_complex(x, spec: GSigmaSpec, cutoff: int | None = None):
    """sum_{n <= R^sigma} e(x sqrt(n)) / sqrt(n); g_sigma is its real part."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for n in range(1, (cutoff or spec.cutoff) + 1):
        r = math.sqrt(n)
        out += e(r * x) / r
    return out


# ---------------------------------------------------------------- Fejer


@dataclass(frozen=True)
class GapProfile:
    """Frequencies ``nu`` (strictly increasing positive integers), coefficients
    ``a`` and a distinguished 1-based index ``n``."""

    nu: tuple
    a: tuple
    n: int | None = None

    def __post_init__(self):
        nu = tuple(int(v) for v in self.nu)
        a = tuple(complex(c) for c in self.a)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "a", a)
        if len(nu) != len(a) or not nu:
            raise DomainError("nu and a must be non-empty and of equal length")
        if nu[0] < 1 or any(b <= c for c, b in zip(nu, nu[1:])):
            raise DomainError(f"frequencies must be strictly increasing positive integers: {nu}")
        if any(c == 0 for c in a):
            raise DomainError("coefficients must be nonzero")
        if self.n is not None and not 1 <= self.n <= len(nu):
            raise DomainError(f"index n={self.n} outside 1..{len(nu)}")

    def require_interior(self) -> None:
        if self.n is None or not 1 < self.n < len(self.nu):
            raise DomainError(
                f"index must satisfy 1 < n < N (N={len(self.nu)}), got n={self.n}"
            )

    @property
    def nu_n(self) -> int:
        return self.nu[self.n - 1]

    @property
    def a_n(self) -> complex:
        return self.a[self.n - 1]

    @property
    def gap(self) -> int:
        if self.n is None:
            raise DomainError("gap needs a distinguished index n")
        others = [abs(v - self.nu_n) for i, v in enumerate(self.nu) if i != self.n - 1]
        if not others:
            raise DomainError("gap undefined for a single frequency")
        return min(others)


def fejer_spectral(x, nu: int, lam: int):
    """sum_{|k| <= lam} (1 - |k|/lam) e((k - nu) x)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for k in range(-lam, lam + 1):
        out += (1 - abs(k) / lam) * e((k - nu) * x)
    return out


def fejer_kernel(x, nu: int, lam: int):
    """(e(-nu x) / lam) (sin(pi lam x) / sin(pi x))^2, spectral form near integers."""
    if lam < 1:
        raise DomainError(f"gap must be a positive integer, got {lam}")
    x = np.asarray(x, dtype=float)
    near = np.abs(x - np.round(x)) < NEAR_INTEGER
    safe = np.where(near, 0.5, x)
    ratio = np.sin(math.pi * lam * safe) / np.sin(math.pi * safe)
    out = e(-nu * safe) * ratio**2 / lam
    if near.any():
        out = np.where(near, fejer_spectral(np.where(near, x, 0.0), nu, lam), out)
    return out


def fejer_resonator(x, profile: GapProfile):
    return fejer_kernel(x, profile.nu_n, profile.gap)


def dirichlet_g(t, N: int):
    """sum_{n=1}^N e(-n t), via e(-(N+1)t/2) sin(pi N t) / sin(pi t)."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    t = np.asarray(t, dtype=float)
    near = np.abs(t - np.round(t)) < NEAR_INTEGER
    safe = np.where(near, 0.5, t)
    out = e(-(N + 1) * safe / 2) * np.sin(math.pi * N * safe) / np.sin(math.pi * safe)
    if near.any():
        tn = np.where(near, t, 0.0)
        direct = np.zeros(t.shape, dtype=complex)
        for n in range(1, N + 1):
            direct += e(-n * tn)
        out = np.where(near, direct, out)
    return out


def sine_series_S(x, profile: GapProfile):
    """sum_k a_k sin(2 pi nu_k x)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for a, nu in zip(profile.a, profile.nu):
        out += a * np.sin(TWO_PI * nu * x)
    return out


test_series_S = sine_series_S
test_series_S.__test__ = False  # keep pytest from collecting the alias


# ---------------------------------------------------------------- smooth bumps


def _h(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(s > 0, np.exp(-1 / np.where(s > 0, s, 1.0)), 0.0)


@dataclass(frozen=True)
class TransitionPhi:
    """Smooth step: 0 for x <= 1, 1 for x >= 2."""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a = _h(x - 1)
        b = _h(2 - x)
        return a / (a + b)


def eval_F_thconv(x, a: Sequence[complex], phi: TransitionPhi | None = None):
    """phi(x) sum_{n=1}^N a_n e(n x)."""
    phi = phi or TransitionPhi()
    x = np.asarray(x, dtype=float)
    z = e(x)
    poly = np.zeros(x.shape, dtype=complex)
    for coef in reversed(list(a)):
        poly = (poly + coef) * z
    return phi(x) * poly


def _bump(t, u: float, v: float):
    t = np.asarray(t, dtype=float)
    inside = (t > u) & (t < v)
    q = np.where(inside, (t - u) * (v - t), 1.0)
    with np.errstate(over="ignore"):
        return np.where(inside, np.exp(-1 / q), 0.0)


@lru_cache(maxsize=None)
def _bump_mass(u: float, v: float) -> float:
    x, w = composite_gauss(u, v, 200)
    return float(np.sum(w * _bump(x, u, v)))


@dataclass(frozen=True)
class WeightMeasure:
    """Probability measure ``R^-1 psi(x / R) dx`` with ``psi`` a normalised
    exponential bump on ``(u, v)``."""

    u: float = 1.0
    v: float = 2.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.u < self.v:
            raise DomainError(f"empty support ({self.u}, {self.v})")
        if self.scale <= 0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    @property
    def c(self) -> float:
        return 1.0 / _bump_mass(self.u, self.v)

    @property
    def support(self) -> tuple[float, float]:
        return self.u * self.scale, self.v * self.scale

    def scaled(self, R: float) -> "WeightMeasure":
        return WeightMeasure(self.u, self.v, float(R))

    def psi(self, s):
        return self.c * _bump(s, self.u, self.v)

    def density(self, t):
        return self.psi(np.asarray(t, dtype=float) / self.scale) / self.scale

    def first_moment(self) -> float:
        """int t psi(t) dt for the unscaled bump."""
        x, w = composite_gauss(self.u, self.v, 200)
        return float(np.sum(w * x * self.psi(x)))

    def transform(self, xi):
        """hat psi(xi) of the unscaled bump, by direct quadrature."""
        x, w = composite_gauss(self.u, self.v, 400)
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        vals = (w * self.psi(x))[None, :] * e(-np.outer(xi, x))
        return vals.sum(axis=1)


@dataclass(frozen=True)
class MollifierPhi:
    """Even bump ``c exp(-1/(1-x^2))`` on (-1, 1) with ``hat phi(0) = 1``.

    ``hat`` interpolates a cubic spline through direct quadrature values on
    ``[0, xi_max]`` with spacing ``step``; beyond ``xi_max`` it returns 0.
    """

    xi_max: float = 140.0
    step: float = 0.004

    @property
    def c(self) -> float:
        return 1.0 / _phi_mass()

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * _bump(x, -1.0, 1.0)

    def hat_direct(self, xi):
        """hat phi by composite Gauss-Legendre on [0, 1] using evenness."""
        xi = np.atleast_1d(np.abs(np.asarray(xi, dtype=float)))
        x, w = _mollifier_nodes()
        wf = 2 * w * self.phi(x)
        out = np.empty(xi.shape)
        for lo in range(0, xi.size, 2048):
            chunk = xi.ravel()[lo : lo + 2048]
            out.ravel()[lo : lo + 2048] = np.cos(TWO_PI * np.outer(chunk, x)) @ wf
        return out

    @property
    def spline(self) -> CubicSpline:
        return _mollifier_spline(self.xi_max, self.step)

    def hat(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        inside = xi <= self.xi_max
        return np.where(inside, self.spline(np.where(inside, xi, 0.0)), 0.0)

    def negligible_beyond(self, threshold: float) -> float:
        """Smallest grid xi with |hat phi| < threshold on the rest of the grid."""
        xs = self.spline.x
        vals = np.abs(self.spline(xs))
        big = np.nonzero(vals >= threshold)[0]
        if big.size == 0:
            return 0.0
        last = big[-1]
        return float(xs[min(last + 1, xs.size - 1)])


@lru_cache(maxsize=None)
def _phi_mass() -> float:
    # int_{-1}^{1} exp(-1/(1-x^2)) dx
    return 2 * _bump_mass_half()


@lru_cache(maxsize=None)
def _bump_mass_half() -> float:
    x, w = _mollifier_nodes()
    return float(np.sum(w * _bump(x, -1.0, 1.0)))


@lru_cache(maxsize=None)
def _mollifier_nodes():
    return composite_gauss(0.0, 1.0, 128)


@lru_cache(maxsize=None)
def _mollifier_spline(xi_max: float, step: float) -> CubicSpline:
    grid = np.linspace(0.0, xi_max, int(round(xi_max / step)) + 1)
    vals = MollifierPhi.hat_direct(MollifierPhi(xi_max, step), grid)
    return CubicSpline(grid, vals)


def csc_bound_check(points: int = 10_000) -> tuple[bool, float]:
    """csc^2(pi t) <= (pi t)^-2 + 0.6 on a grid of (0, 1/2]; returns (ok, min slack)."""
    t = np.linspace(0.5 / points, 0.5, points)
    slack = (math.pi * t) ** -2 + 0.6 - 1 / np.sin(math.pi * t) ** 2
    m = float(slack.min())
    return m >= 0, m
