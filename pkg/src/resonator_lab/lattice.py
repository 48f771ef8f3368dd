"""Lattice points and visible lattice points in closed balls of Z^3.

Radii are handled through their squares: a ball of radius R contains the
points of norm at most ``floor(R**2)``, and that integer is computed with a
small snapping tolerance so that ``sqrt(3)`` really includes norm 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from . import arith
from .arith import ArithTables
from .errors import DomainError
from .resonator import MollifierPhi, TWO_PI, _snap_floor


def norm_bound(R: float) -> int:
    """floor(R^2), snapping to the nearest integer within 1e-12 relative."""
    if R < 0:
        raise DomainError(f"radius must be non-negative, got {R}")
    return _snap_floor(float(R) * float(R))


@lru_cache(maxsize=None)
def default_zeta3() -> float:
    return arith.zeta3(10**6)[0]


def volume_coefficient(zeta3: float) -> float:
    """4 pi / (3 zeta(3)); zero for an infinite zeta3 (used by synthetic series)."""
    return 4 * math.pi / (3 * zeta3)


def _lattice_cumulative(tables: ArithTables) -> np.ndarray:
    return tables.cached("lattice_cumsum", lambda: np.cumsum(tables.r3))


def count_lattice(R: float, tables: ArithTables) -> int:
    """#{x in Z^3 : |x| <= R}, origin included."""
    m = norm_bound(R)
    tables.check(m, "R^2")
    return int(_lattice_cumulative(tables)[m])


def visible_by_norm(tables: ArithTables) -> np.ndarray:
    """Number of visible points of each norm m, by Moebius inversion of r3.

    vis[m] = sum_{d^2 | m} mu(d) r3(m / d^2) for m >= 1.
    """

    def build():
        L = tables.limit
        vis = np.zeros(L + 1, dtype=np.int64)
        for d in range(1, math.isqrt(L) + 1):
            mu = int(tables.mu[d])
            if mu:
                q = d * d
                vis[q::q] += mu * tables.r3[1 : L // q + 1]
        return vis

    return tables.cached("visible_by_norm", build)


def direct_norm_histograms(nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Enumerate the ball of norm <= nmax directly.

    Returns ``(all_points, visible_points)`` histograms indexed by norm. Only
    the closed positive octant is enumerated; each point carries weight
    2^(number of nonzero coordinates), and visibility is gcd(x, y, z) = 1.
    """
    r = math.isqrt(nmax)
    y, z = np.meshgrid(np.arange(r + 1), np.arange(r + 1), indexing="ij")
    y = y.ravel()
    z = z.ravel()
    yz = y * y + z * z
    gyz = np.gcd(y, z)
    myz = (1 + (y > 0)) * (1 + (z > 0))
    all_h = np.zeros(nmax + 1, dtype=np.int64)
    vis_h = np.zeros(nmax + 1, dtype=np.int64)
    for x in range(r + 1):
        sel = yz <= nmax - x * x
        norms = yz[sel] + x * x
        mult = myz[sel] * (2 if x else 1)
        all_h += np.bincount(norms, weights=mult, minlength=nmax + 1).astype(np.int64)
        vis = np.gcd(gyz[sel], x) == 1
        vis_h += np.bincount(norms[vis], weights=mult[vis], minlength=nmax + 1).astype(np.int64)
    return all_h, vis_h


_direct_cache: dict = {}


def _direct_cumulative(nmax: int) -> tuple[np.ndarray, np.ndarray]:
    have = _direct_cache.get("n", -1)
    if have < nmax:
        all_h, vis_h = direct_norm_histograms(nmax)
        _direct_cache.update(n=nmax, all=np.cumsum(all_h), vis=np.cumsum(vis_h), all_h=all_h)
    return _direct_cache["all"], _direct_cache["vis"]


def count_visible(R: float, tables: ArithTables, method: str = "moebius") -> int:
    """Visible points (coprime coordinates) with |x| <= R.

    ``direct`` enumerates points and tests gcd; ``moebius`` evaluates
    sum_{d <= R} mu(d) (N(R/d) - 1) from the r3 table.
    """
    m = norm_bound(R)
    tables.check(m, "R^2")
    if method == "direct":
        return int(_direct_cumulative(m)[1][m])
    if method == "moebius":
        cum = _lattice_cumulative(tables)
        total = 0
        for d in range(1, math.isqrt(m) + 1):
            mu = int(tables.mu[d])
            if mu:
                total += mu * (int(cum[m // (d * d)]) - 1)
        return total
    raise DomainError(f"unknown counting method {method!r}")


def visible_counts(radii: Sequence[float], tables: ArithTables, method: str = "moebius") -> np.ndarray:
    """count_visible for many radii, building the direct histogram only once."""
    norms = [norm_bound(R) for R in radii]
    top = max(norms)
    tables.check(top, "R^2")
    if method == "direct":
        _direct_cumulative(top)
    return np.array([count_visible(R, tables, method) for R in radii], dtype=np.int64)


def error_term_star(t: float, tables: ArithTables, zeta3: float | None = None) -> float:
    """E*(t) = N*(t) - 4 pi t^3 / (3 zeta(3))."""
    z = default_zeta3() if zeta3 is None else zeta3
    return count_visible(t, tables) - volume_coefficient(z) * t**3


def error_term(t: float, tables: ArithTables) -> float:
    """E(t) = N(t) - 4 pi t^3 / 3."""
    return count_lattice(t, tables) - 4 * math.pi / 3 * t**3


@dataclass(frozen=True)
class ErrorTermSeries:
    """E* on [R_lo, R_hi] as a right-continuous step function minus a cubic.

    Jumps sit at radii sqrt(m); ``radii_sq`` stores the integers m.
    """

    interval: tuple[float, float]
    radii_sq: np.ndarray
    jumps: np.ndarray
    base_count: int
    zeta3: float
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        radii_sq = np.asarray(self.radii_sq, dtype=np.int64)
        jumps = np.asarray(self.jumps, dtype=np.int64)
        if radii_sq.shape != jumps.shape:
            raise DomainError("radii and jumps must align")
        if radii_sq.size and (np.any(np.diff(radii_sq) <= 0) or np.any(jumps <= 0)):
            raise DomainError("events must be strictly increasing with positive jumps")
        object.__setattr__(self, "radii_sq", radii_sq)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "_cum", np.concatenate([[0], np.cumsum(jumps)]))

    @classmethod
    def constant(cls, value: float, lo: float, hi: float) -> "ErrorTermSeries":
        """A series with no events and no cubic term: E* == value."""
        return cls((lo, hi), np.zeros(0), np.zeros(0), value, math.inf)

    @property
    def radii(self) -> np.ndarray:
        return np.sqrt(self.radii_sq.astype(float))

    @property
    def main_coeff(self) -> float:
        return volume_coefficient(self.zeta3)

    def nstar(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.radii_sq, t * t, side="right")
        return self.base_count + self._cum[idx]

    def zeros(self) -> np.ndarray:
        """Sign changes of E* between jumps: t = (N*/c)^(1/3) on each constant stretch."""
        if self.main_coeff == 0:
            return np.zeros(0)
        lo, hi = self.interval
        bounds = np.concatenate([[lo], self.radii, [hi]])
        levels = self.base_count + self._cum
        roots = np.cbrt(levels / self.main_coeff)
        inside = (roots > bounds[:-1]) & (roots < bounds[1:])
        return roots[inside]

    def estar(self, t):
        t = np.asarray(t, dtype=float)
        return self.nstar(t) - self.main_coeff * t**3


def build_error_series(
    R_lo: float, R_hi: float, tables: ArithTables, zeta3: float | None = None
) -> ErrorTermSeries:
    if not R_lo < R_hi:
        raise DomainError(f"need R_lo < R_hi, got [{R_lo}, {R_hi}]")
    lo_m, hi_m = norm_bound(R_lo), norm_bound(R_hi)
    tables.check(hi_m, "R_hi^2")
    vis = visible_by_norm(tables)
    m = np.arange(lo_m + 1, hi_m + 1)
    jumps = vis[lo_m + 1 : hi_m + 1]
    nz = jumps > 0
    return ErrorTermSeries(
        interval=(float(R_lo), float(R_hi)),
        radii_sq=m[nz],
        jumps=jumps[nz],
        base_count=count_visible(R_lo, tables),
        zeta3=default_zeta3() if zeta3 is None else zeta3,
    )


class HeckeCount(NamedTuple):
    sum: int
    Rd: float
    direct: int


def hecke_count_Rd(d: int, N: int, tables: ArithTables, v: int) -> HeckeCount:
    """sum_{0<=m<=N} r3(m d^2), its normalisation by v(d), and a direct recount."""
    q = d * d
    tables.check(N * q, "N d^2")
    total = int(tables.r3[0 : N * q + 1 : q].sum())
    all_h, _ = direct_norm_histograms(N * q)
    direct = int(all_h[::q].sum())
    return HeckeCount(total, total / v, direct)


def hecke_remainder_constant(d: int, N_grid: Sequence[int], tables: ArithTables, v: int) -> float:
    """max |R_d(N) - (4 pi/3)(N/d^2)^{3/2}| / (N/d^2) over the grid."""
    q = d * d
    top = max(N_grid)
    tables.check(top * q, "N d^2")
    cum = np.cumsum(tables.r3[0 : top * q + 1 : q])
    worst = 0.0
    for N in N_grid:
        x = N / q
        worst = max(worst, abs(cum[N] / v - 4 * math.pi / 3 * x**1.5) / x)
    return worst


@dataclass(frozen=True)
class VoronoiSpec:
    """Smoothed Voronoi main term at scale R with M = R / (log R)^{1/3}.

    The series is cut where the mollifier transform stays below
    ``threshold``; ``n_max`` may be given explicitly instead.
    """

    R: float
    mollifier: MollifierPhi = field(default_factory=MollifierPhi)
    threshold: float = 1e-12
    n_max_override: int | None = None

    def __post_init__(self):
        if self.R <= math.e:
            raise DomainError(f"R must exceed e so that M is defined, got {self.R}")

    @property
    def M(self) -> float:
        return self.R / math.log(self.R) ** (1 / 3)

    @property
    def n_max(self) -> int:
        if self.n_max_override is not None:
            return self.n_max_override
        xi = self.mollifier.negligible_beyond(self.threshold)
        return max(math.floor((xi * self.M) ** 2), math.ceil(self.M**2))


def voronoi_E(t, spec: VoronoiSpec, tables: ArithTables, prefactor: str = "R", chunk: int = 20000):
    """-(P/pi) sum_n (r3(n)/n) hat phi(sqrt(n)/M) cos(2 pi t sqrt(n)), P = R or t."""
    if prefactor not in ("R", "t"):
        raise DomainError(f"prefactor must be 'R' or 't', got {prefactor!r}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n_max = spec.n_max
    if n_max == 0:
        return np.zeros_like(t)
    tables.check(n_max, "voronoi n_max")
    n = np.arange(1, n_max + 1)
    r3 = tables.r3[1 : n_max + 1]
    root = np.sqrt(n.astype(float))
    coef = r3 / n * spec.mollifier.hat(root / spec.M)
    keep = coef != 0
    root, coef = root[keep], coef[keep]
    total = np.zeros_like(t)
    for lo in range(0, root.size, chunk):
        r = root[lo : lo + chunk]
        total += np.cos(TWO_PI * np.outer(t, r)) @ coef[lo : lo + chunk]
    pref = spec.R if prefactor == "R" else t
    return -pref / math.pi * total


class VoronoiFit(NamedTuple):
    prefactor: str
    correlation: float
    relative_rms: float


def voronoi_comparison(
    R: float,
    tables: ArithTables,
    mollifier: MollifierPhi | None = None,
    threshold: float = 1e-3,
    samples: int = 401,
) -> list[VoronoiFit]:
    """Compare both prefactor readings of the smoothed Voronoi sum with exact E on [R, 2R].

    Returns one fit per prefactor, best (highest correlation) first.
    """
    spec = VoronoiSpec(R, mollifier or MollifierPhi(), threshold)
    tables.check(norm_bound(2 * R), "(2R)^2")
    ts = np.linspace(R, 2 * R, samples)
    exact = np.array([error_term(t, tables) for t in ts])
    scale = math.sqrt(float(np.mean(exact**2)))
    fits = []
    for pf in ("R", "t"):
        approx = voronoi_E(ts, spec, tables, pf)
        fits.append(
            VoronoiFit(
                pf,
                float(np.corrcoef(exact, approx)[0, 1]),
                math.sqrt(float(np.mean((exact - approx) ** 2))) / scale,
            )
        )
    return sorted(fits, key=lambda f: -f.correlation)
