"""Panelised Gauss-Legendre integration against the bump probability measures.

Panels are sized from the declared oscillation frequency of the integrand and
split at every jump of a step-function factor. Each panel is integrated with
``q`` and ``2q`` nodes; the difference of the two totals is the error
estimate. Panel contributions are reduced by a fixed pairwise tree in panel
order, so results do not depend on how many worker threads evaluated them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import roots_legendre

from .errors import AccuracyError, DomainError
from .resonator import WeightMeasure


class QuadResult(NamedTuple):
    value: complex | float
    error_estimate: float

    def __float__(self):
        return float(np.real(self.value))


@dataclass(frozen=True)
class QuadraturePolicy:
    panels_per_period: int = 4
    nodes_per_panel: int = 8
    max_frequency: float = 0.0
    absolute_tolerance: float = 1e-9
    relative_tolerance: float = 1e-10
    min_panels: int = 64
    max_refinements: int = 3
    threads: int = 1
    chunk_panels: int = 4096

    def __post_init__(self):
        if self.panels_per_period < 4:
            raise DomainError("panels_per_period must be >= 4")
        if self.nodes_per_panel < 2:
            raise DomainError("nodes_per_panel must be >= 2")
        if self.max_frequency < 0:
            raise DomainError("max_frequency must be non-negative")

    def with_frequency(self, f: float) -> "QuadraturePolicy":
        return replace(self, max_frequency=float(f))

    def panel_count(self, length: float) -> int:
        by_freq = math.ceil(length * self.panels_per_period * self.max_frequency)
        return max(self.min_panels, by_freq)


@lru_cache(maxsize=None)
def _rule(q: int):
    x, w = roots_legendre(q)
    return (x + 1) / 2, w / 2


def pairwise_sum(values: np.ndarray):
    """Sum by a balanced binary tree; the order depends only on the length."""
    v = np.asarray(values)
    if v.size == 0:
        return v.dtype.type(0)
    while v.size > 1:
        if v.size % 2:
            v = np.concatenate([v, np.zeros(1, dtype=v.dtype)])
        v = v[0::2] + v[1::2]
    return v[0]


def _panel_sums(edges, integrand, q, lo, hi):
    a = edges[lo:hi]
    h = edges[lo + 1 : hi + 1] - a
    x, w = _rule(q)
    t = a[:, None] + h[:, None] * x[None, :]
    vals = integrand(t, np.arange(lo, hi))
    return (vals * w[None, :]).sum(axis=1) * h


def _evaluate(edges, integrand, policy: QuadraturePolicy):
    n = len(edges) - 1
    bounds = [(lo, min(lo + policy.chunk_panels, n)) for lo in range(0, n, policy.chunk_panels)]
    q = policy.nodes_per_panel

    def work(b):
        return _panel_sums(edges, integrand, q, *b), _panel_sums(edges, integrand, 2 * q, *b)

    if policy.threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=policy.threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    coarse = np.concatenate([p[0] for p in parts])
    fine = np.concatenate([p[1] for p in parts])
    value = pairwise_sum(fine)
    scale = float(pairwise_sum(np.abs(fine)))
    err = abs(value - pairwise_sum(coarse)) + 16 * np.finfo(float).eps * scale
    return value, float(err), scale


def _refine(edges):
    mids = (edges[:-1] + edges[1:]) / 2
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


def integrate_panels(edges, integrand, policy: QuadraturePolicy) -> QuadResult:
    """Integrate ``integrand(t, panel_index)`` over consecutive panels.

    ``integrand`` receives node arrays of shape (panels, nodes) and the
    indices of those panels in the original ``edges``; after a refinement the
    indices refer to the refined panels, so piecewise data must be looked up
    from ``t`` rather than from the index.
    """
    edges = np.asarray(edges, dtype=float)
    best = None
    for attempt in range(policy.max_refinements + 1):
        value, err, scale = _evaluate(edges, integrand, policy)
        best = (value, err)
        tol = max(policy.absolute_tolerance, policy.relative_tolerance * scale)
        if err <= tol:
            return QuadResult(value, err)
        if attempt < policy.max_refinements:
            edges = _refine(edges)
    raise AccuracyError(
        f"quadrature error estimate {best[1]:.3g} exceeds tolerance after "
        f"{policy.max_refinements} refinements",
        best=best[0],
        error_estimate=best[1],
    )


def integrate_weighted(
    f: Callable, measure: WeightMeasure, policy: QuadraturePolicy | None = None
) -> QuadResult:
    """int f d(measure) for a smooth ``f`` with oscillation up to ``policy.max_frequency``."""
    policy = policy or QuadraturePolicy()
    a, b = measure.support
    edges = np.linspace(a, b, policy.panel_count(b - a) + 1)
    return integrate_panels(edges, lambda t, _: f(t) * measure.density(t), policy)


def event_edges(radii: np.ndarray, measure: WeightMeasure, policy: QuadraturePolicy):
    a, b = measure.support
    uniform = np.linspace(a, b, policy.panel_count(b - a) + 1)
    inside = radii[(radii > a) & (radii < b)]
    edges = np.union1d(uniform, inside)
    # drop slivers created by an event sitting on a uniform edge
    keep = np.concatenate([[True], np.diff(edges) > 1e-13 * max(1.0, b)])
    return edges[keep]


def integrate_with_events(
    series,
    measure: WeightMeasure,
    policy: QuadraturePolicy | None = None,
    companion: Callable | None = None,
    transform: Callable | None = None,
) -> QuadResult:
    """int companion(t) * transform(E*(t)) d(measure) with panels split at jumps.

    ``series`` is an :class:`~resonator_lab.lattice.ErrorTermSeries` covering
    the support of ``measure``; ``transform`` defaults to the identity and
    ``companion`` to 1.
    """
    policy = policy or QuadraturePolicy()
    a, b = measure.support
    lo, hi = series.interval
    if a < lo - 1e-12 or b > hi + 1e-12:
        raise DomainError(f"series interval [{lo}, {hi}] does not cover support [{a}, {b}]")
    edges = event_edges(series.radii, measure, policy)
    graded = None
    if transform is not None:
        # |E*|^p has an algebraic singularity where E* changes sign: split there
        # and cluster nodes toward those edges with a smoothstep change of variable
        zeros = series.zeros()
        edges = event_edges(np.union1d(series.radii, zeros), measure, policy)
        near = np.zeros(edges.size, dtype=bool)
        if zeros.size:
            k = np.clip(np.searchsorted(zeros, edges), 1, zeros.size - 1)
            gap = np.minimum(np.abs(edges - zeros[k - 1]), np.abs(edges - zeros[k]))
            near = gap <= 1e-12 * max(1.0, b)
        graded = near[:-1] | near[1:]

    def base(t):
        # one N* value per panel, read at the panel midpoint (never a jump)
        mid = (t[:, :1] + t[:, -1:]) / 2
        estar = series.nstar(mid) - series.main_coeff * t**3
        vals = estar if transform is None else transform(estar)
        if companion is not None:
            vals = vals * companion(t)
        return vals * measure.density(t)

    def integrand(t, _idx):
        if graded is None or not graded.any():
            return base(t)
        j = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, graded.size - 1)
        a = edges[j]
        h = edges[j + 1] - a
        s = (t - a) / h
        g = graded[j]
        tt = np.where(g, a + h * s * s * (3 - 2 * s), t)
        jac = np.where(g, 6 * s * (1 - s), 1.0)
        return base(tt) * jac

    return integrate_panels(edges, integrand, policy)
