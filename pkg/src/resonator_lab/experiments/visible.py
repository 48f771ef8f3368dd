"""Correlation of E* with the short resonator g_sigma, and the Hoelder chain."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..arith import ArithTables, r3_scaled
from ..errors import DomainError, PropertyFailure
from ..lattice import ErrorTermSeries, build_error_series
from ..quad import QuadResult, QuadraturePolicy, integrate_weighted, integrate_with_events
from ..resonator import GSigmaSpec, MollifierPhi, WeightMeasure, eval_g_sigma, eval_g_sigma_complex


def _series_for(measure: WeightMeasure, tables: ArithTables, zeta3=None) -> ErrorTermSeries:
    a, b = measure.support
    return build_error_series(a, b, tables, zeta3)


def correlation_I(
    R: float,
    sigma: float,
    tables: ArithTables,
    weight: WeightMeasure | None = None,
    policy: QuadraturePolicy | None = None,
    cutoff: int | None = None,
    series: ErrorTermSeries | None = None,
) -> QuadResult:
    """I(R) = int g_sigma(t) E*(t) dnu(t).

    ``cutoff`` overrides floor(R^sigma) (cutoff=1 gives the single-cosine
    resonator); ``series`` overrides the exact E* data.
    """
    spec = GSigmaSpec(R, sigma)
    k = cutoff or spec.cutoff
    measure = (weight or WeightMeasure()).scaled(R)
    policy = (policy or QuadraturePolicy()).with_frequency(math.sqrt(k) + 3)
    series = series or _series_for(measure, tables)
    return integrate_with_events(
        series, measure, policy, companion=lambda t: eval_g_sigma(t, spec, k)
    )


def predicted_I(R: float, sigma: float, C: float) -> float:
    """-sigma C R log R."""
    return -sigma * C * R * math.log(R)


def compute_M_sigma(
    R: float,
    sigma: float,
    tables: ArithTables,
    mollifier: MollifierPhi | None = None,
    method: str = "auto",
    skip_below: float = 1e-14,
) -> float:
    """M_sigma(R) = sum_{d<2R} sum_{m<=R^sigma} mu(d) a_{m d^2} / (d sqrt(m n)).

    With n = m d^2 each term is mu(d) r3(m d^2) hat phi(d sqrt(m)/M) / (d^3 m^{3/2}).
    ``method='table'`` reads r3(m d^2) from the sieve; ``'hecke'`` derives it
    from r3(m) through the Hecke relations, so only m <= R^sigma must be
    sieved; ``'auto'`` uses the table when it is large enough.
    """
    mollifier = mollifier or MollifierPhi()
    spec = GSigmaSpec(R, sigma)
    cutoff = spec.cutoff
    M = R / math.log(R) ** (1 / 3)
    xi_star = mollifier.negligible_beyond(skip_below)
    d_top = math.ceil(2 * R) - 1
    tables.check(cutoff, "R^sigma")
    if method == "auto":
        need = min(d_top**2 * cutoff, math.floor((xi_star * M) ** 2))
        method = "table" if need <= tables.limit else "hecke"
    if method not in ("table", "hecke"):
        raise DomainError(f"unknown M_sigma method {method!r}")
    tables.check(d_top, "2R")

    m = np.arange(1, cutoff + 1, dtype=np.int64)
    m32 = m.astype(float) ** 1.5
    rootm = np.sqrt(m.astype(float))
    parts = []
    for d in range(1, d_top + 1):
        mu = int(tables.mu[d])
        if not mu:
            continue
        xi = d * rootm / M
        live = xi <= xi_star
        if not live.any():
            continue
        hat = mollifier.hat(xi[live])
        live_idx = np.nonzero(live)[0][np.abs(hat) >= skip_below]
        if live_idx.size == 0:
            continue
        hat = mollifier.hat(xi[live_idx])
        ms = m[live_idx]
        if method == "table":
            tables.check(int(ms[-1]) * d * d, "m d^2")
            r3 = tables.r3[ms * d * d]
        else:
            r3 = r3_scaled(ms, d, tables)
        parts.append(mu * float(np.sum(r3 * hat / m32[live_idx])) / d**3)
    return math.fsum(parts)


def predicted_M(R: float, sigma: float, C0: float) -> float:
    """2 pi C0 sigma log R."""
    return 2 * math.pi * C0 * sigma * math.log(R)


def moment_Estar(
    R: float,
    p: float,
    tables: ArithTables | None,
    weight: WeightMeasure | None = None,
    policy: QuadraturePolicy | None = None,
    series: ErrorTermSeries | None = None,
) -> QuadResult:
    """int |E*|^p dnu, exact off the jump radii.

    At least 16 nodes per panel are used: on a stretch between jumps the
    root of N* - c t^3 often sits just outside the panel, and that nearby
    branch point slows Gauss-Legendre convergence.
    """
    if p <= 1:
        raise DomainError(f"p must exceed 1, got {p}")
    measure = (weight or WeightMeasure()).scaled(R)
    policy = policy or QuadraturePolicy()
    policy = replace(policy, nodes_per_panel=max(16, policy.nodes_per_panel))
    if series is None:
        series = _series_for(measure, tables)
    return integrate_with_events(series, measure, policy, transform=lambda x: np.abs(x) ** p)


def hoelder_k(p: float) -> int:
    """Smallest even-moment order 2k that dominates the conjugate exponent."""
    return math.ceil(p / (2 * p - 2))


def sigma_limit(k: int) -> float:
    """Largest admissible sigma (exclusive) for the 2k-th moment of g_sigma."""
    return 2 / (2 ** (2 * k - 1) - 1)


@dataclass
class HoelderChain:
    R: float
    p: float
    q: float
    k: int
    sigma: float
    correlation: float
    correlation_power: float
    moment_E: float
    moment_g_q: float
    moment_g_2k: float
    rhs: float
    lyapunov_rhs: float
    slack: float
    lyapunov_slack: float
    error: float

    @property
    def holds(self) -> bool:
        return self.slack >= -self.error and self.lyapunov_slack >= -self.error


def hoelder_chain(
    R: float,
    p: float,
    sigma: float,
    tables: ArithTables,
    weight: WeightMeasure | None = None,
    policy: QuadraturePolicy | None = None,
    companion_is_estar: bool = False,
    strict: bool = True,
) -> HoelderChain:
    """Evaluate every factor of the Hoelder lower-bound chain.

    |int g E* dnu|^p <= int |E*|^p dnu * (int |g|^q dnu)^{p/q}, and the
    q-moment of g is bounded by the 2k-th moment of the complex sum
    sum e(x sqrt n)/sqrt n through Lyapunov's inequality.

    With ``companion_is_estar`` the resonator is replaced by E* itself, which
    is the equality case when p = 2.
    """
    if p <= 1:
        raise DomainError(f"p must exceed 1, got {p}")
    k = hoelder_k(p)
    if not companion_is_estar and not sigma < sigma_limit(k):
        raise DomainError(
            f"sigma={sigma} violates sigma < 2/(2^(2k-1)-1) = {sigma_limit(k):.6g} for k={k}"
        )
    q = p / (p - 1)
    spec = GSigmaSpec(R, sigma)
    measure = (weight or WeightMeasure()).scaled(R)
    base = policy or QuadraturePolicy()
    series = _series_for(measure, tables)
    freq = math.sqrt(spec.cutoff) + 3

    if companion_is_estar:
        corr = integrate_with_events(series, measure, base, transform=lambda x: x * x)
        mg_q = moment_Estar(R, q, tables, weight, base, series)
        mg_2k = mg_q
    else:
        corr = integrate_with_events(
            series, measure, base.with_frequency(freq), companion=lambda t: eval_g_sigma(t, spec)
        )
        pol = base.with_frequency(2 * k * freq)
        mg_q = integrate_weighted(lambda t: np.abs(eval_g_sigma(t, spec)) ** q, measure, pol)
        mg_2k = integrate_weighted(
            lambda t: np.abs(eval_g_sigma_complex(t, spec)) ** (2 * k), measure, pol
        )
    mE = moment_Estar(R, p, tables, weight, base, series)

    c = abs(float(np.real(corr.value)))
    lhs = c**p
    rhs = mE.value * mg_q.value ** (p / q)
    ly_rhs = mE.value * mg_2k.value ** (p / (2 * k))
    # first-order propagation of the quadrature errors into both sides
    err = (
        p * c ** (p - 1) * corr.error_estimate
        + mE.error_estimate * mg_q.value ** (p / q)
        + mE.value * (p / q) * mg_q.value ** (p / q - 1) * mg_q.error_estimate
        + mE.value * (p / (2 * k)) * mg_2k.value ** (p / (2 * k) - 1) * mg_2k.error_estimate
        + 1e-12 * max(lhs, rhs)
    )
    chain = HoelderChain(
        R=R, p=p, q=q, k=k, sigma=sigma,
        correlation=float(np.real(corr.value)),
        correlation_power=lhs,
        moment_E=float(mE.value),
        moment_g_q=float(mg_q.value),
        moment_g_2k=float(mg_2k.value),
        rhs=float(rhs),
        lyapunov_rhs=float(ly_rhs),
        slack=float(rhs - lhs),
        lyapunov_slack=float(ly_rhs - rhs),
        error=float(err),
    )
    if strict and not chain.holds:
        raise PropertyFailure(
            f"Hoelder inequality |int g E* dnu|^p <= int |E*|^p dnu (int |g|^q dnu)^(p/q) "
            f"violated at R={R}, p={p}: slack {chain.slack:.6g}, error {chain.error:.3g}"
        )
    return chain
