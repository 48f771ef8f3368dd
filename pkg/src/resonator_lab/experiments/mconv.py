"""Moebius-type convolutions G(x) = sum_{n<=x} f(n) F(x/n) and their Dirichlet resonator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from ..errors import DomainError
from ..quad import QuadraturePolicy, integrate_weighted
from ..resonator import TransitionPhi, WeightMeasure, dirichlet_g, e


def chi3(n: int) -> int:
    return (0, 1, -1)[n % 3]


def chi4(n: int) -> int:
    return (0, 1, 0, -1)[n % 4]


def mobius(n: int) -> int:
    if n < 1:
        raise DomainError(f"mobius needs n >= 1, got {n}")
    sign, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            sign = -sign
        p += 1
    return -sign if n > 1 else sign


ARITHMETIC_FUNCTIONS = {"chi3": chi3, "chi4": chi4, "mobius": mobius}


@dataclass(frozen=True)
class MconvInstance:
    """Coefficients a_1..a_N with a named built-in f; b_n = a_n sum_{d|n} f(d) must be >= 0."""

    a: tuple
    f: str = "chi4"
    K: float = 2.0
    b: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.f not in ARITHMETIC_FUNCTIONS:
            raise DomainError(f"unknown arithmetic function {self.f!r}; use one of {sorted(ARITHMETIC_FUNCTIONS)}")
        if not self.a:
            raise DomainError("need at least one coefficient")
        if not self.K > 1:
            raise DomainError(f"K must exceed 1, got {self.K}")
        a = np.asarray(self.a, dtype=complex)
        f = ARITHMETIC_FUNCTIONS[self.f]
        div = np.array(
            [sum(f(d) for d in range(1, n + 1) if n % d == 0) for n in range(1, a.size + 1)],
            dtype=float,
        )
        b = a * div
        if np.any(np.abs(b.imag) > 1e-12) or np.any(b.real < -1e-12):
            raise DomainError("hypothesis b_n >= 0 fails: b_n = a_n sum_{d|n} f(d) must be real and nonnegative")
        object.__setattr__(self, "a", tuple(complex(x) for x in a))
        object.__setattr__(self, "b", b.real)
        if not self.scriptB > 0:
            raise DomainError("scriptB = sum b_n must be positive")

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def scriptB(self) -> float:
        return math.fsum(self.b)

    def fvalues(self, upto: int) -> np.ndarray:
        f = ARITHMETIC_FUNCTIONS[self.f]
        return np.array([0] + [f(d) for d in range(1, upto + 1)], dtype=float)


def mconv_G(x, instance: MconvInstance, phi: TransitionPhi | None = None):
    """G(x) = sum_{d<=x} f(d) phi(x/d) sum_n a_n e(n x/d).

    The trigonometric polynomial is evaluated by Horner's rule in e(x/d).
    """
    phi = phi or TransitionPhi()
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    top = math.floor(float(x.max())) if x.size else 0
    if top < 1:
        return out
    fv = instance.fvalues(top)
    coefs = instance.a[::-1]
    for d in range(1, top + 1):
        if not fv[d]:
            continue
        live = x > d  # phi(x/d) vanishes for x/d <= 1
        if not live.any():
            break
        y = x[live] / d
        z = e(y)
        poly = np.zeros(y.shape, dtype=complex)
        for c in coefs:
            poly = (poly + c) * z
        out[live] += fv[d] * phi(y) * poly
    return out


class MconvResult(NamedTuple):
    value: complex
    scriptB: float
    error_estimate: float

    @property
    def relative_gap(self) -> float:
        return abs(self.value - self.scriptB) / self.scriptB


def mconv_correlation(
    instance: MconvInstance,
    R: float,
    weight: WeightMeasure | None = None,
    policy: QuadraturePolicy | None = None,
) -> MconvResult:
    """int G(t) g(t) dmu(t), g the Dirichlet kernel sum_{m<=N} e(-m t)."""
    N = instance.N
    if R < 4 * N:
        raise DomainError(f"need R >= 4N = {4 * N}, got R={R}")
    weight = weight or WeightMeasure(0.5, 2.5)
    if weight.u < 0.5 or weight.v > 2.5:
        raise DomainError(f"weight support ({weight.u}, {weight.v}) must lie in (1/2, 5/2)")
    measure = weight.scaled(R)
    policy = (policy or QuadraturePolicy()).with_frequency(2 * N)
    res = integrate_weighted(lambda t: mconv_G(t, instance) * dirichlet_g(t, N), measure, policy)
    return MconvResult(complex(res.value), instance.scriptB, res.error_estimate)


def _count_residue(lo: int, hi: int, rho: int, d: int) -> int:
    """#{r in [lo, hi] : r = rho mod d}."""
    if hi < lo:
        return 0
    return (hi - rho) // d - (lo - 1 - rho) // d


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


@dataclass(frozen=True)
class HypothesisRow:
    V: float
    triple_sum: float
    ratio: float


def mconv_triple_sum(instance: MconvInstance, R, V) -> float:
    """sum_{R/(2V) <= d <= 3R} sum_{dV/R <= r < 2dV/R} sum_{n = +-r (d), n <= N} |a_n|.

    R and V are converted to exact fractions; for each (d, n) the admissible
    r form at most two residue classes mod d, counted in closed form.
    """
    R, V = Fraction(R), Fraction(V)
    if not V > Fraction(1, 6):
        raise DomainError(f"V must exceed 1/6, got {float(V)}")
    absa = [abs(x) for x in instance.a]
    parts = []
    for d in range(max(1, _ceil(R / (2 * V))), _floor(3 * R) + 1):
        lo = _ceil(d * V / R)
        hi = _ceil(2 * d * V / R) - 1
        if hi < lo:
            continue
        for n, w in enumerate(absa, start=1):
            rho = n % d
            cnt = _count_residue(lo, hi, rho, d)
            if (-rho) % d != rho:
                cnt += _count_residue(lo, hi, (-rho) % d, d)
            if cnt:
                parts.append(cnt * w)
    return math.fsum(parts)


def mconv_hypothesis(instance: MconvInstance, R: float, V_grid: Sequence[float]) -> list[HypothesisRow]:
    """Triple sum and its ratio to (6V)^K scriptB for each V."""
    rows = []
    for V in V_grid:
        s = mconv_triple_sum(instance, R, V)
        rows.append(HypothesisRow(float(V), s, s / ((6 * float(V)) ** instance.K * instance.scriptB)))
    return rows
