"""Even moments of the short resonator and the exact vanishing of L(n)."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..arith import ArithTables, squarefree_decompose, sqrt_combination_is_zero
from ..errors import DomainError
from ..quad import QuadraturePolicy, integrate_weighted
from ..resonator import GSigmaSpec, WeightMeasure, eval_g_sigma_complex
from .visible import sigma_limit


def diagonal_moment(cutoff: int, k: int) -> Fraction:
    """Sum of 1/sqrt(n_1...n_2k) over tuples whose two halves are equal multisets.

    Grouping by the common multiset: each multiset with multiplicities c_i
    has k!/prod(c_i!) orderings on either side and product prod(n^c_i).
    """
    if k < 1 or cutoff < 1:
        raise DomainError("need k >= 1 and cutoff >= 1")
    total = Fraction(0)
    fk = math.factorial(k)
    for ms in itertools.combinations_with_replacement(range(1, cutoff + 1), k):
        orderings = fk
        for c in Counter(ms).values():
            orderings //= math.factorial(c)
        total += Fraction(orderings * orderings, math.prod(ms))
    return total


def diagonal_enumeration(cutoff: int, k: int) -> Fraction:
    """Brute-force version of :func:`diagonal_moment` over all cutoff^(2k) tuples."""
    total = Fraction(0)
    for left in itertools.product(range(1, cutoff + 1), repeat=k):
        key = sorted(left)
        for right in itertools.product(range(1, cutoff + 1), repeat=k):
            if sorted(right) == key:
                total += Fraction(1, math.prod(left))
    return total


def moment_g_sigma(
    R: float,
    sigma: float,
    k: int,
    weight: WeightMeasure | None = None,
    policy: QuadraturePolicy | None = None,
) -> tuple[float, float]:
    """(numeric 2k-th moment of sum e(x sqrt n)/sqrt n, diagonal prediction)."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if not 0 < sigma < sigma_limit(k):
        raise DomainError(
            f"sigma={sigma} violates sigma < 2/(2^(2k-1)-1) = {sigma_limit(k):.6g} for k={k}"
        )
    spec = GSigmaSpec(R, sigma)
    measure = (weight or WeightMeasure()).scaled(R)
    policy = (policy or QuadraturePolicy()).with_frequency(k * spec.max_frequency)
    numeric = integrate_weighted(
        lambda t: np.abs(eval_g_sigma_complex(t, spec)) ** (2 * k), measure, policy
    )
    return float(numeric.value), float(diagonal_moment(spec.cutoff, k))


@dataclass(frozen=True)
class LGroup:
    m: int
    A: tuple
    B: tuple
    sum_A: int
    sum_B: int


def classify_L_zero(values: Sequence[int], tables: ArithTables) -> tuple[bool, list[LGroup]]:
    """Decide L(n) = sum_{j<=k} (sqrt n_j - sqrt n_{j+k}) = 0 exactly.

    Returns the flag and, when zero, the groups of positions sharing a
    squarefree part m with their balanced sums of square parts.
    """
    if len(values) % 2 or not values:
        raise DomainError("tuple length must be a positive even number")
    k = len(values) // 2
    terms = [(1 if j < k else -1, int(n)) for j, n in enumerate(values)]
    if not sqrt_combination_is_zero(terms):
        return False, []
    groups: dict[int, tuple[list, list, int, int]] = {}
    for j, n in enumerate(values):
        dec = squarefree_decompose(int(n), tables)
        A, B, sa, sb = groups.setdefault(dec.m, ([], [], 0, 0))
        if j < k:
            A.append(j + 1)
            sa += dec.s
        else:
            B.append(j + 1)
            sb += dec.s
        groups[dec.m] = (A, B, sa, sb)
    out = [LGroup(m, tuple(A), tuple(B), sa, sb) for m, (A, B, sa, sb) in sorted(groups.items())]
    return True, out
