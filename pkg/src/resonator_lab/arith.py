"""Sieved arithmetic tables and the arithmetic constants of the resonator method.

Everything here is exact integer arithmetic except the constants, which are
double precision sums and products with explicit tail bounds.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import (
    ConfigError,
    DomainError,
    NumericalConsistencyError,
    ResourceError,
    TableRangeError,
)

# mu (1 byte) + r3 (8 bytes) + spf (4 bytes) per entry, plus FFT scratch.
_BYTES_PER_ENTRY = 13 + 48
DEFAULT_MEMORY_BUDGET = 3 * 2**30


@dataclass(frozen=True, eq=False)
class ArithTables:
    """Immutable sieve output.

    All three arrays have length ``limit + 1`` and are indexed by ``n``;
    ``mu[0]`` and ``spf[0..1]`` are 0 by convention.
    """

    limit: int
    mu: np.ndarray
    r3: np.ndarray
    spf: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.mu, self.r3, self.spf):
            arr.setflags(write=False)

    def check(self, n: int, what: str = "n") -> None:
        if n > self.limit:
            raise TableRangeError(f"{what}={n} exceeds sieve limit {self.limit}")

    def primes(self, upto: int | None = None) -> np.ndarray:
        upto = self.limit if upto is None else upto
        self.check(upto, "prime bound")
        n = np.arange(upto + 1)
        return n[(self.spf[: upto + 1] == n) & (n >= 2)]

    def factor(self, n: int) -> dict[int, int]:
        """Prime factorisation of ``n`` by repeated smallest-prime-factor lookup."""
        if n < 1:
            raise DomainError(f"cannot factor {n}")
        self.check(n)
        out: dict[int, int] = {}
        while n > 1:
            p = int(self.spf[n])
            out[p] = out.get(p, 0) + 1
            n //= p
        return out

    def cached(self, key, builder):
        # Derived arrays (cumulative counts, visible histograms) hang off the
        # tables so they are shared by every consumer; they are read-only too.
        if key not in self._cache:
            value = builder()
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            self._cache[key] = value
        return self._cache[key]


def _spf_sieve(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            seg = spf[p * p :: p]
            seg[seg == 0] = p
    n = np.arange(limit + 1, dtype=np.int32)
    unset = (spf == 0) & (n >= 2)
    spf[unset] = n[unset]
    return spf


def _mobius_sieve(limit: int) -> np.ndarray:
    # Multiply in the primes up to sqrt(limit); a leftover cofactor is a single
    # prime above sqrt(limit) and flips the sign once more.
    prod = np.ones(limit + 1, dtype=np.int64)
    sign = np.ones(limit + 1, dtype=np.int8)
    root = math.isqrt(limit)
    small = np.arange(root + 1)
    is_p = np.ones(root + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(root) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    for p in small[is_p]:
        p = int(p)
        prod[::p] *= p
        sign[::p] *= -1
        sign[:: p * p] = 0
    n = np.arange(limit + 1, dtype=np.int64)
    leftover = (prod != n) & (sign != 0)
    sign[leftover] *= -1
    sign[0] = 0
    return sign


def _square_weights(limit: int) -> np.ndarray:
    """r1(n): 1 at n=0, 2 at nonzero squares."""
    r1 = np.zeros(limit + 1, dtype=np.int64)
    k = np.arange(1, math.isqrt(limit) + 1)
    r1[k * k] = 2
    r1[0] = 1
    return r1


def _r2_table(limit: int) -> np.ndarray:
    root = math.isqrt(limit)
    sq = np.arange(root + 1, dtype=np.int64) ** 2
    w = np.where(sq == 0, 1, 2)
    sums = []
    weights = []
    for x in range(root + 1):
        ys = sq[sq <= limit - sq[x]]
        sums.append(sq[x] + ys)
        weights.append(w[x] * w[: len(ys)])
    return np.bincount(
        np.concatenate(sums), weights=np.concatenate(weights), minlength=limit + 1
    ).astype(np.int64)


def _r3_table(limit: int) -> np.ndarray:
    r2 = _r2_table(limit)
    r1 = _square_weights(limit)
    raw = fftconvolve(r2.astype(np.float64), r1.astype(np.float64))[: limit + 1]
    r3 = np.rint(raw)
    drift = float(np.max(np.abs(raw - r3))) if limit else 0.0
    if drift > 0.25:
        raise NumericalConsistencyError(
            f"r3 convolution rounding drift {drift:.3g} too large for exact recovery"
        )
    return r3.astype(np.int64)


def r3_direct(limit: int) -> np.ndarray:
    """r3 by slice-adding shifted copies of r2; exact, O(limit^1.5)."""
    r2 = _r2_table(limit)
    r3 = r2.copy()
    for z in range(1, math.isqrt(limit) + 1):
        r3[z * z :] += 2 * r2[: limit + 1 - z * z]
    return r3


def build_tables(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> ArithTables:
    """Sieve mu, r3 and the smallest prime factor up to ``limit``.

    r3 is the convolution of the two-square counts with the square indicator,
    done by FFT and rounded; the rounding drift is checked so the result is
    exact.
    """
    limit = int(limit)
    if limit < 2:
        raise DomainError(f"limit must be >= 2, got {limit}")
    if limit * _BYTES_PER_ENTRY > memory_budget:
        raise ResourceError(
            f"limit {limit} needs ~{limit * _BYTES_PER_ENTRY / 2**30:.1f} GiB, "
            f"budget is {memory_budget / 2**30:.1f} GiB"
        )
    return ArithTables(
        limit=limit,
        mu=_mobius_sieve(limit),
        r3=_r3_table(limit),
        spf=_spf_sieve(limit),
    )


class SquarefreeDecomposition(NamedTuple):
    n: int
    s: int
    m: int


def squarefree_decompose(n: int, tables: ArithTables) -> SquarefreeDecomposition:
    """Write ``n = s**2 * m`` with ``m`` squarefree."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    s = m = 1
    for p, e in tables.factor(n).items():
        s *= p ** (e // 2)
        m *= p ** (e % 2)
    return SquarefreeDecomposition(n, s, m)


def _squarefree_split(n: int) -> tuple[int, int]:
    # Trial division; used where no tables are at hand (small n only).
    s, m, p = 1, 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        m *= p ** (e % 2)
        p += 1
    return s, m * n


def sqrt_combination_is_zero(terms: Iterable[tuple[int, int]]) -> bool:
    """Decide exactly whether ``sum(sign * sqrt(n))`` vanishes.

    Square roots of distinct squarefree integers are linearly independent
    over the rationals, so the sum is zero iff the integer coefficients
    ``sum(sign * s)`` vanish separately for every squarefree part ``m``.
    """
    groups: dict[int, int] = {}
    for sign, n in terms:
        if sign not in (1, -1):
            raise DomainError(f"sign must be +1 or -1, got {sign}")
        if n < 1:
            raise DomainError(f"radicand must be positive, got {n}")
        s, m = _squarefree_split(n)
        groups[m] = groups.get(m, 0) + sign * s
    return all(c == 0 for c in groups.values())


def sqrt_combinations_are_zero(signs: np.ndarray, tuples: np.ndarray) -> np.ndarray:
    """Vectorised :func:`sqrt_combination_is_zero` for many tuples at once.

    ``tuples`` has shape (T, L) of positive integers; ``signs`` has shape (L,)
    or (T, L).
    """
    tuples = np.asarray(tuples, dtype=np.int64)
    signs = np.broadcast_to(np.asarray(signs, dtype=np.int64), tuples.shape)
    top = int(tuples.max())
    s_of = np.zeros(top + 1, dtype=np.int64)
    m_of = np.zeros(top + 1, dtype=np.int64)
    for n in range(1, top + 1):
        s_of[n], m_of[n] = _squarefree_split(n)
    parts, col_of = np.unique(m_of[1:], return_inverse=True)
    col = np.zeros(top + 1, dtype=np.int64)
    col[1:] = col_of
    coeff = np.zeros((tuples.shape[0], len(parts)), dtype=np.int64)
    rows = np.arange(tuples.shape[0])
    for j in range(tuples.shape[1]):
        np.add.at(coeff, (rows, col[tuples[:, j]]), signs[:, j] * s_of[tuples[:, j]])
    return ~coeff.any(axis=1)


def _require_squarefree(d: int, tables: ArithTables) -> dict[int, int]:
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    tables.check(d, "d")
    if tables.mu[d] == 0:
        raise DomainError(f"d={d} is not squarefree; v(d) formula applies to squarefree d")
    return tables.factor(d)


def v_prime(p: int) -> int:
    return 8 if p == 2 else p * p * (p * p + p - 1)


def v_formula(d: int, tables: ArithTables) -> int:
    """Solutions of x^2+y^2+z^2 = 0 mod d^2, from the multiplicative formula."""
    out = 1
    for p in _require_squarefree(d, tables):
        out *= v_prime(p)
    return out


def v_bruteforce(d: int, max_d: int = 20) -> int:
    """Count x^2+y^2+z^2 = 0 mod d^2 via the square-residue counting function."""
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    if d > max_d:
        raise ResourceError(f"v_bruteforce is O(d^4); d={d} exceeds max_d={max_d}")
    mod = d * d
    x = np.arange(mod, dtype=np.int64)
    q = np.bincount(x * x % mod, minlength=mod)
    a = np.arange(mod)
    third = (-(a[:, None] + a[None, :])) % mod
    return int(np.sum(q[:, None] * q[None, :] * q[third]))


def _is_prime_small(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def quadratic_gauss_sum(a: int, p: int) -> complex:
    """sum_{n=1}^{p^2} e(a n^2 / p^2)."""
    mod = p * p
    n = np.arange(1, mod + 1, dtype=np.int64)
    return complex(np.sum(np.exp(2j * np.pi * ((a * n * n) % mod) / mod)))


def gauss_sum_v(p: int) -> float:
    """v(p) through the cubed quadratic Gauss sums, evaluated numerically."""
    if p % 2 == 0 or not _is_prime_small(p):
        raise DomainError(f"p must be an odd prime, got {p}")
    if p > 31:
        raise ResourceError(f"gauss_sum_v costs p^4 operations; p={p} > 31")
    mod = p * p
    n = np.arange(1, mod + 1, dtype=np.int64)
    sq = n * n % mod
    inner = np.empty(mod, dtype=complex)
    for a in range(1, mod + 1):
        inner[a - 1] = np.sum(np.exp(2j * np.pi * ((a * sq) % mod) / mod))
    total = np.sum(inner**3) / mod
    if abs(total.imag) > 1e-6 * abs(total.real):
        raise NumericalConsistencyError(
            f"Gauss-sum representation of v({p}) has imaginary part {total.imag:.3g}"
        )
    return float(total.real)


@lru_cache(maxsize=None)
def _legendre_table(p: int) -> np.ndarray:
    tab = -np.ones(p, dtype=np.int64)
    tab[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
    tab[0] = 0
    return tab


def r3_scaled(m: np.ndarray, d: int, tables: ArithTables) -> np.ndarray:
    """r3(m d^2) for squarefree ``d`` using the Hecke relations.

    For odd p, r3(p^2 n) = (p + 1 - (-n|p)) r3(n) - p r3(n/p^2), and
    r3(4n) = r3(n). Only r3 up to max(m) is read from the tables.
    """
    m = np.asarray(m, dtype=np.int64)
    tables.check(int(m.max()) if m.size else 0, "m")
    primes = [p for p in _require_squarefree(d, tables) if p != 2]

    def rec(mm: np.ndarray, ps: Sequence[int]) -> np.ndarray:
        # value of r3(mm * prod(ps)^2)
        if not ps:
            return tables.r3[mm]
        p, rest = ps[0], ps[1:]
        base = rec(mm, rest)
        leg = _legendre_table(p)[(-mm) % p]
        out = (p + 1 - leg) * base
        div = mm % (p * p) == 0
        if div.any():
            out[div] -= p * rec(mm[div] // (p * p), rest)
        return out

    return rec(m, primes)


def zeta3(term_limit: int = 10**6) -> tuple[float, float]:
    """zeta(3) by a truncated sum plus Euler-Maclaurin tail.

    Returns ``(value, error_bound)``.
    """
    if term_limit < 10:
        raise DomainError(f"term_limit must be >= 10, got {term_limit}")
    L = float(term_limit)
    n = np.arange(1, term_limit + 1, dtype=np.float64)
    head = math.fsum((1.0 / n**3)[::-1])
    tail = 1 / (2 * L * L) - 1 / (2 * L**3) + 1 / (4 * L**4)
    # next Euler-Maclaurin term is f'''(L)/720 = L^-6 / 12
    bound = 1 / (12 * L**6) + 4 * float(np.finfo(float).eps)
    return head + tail, bound


def euler_product_C0(prime_limit: int, tables: ArithTables) -> tuple[float, float]:
    """(7/8) prod_{2<p<=P} (1 - (p^2+p-1)/p^4) and a bound on the missing tail.

    The omitted factor lies in [1 - 2/P, 1] because (p^2+p-1)/p^4 < 2/p^2.
    """
    if prime_limit < 3:
        raise DomainError(f"prime_limit must be >= 3, got {prime_limit}")
    p = tables.primes(prime_limit).astype(np.float64)
    p = p[p > 2]
    logs = np.log1p(-(p * p + p - 1) / p**4)
    value = 7 / 8 * math.exp(math.fsum(logs))
    return value, value * 2 / prime_limit


def euler_product_C0_exact(prime_limit: int) -> Fraction:
    primes = [q for q in range(3, prime_limit + 1) if _is_prime_small(q)]
    out = Fraction(7, 8)
    for q in primes:
        out *= 1 - Fraction(q * q + q - 1, q**4)
    return out


def euler_product_C0_display(prime_limit: int, tables: ArithTables) -> float:
    """(7/8) prod_{2<p<=P} (1 - 1/p)(1 + 1/p - 1/p^2), the other factor form."""
    p = tables.primes(prime_limit).astype(np.float64)
    p = p[p > 2]
    logs = np.log1p(-1 / p) + np.log1p(1 / p - 1 / p**2)
    return 7 / 8 * math.exp(math.fsum(logs))


def multiplicative_ratio(d_limit: int, tables: ArithTables) -> np.ndarray:
    """w[d] = mu(d) v(d) / d^6 for d <= d_limit, built from spf factorisation."""
    tables.check(d_limit, "d_limit")
    d = np.arange(d_limit + 1, dtype=np.int64)
    mu = tables.mu[: d_limit + 1].astype(np.float64)
    w = np.ones(d_limit + 1)
    rest = d.copy()
    active = (mu != 0) & (d >= 2)
    while active.any():
        p = tables.spf[rest[active]].astype(np.int64)
        pf = p.astype(np.float64)
        local = np.where(p == 2, 8 / 2.0**6, (pf * pf + pf - 1) / pf**4)
        w[active] *= local
        rest[active] //= p
        active &= rest > 1
    w *= mu
    w[0] = 0.0
    return w


def C0_series(d_limit: int, tables: ArithTables) -> tuple[float, float]:
    """sum_{d<=D} mu(d) v(d)/d^6 and a rigorous bound on the omitted tail.

    |v(d)/d^6| <= sigma(d)/d^3 for squarefree d, and
    sum_{d>D} sigma(d)/d^3 <= zeta(2)/D + (2 + log D)/D^2 + zeta(2)/D^2.
    """
    w = multiplicative_ratio(d_limit, tables)
    D = float(d_limit)
    z2 = math.pi**2 / 6
    bound = z2 / D + (2 + math.log(D)) / D**2 + z2 / D**2
    return math.fsum(w), bound


@dataclass(frozen=True)
class ConstantsReport:
    zeta3: float
    zeta3_error: float
    C0: float
    C0_tail_bound: float
    C0_alt: float
    C0_alt_tail_bound: float
    C0_display: float
    seven_over_pi2: float
    first_moment: float
    C: float

    @property
    def consistent(self) -> bool:
        return abs(self.C0 - self.C0_alt) <= self.C0_tail_bound + self.C0_alt_tail_bound

    @property
    def relative_gap_to_seven_over_pi2(self) -> float:
        return abs(self.C0 - self.seven_over_pi2) / self.seven_over_pi2


def constants_report(
    tables: ArithTables,
    prime_limit: int,
    d_limit: int,
    first_moment: float = 1.5,
    zeta_terms: int = 10**6,
) -> ConstantsReport:
    """Bundle zeta(3), C0 (two routes), the alternative factor form, and C.

    ``first_moment`` is the integral of t psi(t) for the weight in use.
    """
    z, zerr = zeta3(zeta_terms)
    c0, c0_tail = euler_product_C0(prime_limit, tables)
    alt, alt_tail = C0_series(d_limit, tables)
    return ConstantsReport(
        zeta3=z,
        zeta3_error=zerr,
        C0=c0,
        C0_tail_bound=c0_tail,
        C0_alt=alt,
        C0_alt_tail_bound=alt_tail,
        C0_display=euler_product_C0_display(prime_limit, tables),
        seven_over_pi2=7 / math.pi**2,
        first_moment=first_moment,
        C=c0 * first_moment,
    )


# ------------------------------------------------------------ on-disk cache

SIEVE_MAGIC = b"RLAB1"


def save_tables(tables: ArithTables, path) -> None:
    """Write ``RLAB1``, the limit as <u8, then mu (i1), r3 (<i8), spf (<i4)."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(SIEVE_MAGIC)
        fh.write(struct.pack("<Q", tables.limit))
        fh.write(tables.mu.astype("i1").tobytes())
        fh.write(tables.r3.astype("<i8").tobytes())
        fh.write(tables.spf.astype("<i4").tobytes())
    os.replace(tmp, path)


def load_tables(path) -> ArithTables:
    raw = Path(path).read_bytes()
    if raw[:5] != SIEVE_MAGIC:
        raise ConfigError(f"{path}: not a sieve cache (bad magic)")
    (limit,) = struct.unpack_from("<Q", raw, 5)
    n = limit + 1
    if len(raw) != 13 + 13 * n:
        raise ConfigError(f"{path}: truncated sieve cache for limit {limit}")
    off = 13
    mu = np.frombuffer(raw, dtype="i1", count=n, offset=off).copy()
    off += n
    r3 = np.frombuffer(raw, dtype="<i8", count=n, offset=off).astype(np.int64)
    off += 8 * n
    spf = np.frombuffer(raw, dtype="<i4", count=n, offset=off).astype(np.int32)
    return ArithTables(limit=int(limit), mu=mu, r3=r3, spf=spf)


def cached_tables(limit: int, directory=None, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> ArithTables:
    """build_tables, reusing the smallest cached sieve with at least ``limit`` entries.

    ``directory`` defaults to $RESONATOR_LAB_SIEVE_DIR; without either the
    tables are simply built.
    """
    directory = directory or os.environ.get("RESONATOR_LAB_SIEVE_DIR")
    if not directory:
        return build_tables(limit, memory_budget)
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    found = []
    for f in d.glob("sieve_*.bin"):
        try:
            found.append((int(f.stem.split("_")[1]), f))
        except ValueError:
            continue
    usable = sorted(x for x in found if x[0] >= limit)
    if usable:
        return load_tables(usable[0][1])
    tables = build_tables(limit, memory_budget)
    save_tables(tables, d / f"sieve_{limit}.bin")
    return tables
