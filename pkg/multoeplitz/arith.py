"""Exact arithmetic on naturals and positive rationals stored as sparse prime-exponent vectors.

A positive rational q is written uniquely as a product of prime powers with integer exponents.
Exponents are kept as sorted ``(prime, exponent)`` pairs; the position of a prime in the increasing
sequence of primes is its *prime index* (2 -> 0, 3 -> 1, 5 -> 2, ...), which is how frequencies are
matched to coordinates of the infinite torus.
"""
import logging
import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from multoeplitz.errors import DomainError, ResourceLimitError

logger = logging.getLogger(__name__)

MAX_NATURAL = 2 ** 63 - 1
PRIME_TABLE_SIZE = 1024
MAX_SIEVE = 10 ** 8

# deterministic for every n < 3.3 * 10^24
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def primes_up_to(limit: int) -> np.ndarray:
    """Sieve of Eratosthenes, all primes <= limit as int64."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    if limit > MAX_SIEVE:
        raise ResourceLimitError(f"prime sieve limit {limit} exceeds {MAX_SIEVE}")
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


PRIMES: tuple[int, ...] = tuple(int(p) for p in primes_up_to(8161))[:PRIME_TABLE_SIZE]


def nth_prime(index: int) -> int:
    """Prime with the given (0-based) index."""
    if index < 0:
        raise DomainError(f"prime index must be >= 0, got {index}")
    if index < len(PRIMES):
        return PRIMES[index]
    n = index + 1
    bound = int(n * (math.log(n) + math.log(math.log(n)))) + 10
    return int(primes_up_to(bound)[index])


@lru_cache(maxsize=4096)
def prime_index(p: int) -> int:
    """Position of the prime p in the increasing sequence of primes."""
    if p <= PRIMES[-1]:
        i = bisect_left(PRIMES, p)
        if i < len(PRIMES) and PRIMES[i] == p:
            return i
        raise DomainError(f"{p} is not prime")
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    logger.debug("extending prime table to index %s", p)
    return int(np.searchsorted(primes_up_to(p), p))


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for the 64-bit range."""
    if n < 2:
        return False
    for p in PRIMES[:13]:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of the odd composite n (Brent's cycle detection, deterministic seeds)."""
    for c in range(1, 200):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += 128
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ResourceLimitError(f"could not split {n}")


@dataclass(frozen=True, eq=False)
class FactoredRational:
    """Positive rational as sorted ``(prime, exponent)`` pairs with nonzero exponents."""
    exponents: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        previous = 1
        for p, e in self.exponents:
            if p <= previous:
                raise DomainError(f"primes must be strictly increasing, got {self.exponents}")
            if e == 0:
                raise DomainError(f"zero exponent stored for prime {p}")
            previous = p

    @cached_property
    def numerator(self) -> int:
        return math.prod(p ** e for p, e in self.exponents if e > 0)

    @cached_property
    def denominator(self) -> int:
        return math.prod(p ** -e for p, e in self.exponents if e < 0)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def indexed(self) -> tuple[tuple[int, int], ...]:
        """Exponents keyed by prime index instead of by prime."""
        return tuple((prime_index(p), e) for p, e in self.exponents)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.exponents)

    def is_natural(self) -> bool:
        return all(e > 0 for _, e in self.exponents)

    def is_unit(self) -> bool:
        return not self.exponents

    def __mul__(self, other: "FactoredRational") -> "FactoredRational":
        return rational_mul(self, other)

    def __truediv__(self, other: "FactoredRational") -> "FactoredRational":
        return rational_mul(self, rational_inv(other))

    def __invert__(self) -> "FactoredRational":
        return rational_inv(self)

    def __pow__(self, n: int) -> "FactoredRational":
        if n == 0:
            return UNIT
        return FactoredRational(tuple((p, e * n) for p, e in self.exponents))

    def __eq__(self, other):
        if not isinstance(other, FactoredRational):
            return NotImplemented
        return self.exponents == other.exponents

    def __hash__(self):
        return hash(self.exponents)

    def __lt__(self, other: "FactoredRational") -> bool:
        return self.value < other.value

    def __str__(self):
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"

    def __repr__(self):
        return f"FactoredRational({self})"


UNIT = FactoredRational()


@dataclass(frozen=True, eq=False)
class FactoredNatural(FactoredRational):
    """Natural number as sorted ``(prime, exponent)`` pairs with positive exponents."""

    def __post_init__(self):
        super().__post_init__()
        if any(e < 0 for _, e in self.exponents):
            raise DomainError(f"negative exponent in a natural: {self.exponents}")

    def reconstruct(self) -> int:
        n = self.numerator
        if n > MAX_NATURAL:
            raise DomainError(f"{n} exceeds the 64-bit natural range")
        return n

    def __repr__(self):
        return f"FactoredNatural({self})"


def _check_natural(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"expected a natural number, got {n!r}")
    n = int(n)
    if n < 1:
        raise DomainError(f"expected a natural number >= 1, got {n}")
    if n > MAX_NATURAL:
        raise DomainError(f"{n} exceeds the 64-bit natural range")
    return n


def _factor_dict(n: int) -> dict[int, int]:
    found: dict[int, int] = {}
    for p in PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        root = math.isqrt(m)
        if root * root == m:
            stack.extend((root, root))
            continue
        d = _pollard_brent(m)
        stack.extend((d, m // d))
    return found


@lru_cache(maxsize=1 << 16)
def factor(n: int) -> FactoredNatural:
    """Prime factorization of 1 <= n <= 2**63 - 1."""
    n = _check_natural(n)
    return FactoredNatural(tuple(sorted(_factor_dict(n).items())))


def _combine(a: FactoredRational, b: FactoredRational, sign: int) -> FactoredRational:
    exps = dict(a.exponents)
    for p, e in b.exponents:
        exps[p] = exps.get(p, 0) + sign * e
    return FactoredRational(tuple(sorted((p, e) for p, e in exps.items() if e)))


def ratio(j: int, k: int) -> FactoredRational:
    """j/k as a factored rational, factor(j) - factor(k) exponentwise."""
    return _combine(factor(j), factor(k), -1)


def rational_mul(a: FactoredRational, b: FactoredRational) -> FactoredRational:
    return _combine(a, b, 1)


def rational_inv(a: FactoredRational) -> FactoredRational:
    return FactoredRational(tuple((p, -e) for p, e in a.exponents))


def as_rational(value) -> FactoredRational:
    """Coerce an int, Fraction, ``"a/b"`` string or factored rational into a FactoredRational."""
    if isinstance(value, FactoredRational):
        return FactoredRational(value.exponents)
    if isinstance(value, str):
        value = Fraction(value.strip())
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return FactoredRational(factor(int(value)).exponents)
    if isinstance(value, Fraction):
        if value <= 0:
            raise DomainError(f"expected a positive rational, got {value}")
        return ratio(value.numerator, value.denominator)
    raise DomainError(f"cannot interpret {value!r} as a positive rational")


def divisor_function(m: int, n_max: int) -> np.ndarray:
    """Table of d_m(n) for 0 <= n <= n_max (entry 0 unused), built by repeated Dirichlet convolution with 1."""
    if m < 1 or n_max < 1:
        raise DomainError(f"divisor_function needs m >= 1 and n_max >= 1, got m={m}, n_max={n_max}")
    table = np.ones(n_max + 1, dtype=np.int64)
    table[0] = 0
    for order in range(2, m + 1):
        logger.debug("sieving d_%s up to %s", order, n_max)
        nxt = np.zeros_like(table)
        for d in range(1, n_max + 1):
            nxt[d::d] += table[d]
        table = nxt
    return table
