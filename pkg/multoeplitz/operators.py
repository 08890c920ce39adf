"""Dense truncated Toeplitz matrices T_sigma(phi) over finite index sets.

Entries are looked up in the symbol's coefficient map, one frequency at a time: for a frequency q the
pairs (j, k) of sigma with j = q * k (or j = k + alpha) receive the coefficient c(q).
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
import scipy.sparse

from multoeplitz.errors import DomainError, ResourceLimitError
from multoeplitz.index_sets import IndexSet, label_array, shift_count
from multoeplitz.symbol import MULTIPLICATIVE, Symbol, additive, frequency_inverse, power

logger = logging.getLogger(__name__)

DENSE_CAP = 4096
ORACLE_CAP = 10 ** 5


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Dense #sigma x #sigma matrix together with its index labels."""
    labels: IndexSet
    entries: np.ndarray
    symbol_ref: str = ""

    @property
    def size(self) -> int:
        return len(self.labels)

    def scale(self) -> float:
        return max(float(np.abs(self.entries).max()), 1.0) if self.entries.size else 1.0

    def is_hermitian(self, tol: float = 0.0) -> bool:
        deviation = np.abs(self.entries - self.entries.conj().T)
        return bool(deviation.max(initial=0.0) <= tol * self.scale())

    def principal(self, sub: IndexSet) -> "TruncatedOperator":
        """Principal submatrix on a subset of the labels."""
        positions = self.labels.locate(sub.elements)
        if np.any(positions < 0):
            raise DomainError(f"{sub!r} is not contained in {self.labels!r}")
        return TruncatedOperator(sub, self.entries[np.ix_(positions, positions)], self.symbol_ref)

    def to_csv(self, path: str | Path):
        """Row-major dump, every entry written as a ``re,im`` pair."""
        n = self.size
        pairs = np.empty((n, 2 * n), dtype=np.float64)
        pairs[:, 0::2] = self.entries.real
        pairs[:, 1::2] = self.entries.imag
        pd.DataFrame(pairs).to_csv(path, header=False, index=False, float_format="%.17g")
        logger.info("wrote %sx%s matrix to %s", n, n, path)


def _check_kinds(s: Symbol, sigma: IndexSet):
    if s.kind != sigma.kind:
        raise DomainError(f"{s.kind} symbol cannot be truncated to a {sigma.kind} index set")


def truncate(s: Symbol, sigma: IndexSet, max_size: int = DENSE_CAP) -> TruncatedOperator:
    """T_sigma(s) with entries[j, k] = c(label_j / label_k) (or c(label_j - label_k))."""
    _check_kinds(s, sigma)
    n = len(sigma)
    if n > max_size:
        raise ResourceLimitError(f"#sigma = {n} exceeds the dense cap {max_size}")
    entries = np.zeros((n, n), dtype=np.complex128)
    for freq, c in s.items():
        source, image = sigma.shift_pairs(freq)
        entries[image, source] = c
    return TruncatedOperator(sigma, entries, repr(s))


def compressed_power(s: Symbol, sigma: IndexSet, n: int, max_size: int = DENSE_CAP) -> TruncatedOperator:
    """pi_sigma L(phi)^n pi_sigma, computed as T_sigma(phi^n)."""
    if n < 1:
        raise DomainError(f"compressed_power needs n >= 1, got {n}")
    operator = truncate(power(s, n), sigma, max_size=max_size)
    return TruncatedOperator(sigma, operator.entries, f"({s!r})^{n}")


def enlarged_set(s: Symbol, sigma: IndexSet, steps: int, cap: int = ORACLE_CAP) -> tuple[IndexSet, np.ndarray]:
    """sigma, sigma S, ..., sigma S^steps for S = supp(s), moved into N (or Z_+^d) by one common shift.

    Entries of a Toeplitz matrix only depend on label ratios (differences), so rescaling (translating) the
    whole enlarged set leaves every matrix unchanged. Returns the moved set and the positions of sigma in it.
    """
    _check_kinds(s, sigma)
    if s.kind.is_additive:
        support = [np.array(f, dtype=object) for f in s.support]
        points = {tuple(int(x) for x in row) for row in sigma.labels()}
        grow = lambda label, f: tuple(int(x) for x in np.add(label, f))
    else:
        support = [f.value for f in s.support]
        points = {Fraction(v) for v in sigma.labels()}
        grow = lambda label, f: label * f
    frontier = set(points)
    for step in range(steps):
        frontier = {grow(label, f) for label in frontier for f in support} - points
        points |= frontier
        if len(points) > cap:
            raise ResourceLimitError(f"enlarged set has more than {cap} labels after {step + 1} steps")
    if s.kind.is_additive:
        offset = np.min(np.array(sorted(points), dtype=object), axis=0)
        moved = [tuple(int(x) for x in np.subtract(p, offset)) for p in points]
        plus = IndexSet(additive(s.kind.dim), moved, name=f"enlarged({sigma.name})", cap=cap)
        inner = label_array([tuple(int(x) for x in np.subtract(p, offset)) for p in sigma.labels()])
    else:
        scale = math.lcm(*(q.denominator for q in points))
        plus = IndexSet(MULTIPLICATIVE, [int(q * scale) for q in points], name=f"enlarged({sigma.name})", cap=cap)
        inner = label_array([v * scale for v in sigma.labels()])
    return plus, plus.locate(inner)


def enlarged_set_power(s: Symbol, sigma: IndexSet, n: int, cap: int = ORACLE_CAP) -> TruncatedOperator:
    """(T_{sigma+}(s))^n restricted to sigma, the matrix-product route to pi L(phi)^n pi.

    Every path of n steps starting in sigma stays inside sigma+ for its first n - 1 steps, so no
    contribution is lost. The products run on a sparse copy of T_{sigma+}(s).
    """
    if n < 1:
        raise DomainError(f"enlarged_set_power needs n >= 1, got {n}")
    if len(s) == 0:
        return TruncatedOperator(sigma, np.zeros((len(sigma), len(sigma)), dtype=np.complex128), "oracle(0)")
    plus, inner = enlarged_set(s, sigma, n - 1, cap=cap)
    rows, cols, data = [], [], []
    for freq, c in s.items():
        source, image = plus.shift_pairs(freq)
        rows.append(image)
        cols.append(source)
        data.append(np.full(source.size, c, dtype=np.complex128))
    m = len(plus)
    laurent = scipy.sparse.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                                      shape=(m, m))
    columns = laurent[:, inner]
    for _ in range(n - 1):
        columns = laurent @ columns
    logger.debug("enlarged-set oracle: #sigma=%s, #sigma+=%s, n=%s", len(sigma), m, n)
    return TruncatedOperator(sigma, columns[inner, :].toarray(), f"oracle({s!r})^{n}")


def hs_offdiagonal_norm_sq(s: Symbol, sigma: IndexSet) -> float:
    """(1/#sigma) ||pi L(phi) (1 - pi)||_{S_2}^2 = sum_r |c(r)|^2 (1 - #{k in sigma : k / r in sigma} / #sigma)."""
    _check_kinds(s, sigma)
    n = len(sigma)
    total = 0.0
    for freq, c in s.items():
        leaked = n - shift_count(sigma, frequency_inverse(s.kind, freq))
        total += abs(c) ** 2 * leaked
    return total / n


def gram_matrix(a: Mapping[int, complex] | Sequence[complex], sigma: IndexSet) -> TruncatedOperator:
    """Gram matrix <f_j, f_k> of the dilates f_j(x) = f(jx), f = sum_n a_n sqrt(2) sin(pi n x).

    Entry (j, k) = sum_{jm = kn} a_m conj(a_n), summed pair by pair over the coefficients.
    """
    if sigma.kind.is_additive:
        raise DomainError("gram_matrix needs a multiplicative index set")
    if not isinstance(a, Mapping):
        a = {n + 1: c for n, c in enumerate(a)}
    terms = sorted((int(n), complex(c)) for n, c in a.items() if c != 0)
    size = len(sigma)
    if size > DENSE_CAP:
        raise ResourceLimitError(f"#sigma = {size} exceeds the dense cap {DENSE_CAP}")
    entries = np.zeros((size, size), dtype=np.complex128)
    for m, am in terms:
        for n, an in terms:
            # j m = k n  <=>  j = (n / m) k
            source, image = sigma.shift_pairs(Fraction(n, m))
            entries[image, source] += am * an.conjugate()
    return TruncatedOperator(sigma, entries, f"gram({len(terms)} dilation coefficients)")
