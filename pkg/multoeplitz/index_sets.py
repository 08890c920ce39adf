"""Finite index sets, their generators, and exact Folner-ratio diagnostics.

Multiplicative sets are finite subsets of N acted on by Q_+ (k -> qk); additive sets are finite
subsets of Z_+^d acted on by Z^d (k -> k + alpha). Counts are exact integers throughout.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Literal, Sequence

import numpy as np
import pandas as pd

from multoeplitz.arith import FactoredRational, as_rational, nth_prime
from multoeplitz.errors import DomainError, ResourceLimitError
from multoeplitz.symbol import MULTIPLICATIVE, GroupKind, additive

logger = logging.getLogger(__name__)

SET_CAP = 10 ** 6
INT64_MAX = np.iinfo(np.int64).max


def label_array(values: list) -> np.ndarray:
    """int64 array when every value fits, object array of Python ints otherwise."""
    if not values:
        return np.zeros(0, dtype=np.int64)
    flat = values if not isinstance(values[0], tuple) else [v for row in values for v in row]
    fits = max(abs(v) for v in flat) <= INT64_MAX // 4
    array = np.array(values, dtype=np.int64 if fits else object)
    return array


class IndexSet:
    """Sorted, duplicate-free, nonempty finite index set."""

    def __init__(self, kind: GroupKind, elements: Iterable, name: str = "", cap: int = SET_CAP):
        self.kind = kind
        self.name = name
        if kind.is_additive:
            labels = sorted({self._vector(e) for e in elements})
            if any(x < 0 for v in labels for x in v):
                raise DomainError("additive index sets live in Z_+^d")
        else:
            labels = sorted({int(e) for e in elements})
            if labels and labels[0] < 1:
                raise DomainError("multiplicative index sets live in N = {1, 2, ...}")
        if not labels:
            raise DomainError("index sets must be nonempty")
        if len(labels) > cap:
            raise ResourceLimitError(f"index set of {len(labels)} elements exceeds {cap}")
        self.elements = label_array(labels)
        self._position: dict | None = None
        self._encoding: tuple[np.ndarray, np.ndarray] | None = None

    def _vector(self, e) -> tuple[int, ...]:
        vector = (int(e),) if isinstance(e, (int, np.integer)) else tuple(int(x) for x in e)
        if len(vector) != self.kind.dim:
            raise DomainError(f"element {vector} does not have dimension {self.kind.dim}")
        return vector

    def __len__(self):
        return self.elements.shape[0]

    def __iter__(self):
        return iter(self.labels())

    def __contains__(self, item) -> bool:
        target = [self._vector(item)] if self.kind.is_additive else [int(item)]
        return bool(self.locate(label_array(target))[0] >= 0)

    def __repr__(self):
        return f"IndexSet({self.kind}, size={len(self)}, name={self.name!r})"

    def labels(self) -> list:
        if self.kind.is_additive:
            return [tuple(int(x) for x in row) for row in self.elements]
        return [int(x) for x in self.elements]

    def subset(self, mask: np.ndarray, name: str = "") -> "IndexSet":
        return IndexSet(self.kind, [self.labels()[i] for i in np.flatnonzero(mask)], name=name or self.name)

    def locate(self, targets: np.ndarray) -> np.ndarray:
        """Positions of the targets in the set, -1 where absent."""
        targets = np.asarray(targets)
        if targets.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        if not self.kind.is_additive:
            return _search(self.elements, targets)
        if self.kind.dim == 1:
            return _search(self.elements[:, 0], targets[:, 0])
        encoding = self._mixed_radix()
        if encoding is None:
            if self._position is None:
                self._position = {v: i for i, v in enumerate(self.labels())}
            return np.array([self._position.get(tuple(int(x) for x in row), -1) for row in targets], dtype=np.int64)
        keys, radix = encoding
        inside = np.all((targets >= 0) & (targets < radix), axis=1)
        out = np.full(targets.shape[0], -1, dtype=np.int64)
        if inside.any():
            encoded = np.ravel_multi_index(targets[inside].astype(np.int64).T, tuple(radix))
            out[inside] = _search(keys, encoded)
        return out

    def _mixed_radix(self):
        if self._encoding is None and self.elements.dtype != object:
            radix = self.elements.max(axis=0) + 1
            if math.prod(int(r) for r in radix) < INT64_MAX // 4:
                keys = np.ravel_multi_index(self.elements.T, tuple(radix))
                self._encoding = (keys, radix)
        return self._encoding

    def shift_pairs(self, shift) -> tuple[np.ndarray, np.ndarray]:
        """Positions (source, image) of the k in the set whose shifted image also lies in the set."""
        if self.kind.is_additive:
            vector = np.array(self._shift_vector(shift), dtype=object)
            if self.elements.dtype != object and max(abs(int(v)) for v in vector) < INT64_MAX // 4:
                vector = vector.astype(np.int64)
            targets = self.elements + vector
            source = np.arange(len(self))
        else:
            q = as_rational(shift) if not isinstance(shift, FactoredRational) else shift
            a, b = q.numerator, q.denominator
            elements = self.elements if max(a, b) <= INT64_MAX // 4 else self.elements.astype(object)
            source = np.flatnonzero((elements % b == 0).astype(bool))
            quotient = elements[source] // b
            if quotient.dtype != object and quotient.size and int(quotient.max()) * a > INT64_MAX // 4:
                quotient = quotient.astype(object)
            targets = quotient * a
        image = self.locate(targets)
        hit = image >= 0
        return source[hit], image[hit]

    def _shift_vector(self, shift) -> tuple[int, ...]:
        if isinstance(shift, (int, np.integer)):
            shift = (int(shift),)
        vector = tuple(int(x) for x in shift)
        if len(vector) != self.kind.dim:
            raise DomainError(f"shift {vector} does not have dimension {self.kind.dim}")
        return vector


def _search(sorted_keys: np.ndarray, targets: np.ndarray) -> np.ndarray:
    if sorted_keys.dtype == object or targets.dtype == object:
        sorted_keys = sorted_keys.astype(object)
        targets = targets.astype(object)
    idx = np.searchsorted(sorted_keys, targets)
    clipped = np.minimum(idx, len(sorted_keys) - 1)
    found = (idx < len(sorted_keys)) & (sorted_keys[clipped] == targets).astype(bool)
    return np.where(found, clipped, -1).astype(np.int64)


def shift_count(sigma: IndexSet, shift) -> int:
    """#{k in sigma : shift(k) in sigma}, exact."""
    source, _ = sigma.shift_pairs(shift)
    return int(source.size)


def folner_ratio(sigma: IndexSet, shift) -> float:
    """Shift-overlap fraction #{k in sigma : shift(k) in sigma} / #sigma."""
    return shift_count(sigma, shift) / len(sigma)


def folner_defect(sequence: Sequence[IndexSet], shifts: Sequence,
                  schedule: Sequence[int] | None = None) -> pd.DataFrame:
    """Table of 1 - folner_ratio for every set of the sequence and every shift."""
    schedule = schedule if schedule is not None else [len(sigma) for sigma in sequence]
    rows = []
    for n, sigma in zip(schedule, sequence):
        for shift in shifts:
            count = shift_count(sigma, shift)
            rows.append({"n": n, "size": len(sigma), "shift": str(shift), "count": count,
                         "defect": 1.0 - count / len(sigma)})
    return pd.DataFrame(rows, columns=["n", "size", "shift", "count", "defect"])


def is_empirically_folner(table: pd.DataFrame, eps: float = 1e-2) -> bool:
    """Defects nonincreasing along the sequence and below eps at the largest set, for every shift."""
    for _, group in table.groupby("shift", sort=False):
        defects = group["defect"].to_numpy()
        if np.any(np.diff(defects) > 1e-15) or defects[-1] >= eps:
            return False
    return True


def natural_segment(n: int) -> IndexSet:
    """{1, ..., n} in N."""
    if n < 1:
        raise DomainError(f"natural segment needs n >= 1, got {n}")
    return IndexSet(MULTIPLICATIVE, range(1, n + 1), name=f"natural-segment({n})")


def additive_segment(n: int) -> IndexSet:
    """{0, ..., n-1} in Z_+."""
    if n < 1:
        raise DomainError(f"additive segment needs n >= 1, got {n}")
    return IndexSet(additive(1), range(n), name=f"additive-segment({n})")


def additive_box(bounds: Sequence[int]) -> IndexSet:
    """{0..A_1} x ... x {0..A_d} in Z_+^d."""
    _check_bounds(bounds)
    points = itertools.product(*(range(a + 1) for a in bounds))
    return IndexSet(additive(len(bounds)), points, name=f"additive-box{tuple(bounds)}")


def even_segment(n: int, ell: int = 2) -> IndexSet:
    """{0, ell, 2 ell, ..., n ell}."""
    if n < 0 or ell < 1:
        raise DomainError(f"even segment needs n >= 0 and ell >= 1, got n={n}, ell={ell}")
    return IndexSet(additive(1), range(0, n * ell + 1, ell), name=f"even-segment({n},{ell})")


def sublattice_box(ells: Sequence[int], bounds: Sequence[int]) -> IndexSet:
    """{(ell_1 a_1, ..., ell_d a_d) : 0 <= a_i <= A_i}."""
    _check_bounds(bounds)
    if len(ells) != len(bounds) or any(e < 1 for e in ells):
        raise DomainError(f"need {len(bounds)} positive sublattice steps, got {tuple(ells)}")
    points = itertools.product(*(range(0, a * e + 1, e) for a, e in zip(bounds, ells)))
    return IndexSet(additive(len(bounds)), points, name=f"sublattice-box{tuple(ells)}{tuple(bounds)}")


def sparse_powers(n: int, base: int = 3) -> IndexSet:
    """{1, base, base^2, ..., base^(n-1)} in Z_+."""
    if n < 1 or base < 2:
        raise DomainError(f"sparse powers need n >= 1 and base >= 2, got n={n}, base={base}")
    return IndexSet(additive(1), (base ** j for j in range(n)), name=f"sparse-powers({n},{base})")


def union_with(sigma: IndexSet, extra: Iterable) -> IndexSet:
    """sigma together with a finite set of extra indices."""
    extra = list(extra)
    return IndexSet(sigma.kind, itertools.chain(sigma.labels(), extra), name=f"{sigma.name}+{len(extra)}")


def exponent_box(*bounds: int) -> IndexSet:
    """{p^alpha : 0 <= alpha_j <= A_j} over the first len(bounds) primes; all bounds 0 gives {1}."""
    _check_bounds(bounds)
    size = math.prod(a + 1 for a in bounds)
    if size > SET_CAP:
        raise ResourceLimitError(f"exponent box of {size} elements exceeds {SET_CAP}")
    values = [1]
    for j, a in enumerate(bounds):
        p = nth_prime(j)
        values = [v * p ** e for v in values for e in range(a + 1)]
    return IndexSet(MULTIPLICATIVE, values, name=f"exponent-box{tuple(bounds)}")


def embedded_lattice(lattice: IndexSet) -> IndexSet:
    """Image of a subset of Z_+^d under j -> p_1^j_1 ... p_d^j_d."""
    if not lattice.kind.is_additive:
        raise DomainError("embedded_lattice needs an additive set")
    primes = [nth_prime(i) for i in range(lattice.kind.dim)]
    values = [math.prod(p ** j for p, j in zip(primes, point)) for point in lattice.labels()]
    return IndexSet(MULTIPLICATIVE, values, name=f"embedded({lattice.name})")


def embedded_lattice_box(d: int, bounds: Sequence[int]) -> IndexSet:
    if len(bounds) != d:
        raise DomainError(f"need {d} bounds, got {tuple(bounds)}")
    return embedded_lattice(additive_box(bounds))


def alternating(first: Callable[[int], IndexSet], second: Callable[[int], IndexSet], count: int,
                start: int = 8, schedule: Sequence[int] | None = None) -> list[IndexSet]:
    """first(N_1), second(N_2), first(N_3), ...

    Without an explicit schedule, each N_k is the smallest doubling of N_{k-1} whose set is at least
    twice as large as the previous set.
    """
    builders = (first, second)
    if schedule is not None:
        return [builders[k % 2](n) for k, n in enumerate(schedule)]
    sets = [first(start)]
    n = start
    for k in range(1, count):
        n *= 2
        candidate = builders[k % 2](n)
        while len(candidate) < 2 * len(sets[-1]):
            n *= 2
            candidate = builders[k % 2](n)
        sets.append(candidate)
    return sets


def _check_bounds(bounds: Sequence[int]):
    if not bounds or any(int(a) < 0 for a in bounds):
        raise DomainError(f"bounds must be nonnegative, got {tuple(bounds)}")


FamilyName = Literal["natural-segment", "additive-segment", "additive-box", "even-segment", "sublattice-box",
                     "sparse-powers", "exponent-box", "embedded-lattice-box", "alternating", "explicit", "augmented"]


@dataclass(frozen=True)
class SetFamily:
    """A named index-set family N -> sigma_N, the unit the limit predictions dispatch on."""
    name: FamilyName
    ell: int = 2
    base: int = 3
    dim: int = 1
    ells: tuple[int, ...] = ()
    weights: tuple[float, ...] = ()
    extra: tuple = ()
    members: tuple["SetFamily", ...] = ()
    explicit: tuple[IndexSet, ...] = field(default=(), compare=False)

    @property
    def kind(self) -> GroupKind:
        if self.name == "alternating":
            return self.members[0].kind
        if self.name == "explicit":
            return self.explicit[0].kind
        if self.name == "augmented":
            return additive(1)
        if self.name in ("natural-segment", "exponent-box", "embedded-lattice-box"):
            return MULTIPLICATIVE
        if self.name in ("additive-box", "sublattice-box"):
            return additive(self.dim)
        return additive(1)

    @property
    def axes(self) -> int:
        """Number of box axes (primes for exponent boxes)."""
        return len(self.weights) or self.dim

    def _bounds(self, n: int) -> tuple[int, ...]:
        weights = self.weights or (1.0,) * self.dim
        return tuple(max(0, int(math.floor(n * w))) for w in weights)

    def build(self, n: int, position: int = 0) -> IndexSet:
        """The set for schedule value n (position selects the member of alternating families)."""
        match self.name:
            case "natural-segment":
                sigma = natural_segment(n)
            case "additive-segment":
                sigma = additive_segment(n)
            case "additive-box":
                sigma = additive_box(tuple(max(b - 1, 0) for b in self._bounds(n)))
            case "even-segment":
                sigma = even_segment(n, self.ell)
            case "sublattice-box":
                sigma = sublattice_box(self.ells or (self.ell,) * self.dim, self._bounds(n))
            case "sparse-powers":
                sigma = sparse_powers(n, self.base)
            case "exponent-box" | "embedded-lattice-box":
                sigma = exponent_box(*self._bounds(n))
            case "alternating":
                sigma = self.members[position % len(self.members)].build(n)
            case "explicit" | "augmented":
                sigma = self.explicit[position]
            case _:
                raise DomainError(f"unknown set family {self.name!r}")
        if self.extra:
            sigma = union_with(sigma, self.extra)
        return sigma

    def sequence(self, schedule: Sequence[int]) -> list[IndexSet]:
        return [self.build(n, position=k) for k, n in enumerate(schedule)]


def read_set_file(path: str | Path, kind: GroupKind = MULTIPLICATIVE) -> list[IndexSet]:
    """One set per line, whitespace-separated naturals; blank lines and ``#`` comments skipped."""
    sets = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values = [int(token) for token in line.split()]
            except ValueError as e:
                raise DomainError(f"{path}:{lineno}: {e}") from e
            sets.append(IndexSet(kind, values, name=f"{Path(path).name}:{lineno}"))
    if not sets:
        raise DomainError(f"{path}: no sets found")
    return sets


def format_set(sigma: IndexSet) -> str:
    if sigma.kind.is_additive and sigma.kind.dim > 1:
        raise DomainError("only one-dimensional sets have a text form")
    return " ".join(str(v if isinstance(v, int) else v[0]) for v in sigma.labels())


def as_shift(kind: GroupKind, value) -> tuple[int, ...] | FactoredRational:
    if kind.is_additive:
        return (int(value),) if isinstance(value, (int, np.integer)) else tuple(int(v) for v in value)
    return as_rational(value)
