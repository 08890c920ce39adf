"""Finitely supported symbols (trigonometric polynomials) on the finite and the infinite torus.

A symbol is a finite map frequency -> complex Fourier coefficient. Additive symbols live on T^d and
carry integer vectors as frequencies; multiplicative symbols live on T^infinity and carry positive
rationals, the coordinate z_j belonging to the j-th prime.
"""
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterator, Literal, Mapping, Sequence

import numpy as np

from multoeplitz.arith import (UNIT, FactoredRational, as_rational, factor, nth_prime, prime_index,
                               rational_inv, rational_mul)
from multoeplitz.errors import DomainError, ResourceLimitError

logger = logging.getLogger(__name__)

PRUNE_TOL = 1e-15
UNIT_MODULUS_TOL = 1e-9
SUPPORT_CAP = 10 ** 6
GRID_CHUNK = 1 << 15

Frequency = tuple[int, ...] | FactoredRational


@dataclass(frozen=True)
class GroupKind:
    """Frequency group of a symbol: Z^d (additive) or Q_+ (multiplicative)."""
    name: Literal["additive", "multiplicative"]
    dim: int = 0

    @property
    def is_additive(self) -> bool:
        return self.name == "additive"

    def __str__(self):
        return f"additive(d={self.dim})" if self.is_additive else "multiplicative"


MULTIPLICATIVE = GroupKind("multiplicative")


def additive(d: int = 1) -> GroupKind:
    if d < 1:
        raise DomainError(f"additive dimension must be >= 1, got {d}")
    return GroupKind("additive", d)


def coerce_frequency(kind: GroupKind, value) -> Frequency:
    """Canonical frequency key: a d-tuple of ints (additive) or a FactoredRational (multiplicative)."""
    if kind.is_additive:
        if isinstance(value, (int, np.integer)):
            value = (int(value),)
        vector = tuple(int(v) for v in value)
        if len(vector) != kind.dim:
            raise DomainError(f"frequency {vector} does not have dimension {kind.dim}")
        return vector
    if isinstance(value, tuple) and not isinstance(value, FactoredRational):
        raise DomainError(f"additive frequency {value} in a multiplicative symbol")
    return as_rational(value)


def frequency_product(kind: GroupKind, a: Frequency, b: Frequency) -> Frequency:
    if kind.is_additive:
        return tuple(x + y for x, y in zip(a, b))
    return rational_mul(a, b)


def frequency_inverse(kind: GroupKind, a: Frequency) -> Frequency:
    if kind.is_additive:
        return tuple(-x for x in a)
    return rational_inv(a)


def identity_frequency(kind: GroupKind) -> Frequency:
    return (0,) * kind.dim if kind.is_additive else UNIT


def _order_key(kind: GroupKind, freq: Frequency):
    return freq if kind.is_additive else freq.value


def frequency_exponents(kind: GroupKind, freq: Frequency) -> dict[int, int]:
    """Nonzero exponents keyed by variable: coordinate (additive) or prime (multiplicative)."""
    if kind.is_additive:
        return {i: e for i, e in enumerate(freq) if e}
    return dict(freq.exponents)


class Symbol:
    """Trigonometric polynomial given by its finitely many nonzero Fourier coefficients."""

    def __init__(self, kind: GroupKind, coeffs: Mapping | None = None, prune: float = PRUNE_TOL):
        self.kind = kind
        accumulated: dict[Frequency, complex] = {}
        for freq, c in (coeffs or {}).items():
            key = coerce_frequency(kind, freq)
            accumulated[key] = accumulated.get(key, 0j) + complex(c)
        ordered = sorted(accumulated.items(), key=lambda item: _order_key(kind, item[0]))
        self._coeffs = {k: c for k, c in ordered if abs(c) >= prune}

    @property
    def coeffs(self) -> Mapping[Frequency, complex]:
        return MappingProxyType(self._coeffs)

    @property
    def support(self) -> tuple[Frequency, ...]:
        return tuple(self._coeffs)

    def coeff(self, freq) -> complex:
        return self._coeffs.get(coerce_frequency(self.kind, freq), 0j)

    def items(self) -> Iterator[tuple[Frequency, complex]]:
        return iter(self._coeffs.items())

    def __len__(self):
        return len(self._coeffs)

    def __bool__(self):
        return bool(self._coeffs)

    def __eq__(self, other):
        if not isinstance(other, Symbol):
            return NotImplemented
        return self.kind == other.kind and self._coeffs == other._coeffs

    __hash__ = None

    def __repr__(self):
        terms = ", ".join(f"{_format_frequency(self.kind, k)}: {c:.6g}" for k, c in list(self.items())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"Symbol({self.kind}, {{{terms}{more}}})"

    def __add__(self, other: "Symbol") -> "Symbol":
        _check_same_kind(self, other)
        merged = dict(self._coeffs)
        for k, c in other.items():
            merged[k] = merged.get(k, 0j) + c
        return Symbol(self.kind, merged)

    def __sub__(self, other: "Symbol") -> "Symbol":
        return self + other.scale(-1)

    def __mul__(self, other: "Symbol") -> "Symbol":
        return convolve(self, other)

    def scale(self, factor_: complex) -> "Symbol":
        return Symbol(self.kind, {k: factor_ * c for k, c in self.items()})

    def allclose(self, other: "Symbol", atol: float = 1e-12) -> bool:
        if self.kind != other.kind:
            return False
        keys = set(self._coeffs) | set(other._coeffs)
        return all(abs(self._coeffs.get(k, 0j) - other._coeffs.get(k, 0j)) <= atol for k in keys)

    def constant_term(self) -> complex:
        return self._coeffs.get(identity_frequency(self.kind), 0j)

    def l1_norm(self) -> float:
        """Sum of |coefficients|, a certified bound for sup |phi|."""
        return float(sum(abs(c) for c in self._coeffs.values()))

    def l2_norm_sq(self) -> float:
        return float(sum(abs(c) ** 2 for c in self._coeffs.values()))

    def is_hermitian(self, tol: float = 0.0) -> bool:
        """True when coeff(inverse frequency) == conj(coeff) for all frequencies, i.e. phi is real."""
        scale = max((abs(c) for c in self._coeffs.values()), default=0.0)
        for k, c in self._coeffs.items():
            partner = self._coeffs.get(frequency_inverse(self.kind, k), 0j)
            if abs(partner - c.conjugate()) > tol * max(scale, 1.0):
                return False
        return True

    def hermitized(self) -> "Symbol":
        """Nearest hermitian symbol: each pair {k, 1/k} is replaced by its conjugate-symmetric average."""
        fixed: dict[Frequency, complex] = {}
        for k, c in self._coeffs.items():
            inverse = frequency_inverse(self.kind, k)
            if k == inverse:
                fixed[k] = complex(c.real, 0.0)
                continue
            partner = self._coeffs.get(inverse, 0j)
            if inverse in self._coeffs:
                c = (c + partner.conjugate()) / 2
            fixed[k] = c
            fixed[inverse] = c.conjugate()
        return Symbol(self.kind, fixed)

    def variables(self) -> tuple[int, ...]:
        """Active variables: coordinates (additive) or primes (multiplicative) with nonzero exponents."""
        found = set()
        for k in self._coeffs:
            found.update(frequency_exponents(self.kind, k))
        return tuple(sorted(found))

    def degrees(self) -> dict[int, int]:
        """Max |exponent| per active variable."""
        degrees: dict[int, int] = {}
        for k in self._coeffs:
            for var, e in frequency_exponents(self.kind, k).items():
                degrees[var] = max(degrees.get(var, 0), abs(e))
        return degrees

    def exponent_matrix(self, variables: Sequence[int]) -> np.ndarray:
        column = {v: i for i, v in enumerate(variables)}
        matrix = np.zeros((len(self), len(variables)), dtype=np.int64)
        for row, k in enumerate(self._coeffs):
            for var, e in frequency_exponents(self.kind, k).items():
                if var not in column:
                    raise DomainError(f"variable {var} of frequency {k} is not among {tuple(variables)}")
                matrix[row, column[var]] = e
        return matrix

    def coefficient_vector(self) -> np.ndarray:
        return np.fromiter(self._coeffs.values(), dtype=np.complex128, count=len(self))


def _check_same_kind(s1: Symbol, s2: Symbol):
    if s1.kind != s2.kind:
        raise DomainError(f"cannot combine {s1.kind} and {s2.kind} symbols")


def constant_symbol(kind: GroupKind, value: complex = 1.0) -> Symbol:
    return Symbol(kind, {identity_frequency(kind): value})


def unit_symbol(kind: GroupKind) -> Symbol:
    return constant_symbol(kind, 1.0)


def cosine_symbol(kind: GroupKind, shift) -> Symbol:
    """z^n + conj(z)^n for the group element n (integer vector or positive rational)."""
    freq = coerce_frequency(kind, shift)
    if freq == identity_frequency(kind):
        return constant_symbol(kind, 2.0)
    return Symbol(kind, {freq: 1.0, frequency_inverse(kind, freq): 1.0})


def evaluate(s: Symbol, z: Sequence[complex] | Mapping[int, complex], real: bool = False) -> complex | float:
    """Value sum_alpha c(alpha) z^alpha at a torus point.

    ``z`` is indexed by coordinate (additive) or by prime index (multiplicative); a mapping for a
    multiplicative symbol is keyed by the prime itself.
    """
    def coordinate(var: int) -> complex:
        if isinstance(z, Mapping):
            if var not in z:
                raise DomainError(f"no torus coordinate supplied for variable {var}")
            value = complex(z[var])
        else:
            index = var if s.kind.is_additive else prime_index(var)
            if index >= len(z):
                raise DomainError(f"no torus coordinate supplied for variable index {index}")
            value = complex(z[index])
        if abs(abs(value) - 1.0) > UNIT_MODULUS_TOL:
            raise DomainError(f"torus coordinate {value} is not unimodular")
        return value

    cache: dict[int, complex] = {}
    total = 0j
    for k, c in s.items():
        term = c
        for var, e in frequency_exponents(s.kind, k).items():
            if var not in cache:
                cache[var] = coordinate(var)
            term *= cache[var] ** e
        total += term
    if real:
        if s.is_hermitian(tol=1e-12) and abs(total.imag) > 1e-12 * max(1.0, s.l1_norm()):
            logger.warning("imaginary part %.3e of a hermitian symbol's value", total.imag)
        return total.real
    return total


def evaluate_angles(s: Symbol, angles: np.ndarray, variables: Sequence[int]) -> np.ndarray:
    """Vectorized evaluation at points exp(i*angles); ``angles`` has one column per variable."""
    angles = np.atleast_2d(angles)
    if not len(s):
        return np.zeros(angles.shape[0], dtype=np.complex128)
    exponents = s.exponent_matrix(variables).astype(np.float64)
    coefficients = s.coefficient_vector()
    out = np.empty(angles.shape[0], dtype=np.complex128)
    for start in range(0, angles.shape[0], GRID_CHUNK):
        block = angles[start:start + GRID_CHUNK]
        out[start:start + GRID_CHUNK] = np.exp(1j * (block @ exponents.T)) @ coefficients
    return out


def tensor_grid_chunks(sizes: Sequence[int], chunk: int = GRID_CHUNK) -> Iterator[np.ndarray]:
    """Uniform tensor grid of angles 2*pi*k/size, yielded in blocks of rows."""
    total = math.prod(sizes)
    steps = np.array([2 * np.pi / n for n in sizes])
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        indices = np.column_stack(np.unravel_index(flat, tuple(sizes))) if sizes else np.zeros((len(flat), 0))
        yield indices * steps


def grid_values(s: Symbol, sizes: Sequence[int] | None = None, oversample: int = 1,
                max_points: int = 4 * 10 ** 6) -> np.ndarray:
    """Values of s on a uniform tensor grid over its active variables.

    Default sizes are ``oversample * 2 * degree + 1`` per variable, the smallest grid on which the
    discrete mean of |s|^2 is exact.
    """
    variables = s.variables()
    if sizes is None:
        degrees = s.degrees()
        sizes = [oversample * 2 * degrees[v] + 1 for v in variables]
    total = math.prod(sizes)
    if total > max_points:
        raise ResourceLimitError(f"tensor grid of {total} points exceeds {max_points}")
    return np.concatenate([evaluate_angles(s, block, variables) for block in tensor_grid_chunks(sizes)])


def grid_sup(s: Symbol, oversample: int = 1) -> float:
    """max |s| over the exact-degree grid; a lower bound for sup |s|."""
    if not s.variables():
        return abs(s.constant_term())
    return float(np.abs(grid_values(s, oversample=oversample)).max())


def convolve(s1: Symbol, s2: Symbol, cap: int = SUPPORT_CAP) -> Symbol:
    """Coefficients of the pointwise product s1 * s2, summed in canonical frequency order."""
    _check_same_kind(s1, s2)
    kind = s1.kind
    product: dict[Frequency, complex] = {}
    for f1, c1 in s1.items():
        for f2, c2 in s2.items():
            key = frequency_product(kind, f1, f2)
            product[key] = product.get(key, 0j) + c1 * c2
        if len(product) > cap:
            raise ResourceLimitError(f"product support exceeds {cap} frequencies")
    return Symbol(kind, product)


def power(s: Symbol, n: int, cap: int = SUPPORT_CAP) -> Symbol:
    if n < 0:
        raise DomainError(f"symbol power needs n >= 0, got {n}")
    result = unit_symbol(s.kind)
    for _ in range(n):
        result = convolve(result, s, cap=cap)
    return result


def adjoint(s: Symbol) -> Symbol:
    """Symbol of conj(phi): coeff(q) -> conj(coeff(1/q))."""
    return Symbol(s.kind, {frequency_inverse(s.kind, k): c.conjugate() for k, c in s.items()})


def ell_average(s: Symbol, ell: int) -> Symbol:
    """(1/ell) sum_j phi(z e^{2 pi i j/ell}): keeps the frequencies divisible by ell."""
    if not s.kind.is_additive or s.kind.dim != 1:
        raise DomainError(f"ell_average needs a one-variable additive symbol, got {s.kind}")
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    return Symbol(s.kind, {k: c for k, c in s.items() if k[0] % ell == 0})


def sublattice_project(s: Symbol, ells: Sequence[int]) -> Symbol:
    """Projection onto the diagonal sublattice ell_1 Z x ... x ell_d Z of frequencies."""
    if not s.kind.is_additive:
        raise DomainError("sublattice_project needs an additive symbol")
    ells = tuple(int(e) for e in ells)
    if len(ells) != s.kind.dim or any(e < 1 for e in ells):
        raise DomainError(f"need {s.kind.dim} positive sublattice steps, got {ells}")
    return Symbol(s.kind, {k: c for k, c in s.items() if all(a % e == 0 for a, e in zip(k, ells))})


def tail_project(s: Symbol, d: int) -> Symbol:
    """Average over all coordinates beyond the first d primes."""
    if s.kind.is_additive:
        raise DomainError("tail_project needs a multiplicative symbol")
    if d < 0:
        raise DomainError(f"d must be >= 0, got {d}")
    if d == 0:
        return constant_symbol(s.kind, s.constant_term())
    largest = nth_prime(d - 1)
    return Symbol(s.kind, {k: c for k, c in s.items() if all(p <= largest for p in k.primes)})


def zeta_symbol(gamma: float, cutoff: int) -> Symbol:
    """coeff(n) = n^-gamma for n <= cutoff: the Bohr lift of the truncated zeta(gamma + it)."""
    if gamma <= 1:
        raise DomainError(f"zeta symbol needs gamma > 1, got {gamma}")
    if cutoff < 1:
        raise DomainError(f"cutoff must be >= 1, got {cutoff}")
    return Symbol(MULTIPLICATIVE, {factor(n): float(n) ** -gamma for n in range(1, cutoff + 1)})


def bohr_eval(s: Symbol, t: float | np.ndarray) -> complex | np.ndarray:
    """Value along the Kronecker line z_j = p_j^{it}, i.e. sum_q c(q) q^{it}."""
    if s.kind.is_additive:
        raise DomainError("bohr_eval needs a multiplicative symbol")
    logs = np.array([math.log(k.numerator) - math.log(k.denominator) for k in s.support])
    coefficients = s.coefficient_vector()
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    values = np.zeros(t_arr.shape, dtype=np.complex128)
    if len(s):
        for start in range(0, len(t_arr), GRID_CHUNK):
            block = t_arr[start:start + GRID_CHUNK]
            values[start:start + GRID_CHUNK] = np.exp(1j * np.multiply.outer(block, logs)) @ coefficients
    return complex(values[0]) if np.ndim(t) == 0 else values


def dilation_symbol(a: Mapping[int, complex] | Sequence[complex]) -> Symbol:
    """|B f|^2 for f = sum_n a_n sqrt(2) sin(pi n x): coeff(q) = sum_{m/n = q} a_m conj(a_n)."""
    if not isinstance(a, Mapping):
        a = {n + 1: c for n, c in enumerate(a)}
    terms = {int(n): complex(c) for n, c in a.items() if c != 0}
    if any(n < 1 for n in terms):
        raise DomainError("dilation coefficients are indexed by naturals n >= 1")
    coeffs: dict[Fraction, complex] = {}
    for m, am in sorted(terms.items()):
        for n, an in sorted(terms.items()):
            q = Fraction(m, n)
            coeffs[q] = coeffs.get(q, 0j) + am * an.conjugate()
    return Symbol(MULTIPLICATIVE, coeffs).hermitized()


_ADDITIVE_RE = re.compile(r"^alpha=\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*,?\s*\)$")
_MULTIPLICATIVE_RE = re.compile(r"^q=(\d+)(?:/(\d+))?$")


def _format_frequency(kind: GroupKind, freq: Frequency) -> str:
    if kind.is_additive:
        return "alpha=(" + ",".join(str(a) for a in freq) + ")"
    return f"q={freq.numerator}/{freq.denominator}"


def parse_symbol(text: str) -> Symbol:
    """Parse ``<frequency> <re> <im>`` lines (``q=a/b`` or ``alpha=(i1,...,id)``); ``;`` also separates lines."""
    kind: GroupKind | None = None
    coeffs: dict = {}
    for lineno, raw in enumerate(re.split(r"[;\n]", text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise DomainError(f"symbol line {lineno}: expected '<frequency> <re> [<im>]', got {raw!r}")
        token = parts[0]
        re_part = float(parts[1])
        im_part = float(parts[2]) if len(parts) == 3 else 0.0
        if match := _ADDITIVE_RE.match(token):
            vector = tuple(int(v) for v in match.group(1).split(","))
            line_kind, freq = additive(len(vector)), vector
        elif match := _MULTIPLICATIVE_RE.match(token):
            num, den = int(match.group(1)), int(match.group(2) or 1)
            if num == 0 or den == 0:
                raise DomainError(f"symbol line {lineno}: frequency must be a positive rational")
            line_kind, freq = MULTIPLICATIVE, Fraction(num, den)
        else:
            raise DomainError(f"symbol line {lineno}: unrecognized frequency {token!r}")
        if kind is not None and line_kind != kind:
            raise DomainError(f"symbol line {lineno}: {line_kind} frequency in a {kind} symbol")
        kind = line_kind
        coeffs[freq] = coeffs.get(freq, 0j) + complex(re_part, im_part)
    if kind is None:
        raise DomainError("empty symbol literal")
    return Symbol(kind, coeffs)


def format_symbol(s: Symbol) -> str:
    return "\n".join(f"{_format_frequency(s.kind, k)} {c.real!r} {c.imag!r}" for k, c in s.items())
