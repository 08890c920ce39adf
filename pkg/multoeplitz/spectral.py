"""Spectral functionals of truncated operators and the compression inequalities behind them."""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np
import pandas as pd
import scipy.linalg
from numpy.polynomial import Polynomial

from multoeplitz.errors import DomainError, NotPositiveDefiniteError, ResourceLimitError, SolverContractError
from multoeplitz.index_sets import IndexSet, even_segment, union_with
from multoeplitz.operators import (DENSE_CAP, TruncatedOperator, compressed_power, enlarged_set_power,
                                   hs_offdiagonal_norm_sq, truncate)
from multoeplitz.symbol import Symbol, grid_sup

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
RESIDUAL_TOL = 1e-8
POWER_TRACE_TOL = 1e-8
DET_FLOOR = 1e-12
BOUNDARY_TOL = 1e-10
RESIDUAL_CHECKS = 5

FunctionName = Literal["polynomial", "log", "sqrt", "exp", "abs", "indicator"]


@dataclass(frozen=True)
class TraceFunction:
    """A test function f for (1/#sigma) Tr f(T): a real polynomial or a named continuous function.

    ``coefficients`` are in increasing degree; ``interval`` is the support of an indicator.
    """
    name: FunctionName = "polynomial"
    coefficients: tuple[float, ...] = (0.0, 1.0)
    interval: tuple[float, float] = (0.0, 1.0)

    @property
    def is_polynomial(self) -> bool:
        return self.name == "polynomial"

    @property
    def polynomial(self) -> Polynomial:
        if not self.is_polynomial:
            raise DomainError(f"{self} is not a polynomial")
        return Polynomial(self.coefficients)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1 if self.is_polynomial else 0

    def check_domain(self, lo: float, hi: float):
        """Raise when f is undefined somewhere on [lo, hi]."""
        if self.name == "log" and lo <= 0:
            raise DomainError(f"log is undefined on [{lo:.6g}, {hi:.6g}]")
        if self.name == "sqrt" and lo < 0:
            raise DomainError(f"sqrt is undefined on [{lo:.6g}, {hi:.6g}]")

    def __call__(self, x):
        x = np.asarray(x)
        match self.name:
            case "polynomial":
                return self.polynomial(x)
            case "log":
                return np.log(x)
            case "sqrt":
                return np.sqrt(x)
            case "exp":
                return np.exp(x)
            case "abs":
                return np.abs(x)
            case "indicator":
                lo, hi = self.interval
                return ((x > lo) & (x < hi)).astype(np.float64)
        raise DomainError(f"unknown function {self.name!r}")

    def __str__(self):
        if self.is_polynomial:
            return " + ".join(f"{c:g}*x^{k}" for k, c in enumerate(self.coefficients) if c) or "0"
        if self.name == "indicator":
            return f"1_({self.interval[0]:g},{self.interval[1]:g})"
        return self.name


def power_function(m: int) -> TraceFunction:
    """f(x) = x^m."""
    return TraceFunction("polynomial", tuple([0.0] * m + [1.0]))


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    """Sorted spectrum of a truncated operator: ascending eigenvalues or descending singular values."""
    size: int
    eigenvalues: np.ndarray | None = None
    singular_values: np.ndarray | None = None

    @property
    def trace(self) -> float:
        return float(self.eigenvalues.sum())

    @property
    def log_det(self) -> float:
        if self.eigenvalues[0] <= DET_FLOOR:
            raise NotPositiveDefiniteError(
                f"not positive definite at working precision: min eigenvalue {self.eigenvalues[0]:.3e}")
        return float(np.log(self.eigenvalues).sum())


@dataclass(frozen=True)
class IntervalCount:
    """Eigenvalue tally for an open interval, with eigenvalues close to an endpoint counted apart."""
    inside: int
    boundary: int
    size: int

    @property
    def fraction(self) -> float:
        return self.inside / self.size

    @property
    def boundary_fraction(self) -> float:
        return self.boundary / self.size


@dataclass(frozen=True)
class CompressionCheck:
    """||pi L^n pi - (pi L pi)^n||_{S_1} against (n(n-1)/2) ||L||^{n-2} ||pi L (1 - pi)||_{S_2}^2."""
    lhs: float
    rhs: float
    rhs_certified: float
    holds: bool
    margin: float
    oracle_deviation: float | None = None


@dataclass(frozen=True)
class DeterminantBound:
    """(det T)^{1/#sigma} against the geometric mean of the symbol, an upper bound only."""
    value: float
    bound: float
    holds: bool


def eigenvalues(T: TruncatedOperator, seed: int = 0) -> SpectralSummary:
    """Full Hermitian spectrum; residuals of a few random eigenpairs are checked."""
    if not T.is_hermitian(HERMITIAN_TOL):
        raise DomainError(f"{T.size}x{T.size} matrix is not hermitian, use singular_values")
    w, v = scipy.linalg.eigh(T.entries)
    norm = float(np.abs(w).max()) if w.size else 0.0
    rng = np.random.default_rng(seed)
    for i in rng.choice(T.size, size=min(RESIDUAL_CHECKS, T.size), replace=False):
        residual = float(np.linalg.norm(T.entries @ v[:, i] - w[i] * v[:, i]))
        if residual > RESIDUAL_TOL * max(norm, 1.0):
            raise SolverContractError(f"eigenpair {i} has residual {residual:.3e} (norm {norm:.3e})")
    return SpectralSummary(size=T.size, eigenvalues=w)


def singular_values(T: TruncatedOperator) -> SpectralSummary:
    return SpectralSummary(size=T.size, singular_values=scipy.linalg.svdvals(T.entries))


def power_traces(T: TruncatedOperator, m_max: int) -> np.ndarray:
    """(1/#sigma) Tr T^m for m = 0..m_max, from powers up to ceil(m_max / 2) only.

    Tr A^(i+j) is the sum of A^i * transpose(A^j), so half the powers are enough.
    """
    a = T.entries
    half = (m_max + 1) // 2
    powers = [np.eye(T.size, dtype=np.complex128), a]
    for _ in range(2, half + 1):
        powers.append(powers[-1] @ a)
    traces = np.empty(m_max + 1, dtype=np.complex128)
    for m in range(m_max + 1):
        i = min(m, half)
        traces[m] = np.sum(powers[i] * powers[m - i].T)
    return traces / T.size


def polynomial_trace(T: TruncatedOperator, f: TraceFunction) -> complex:
    """(1/#sigma) Tr p(T) for any square T, hermitian or not."""
    coefficients = f.polynomial.coef
    traces = power_traces(T, len(coefficients) - 1)
    return complex(np.dot(coefficients, traces))


def trace_of_f(T: TruncatedOperator, f: TraceFunction, spectrum: SpectralSummary | None = None) -> float:
    """(1/#sigma) sum_k f(lambda_k); polynomial f is cross-checked against power traces."""
    spectrum = spectrum or eigenvalues(T)
    lam = spectrum.eigenvalues
    f.check_domain(float(lam[0]), float(lam[-1]))
    value = float(np.mean(f(lam)))
    if f.is_polynomial:
        direct = polynomial_trace(T, f)
        norm = max(abs(lam[0]), abs(lam[-1]), 1.0)
        scale = sum(abs(c) * norm ** k for k, c in enumerate(f.coefficients))
        if abs(direct - value) > POWER_TRACE_TOL * max(scale, 1.0):
            raise SolverContractError(f"eigenvalue trace {value!r} and power trace {direct!r} disagree")
    return value


def _tally(values: np.ndarray, lo: float, hi: float, tol: float) -> IntervalCount:
    if not lo < hi:
        raise DomainError(f"empty interval ({lo}, {hi})")
    near = (np.abs(values - lo) <= tol) | (np.abs(values - hi) <= tol)
    inside = (values > lo) & (values < hi) & ~near
    return IntervalCount(int(inside.sum()), int(near.sum()), values.size)


def count_in_interval(spectrum: SpectralSummary, lo: float, hi: float, tol: float = BOUNDARY_TOL) -> IntervalCount:
    return _tally(spectrum.eigenvalues, lo, hi, tol)


def count_singular_in_interval(spectrum: SpectralSummary, lo: float, hi: float,
                               tol: float = BOUNDARY_TOL) -> IntervalCount:
    """Tally of the squared singular values s_k^2 in (lo, hi)."""
    return _tally(spectrum.singular_values ** 2, lo, hi, tol)


def singular_moments(T: TruncatedOperator, m: int, spectrum: SpectralSummary | None = None) -> float:
    """(1/#sigma) Tr (T* T)^m = (1/#sigma) sum_k s_k^(2m)."""
    if m < 1:
        raise DomainError(f"singular moment order must be >= 1, got {m}")
    spectrum = spectrum or singular_values(T)
    return float(np.mean(spectrum.singular_values ** (2 * m)))


def normalized_det(T: TruncatedOperator, spectrum: SpectralSummary | None = None) -> float:
    """(det T)^{1/#sigma} of a positive definite hermitian T."""
    spectrum = spectrum or eigenvalues(T)
    return math.exp(spectrum.log_det / spectrum.size)


def determinant_upper_bound_check(T: TruncatedOperator, bound: float, slack: float = 0.0,
                                  spectrum: SpectralSummary | None = None) -> DeterminantBound:
    """limsup (det T)^{1/#sigma} <= geometric mean, for symbols that may touch zero.

    Only the limsup is bounded, so finite truncations are judged with ``slack``. Eigenvalues at or below
    the working floor make the normalized determinant 0.
    """
    spectrum = spectrum or eigenvalues(T)
    lam = spectrum.eigenvalues
    value = 0.0 if lam[0] <= DET_FLOOR else math.exp(float(np.log(lam).mean()))
    return DeterminantBound(value, bound, value <= bound * (1 + 1e-8) + slack + DET_FLOOR)


def prop_b3_check(s: Symbol, sigma: IndexSet, n: int, oversample: int = 4, with_oracle: bool = False,
                  max_size: int = DENSE_CAP) -> CompressionCheck:
    """Trace-norm defect of compressing powers, against its Hilbert-Schmidt bound.

    The sup of |phi| is taken on an oversampled grid; the certified bound sum |c| is reported too and
    replaces the grid sup when the grid would exceed its point cap.
    """
    if n < 2:
        raise DomainError(f"compression check needs n >= 2, got {n}")
    if not s.is_hermitian(HERMITIAN_TOL):
        raise DomainError("compression check needs a hermitian symbol")
    T = truncate(s, sigma, max_size=max_size)
    exact = compressed_power(s, sigma, n, max_size=max_size)
    defect = exact.entries - np.linalg.matrix_power(T.entries, n)
    lhs = float(scipy.linalg.svdvals(defect).sum())
    hs = hs_offdiagonal_norm_sq(s, sigma) * len(sigma)
    constant = n * (n - 1) / 2
    rhs_certified = constant * s.l1_norm() ** (n - 2) * hs
    try:
        rhs = constant * grid_sup(s, oversample=oversample) ** (n - 2) * hs
    except ResourceLimitError as e:
        logger.info("sup grid too large, using the certified bound: %s", e)
        rhs = rhs_certified
    roundoff = 1e-12 * len(sigma) * max(s.l1_norm(), 1.0) ** n
    deviation = None
    if with_oracle:
        try:
            oracle = enlarged_set_power(s, sigma, n)
            deviation = float(np.abs(oracle.entries - exact.entries).max())
        except ResourceLimitError as e:
            logger.info("enlarged-set oracle skipped: %s", e)
    return CompressionCheck(lhs, rhs, rhs_certified, lhs <= rhs * (1 + 1e-8) + roundoff, rhs - lhs, deviation)


def finite_augmentation_drift(s: Symbol, sigma: IndexSet, extra: Iterable, m_max: int,
                              max_size: int = DENSE_CAP) -> pd.DataFrame:
    """|(1/#sigma) Tr T_sigma^m - (1/#sigma') Tr T_sigma'^m| for sigma' = sigma + extra, m = 1..m_max.

    ``scale`` is #F (#sigma)^{-1/2} m ||phi||_1^{m-1} with #F the number of genuinely new indices.
    """
    if not s.is_hermitian(HERMITIAN_TOL):
        raise DomainError("finite augmentation drift needs a hermitian symbol")
    augmented = union_with(sigma, extra)
    added = len(augmented) - len(sigma)
    before = power_traces(truncate(s, sigma, max_size=max_size), m_max)
    after = power_traces(truncate(s, augmented, max_size=max_size), m_max)
    l1 = s.l1_norm()
    rows = [{"m": m, "drift": float(abs(after[m] - before[m])),
             "scale": added * len(sigma) ** -0.5 * m * l1 ** (m - 1)} for m in range(1, m_max + 1)]
    return pd.DataFrame(rows, columns=["m", "drift", "scale"])


@dataclass(frozen=True, eq=False)
class AugmentedStep:
    k: int
    n: int
    sigma: IndexSet
    drift: float


def augmented_schedule(s: Symbol, ks: Sequence[int], ell: int = 2, start: int = 8,
                       max_size: int = DENSE_CAP) -> list[AugmentedStep]:
    """rho_k = {0, ..., k-1} + even_segment(N(k), ell), with N(k) doubled until the trace drift against
    even_segment(N(k), ell) is at most 1/k for every m <= k (drift measured relative to ||phi||_1^m).

    N(k) never decreases along ks, so the sets exhaust Z_+ while keeping the even-part limit.
    """
    l1 = max(s.l1_norm(), 1e-300)
    steps = []
    n = start
    for k in ks:
        if k < 1:
            raise DomainError(f"augmentation size must be >= 1, got {k}")
        while True:
            if n + 1 + k > max_size:
                raise ResourceLimitError(f"no N <= {max_size} reaches drift 1/{k}")
            table = finite_augmentation_drift(s, even_segment(n, ell), range(k), k, max_size=max_size)
            relative = (table["drift"] / l1 ** table["m"]).max()
            if relative <= 1.0 / k:
                break
            n *= 2
        sigma = union_with(even_segment(n, ell), range(k))
        logger.debug("augmented step k=%s: N=%s, #rho=%s, relative drift %.3e", k, n, len(sigma), relative)
        steps.append(AugmentedStep(k, n, sigma, float(relative)))
    return steps
