"""Reference values for the limits of spectral functionals.

Every value here is computed without building a truncated matrix: torus integrals of f(phi), push-forward
measures, Dirichlet-series moments of zeta, and finite-horizon time averages along the Kronecker line.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import comb

from multoeplitz.arith import divisor_function, nth_prime
from multoeplitz.errors import DomainError, NoPredictedLimitError, ResourceLimitError, SolverContractError
from multoeplitz.index_sets import SetFamily
from multoeplitz.spectral import TraceFunction
from multoeplitz.symbol import (Symbol, bohr_eval, ell_average, evaluate_angles, grid_values, power,
                                sublattice_project, tail_project, tensor_grid_chunks)

logger = logging.getLogger(__name__)

GRID_VARIABLE_CAP = 8
GRID_POINT_CAP = 4 * 10 ** 6
AGREEMENT_TOL = 1e-10
ENDPOINT_TOL = 1e-6
MC_SAMPLES = 10 ** 6
MC_SHARDS = 8
TIME_AVERAGE_POINTS_CAP = 4 * 10 ** 6

Method = Literal["exact-quadrature", "grid-quadrature", "monte-carlo", "dirichlet-series", "time-average",
                 "closed-form"]


@dataclass(frozen=True)
class ReferenceLimit:
    value: complex | float
    method: Method
    error_bound: float
    rigorous: bool
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def real(self) -> float:
        return float(np.real(self.value))


@dataclass(frozen=True)
class QuadratureSettings:
    """How continuous torus integrals are approximated.

    ``points`` is the grid size per variable (0 picks the largest grid under the point cap).
    """
    method: Literal["auto", "grid", "monte-carlo"] = "auto"
    points: int = 0
    samples: int = MC_SAMPLES
    shards: int = MC_SHARDS
    seed: int = 0
    workers: int = 1


def _real_if_close(value: complex, scale: float):
    return value.real if abs(value.imag) <= 1e-12 * max(scale, 1.0) else value


def _convolution_integral(s: Symbol, coefficients) -> complex:
    total = 0j
    acc = None
    for c in coefficients:
        acc = power(s, 0) if acc is None else acc * s
        if c:
            total += c * acc.constant_term()
    return total


def _grid_integral(s: Symbol, f: TraceFunction) -> complex:
    variables = s.variables()
    degrees = s.degrees()
    sizes = [f.degree * degrees[v] + 1 for v in variables]
    values = grid_values(s, sizes=sizes, max_points=GRID_POINT_CAP)
    return complex(np.mean(f.polynomial(values)))


def torus_integral(s: Symbol, f: TraceFunction) -> ReferenceLimit:
    """Exact integral of a polynomial f over phi: the constant term of f(phi), cross-checked by DFT quadrature.

    The quadrature grid has m * deg + 1 points per variable, on which the mean of a trigonometric
    polynomial of degree m * deg is exact.
    """
    if not f.is_polynomial:
        raise DomainError(f"torus_integral needs a polynomial f, got {f}")
    coefficients = f.coefficients
    scale = sum(abs(c) * max(s.l1_norm(), 1.0) ** k for k, c in enumerate(coefficients))
    exact = grid = None
    try:
        exact = _convolution_integral(s, coefficients)
    except ResourceLimitError as e:
        logger.info("convolution path unavailable: %s", e)
    if len(s.variables()) <= GRID_VARIABLE_CAP:
        try:
            grid = _grid_integral(s, f)
        except ResourceLimitError as e:
            logger.info("quadrature path unavailable: %s", e)
    if exact is None and grid is None:
        raise ResourceLimitError("neither the convolution nor the quadrature path fits the caps")
    delta = 0.0
    if exact is not None and grid is not None:
        delta = abs(exact - grid)
        if delta > AGREEMENT_TOL * max(scale, 1.0):
            raise SolverContractError(f"convolution {exact!r} and quadrature {grid!r} disagree by {delta:.3e}")
    value = exact if exact is not None else grid
    return ReferenceLimit(_real_if_close(value, scale), "exact-quadrature", max(delta, 1e-15 * scale), True)


def _grid_points(nvars: int, settings: QuadratureSettings) -> int:
    if settings.points:
        return settings.points
    return max(3, int(GRID_POINT_CAP ** (1.0 / nvars)))


def _grid_average(s: Symbol, values_of: Callable, points: int) -> float:
    variables = s.variables()
    sizes = [points] * len(variables)
    total = 0.0
    count = 0
    for block in tensor_grid_chunks(sizes):
        mapped = values_of(evaluate_angles(s, block, variables))
        total += float(np.sum(mapped))
        count += mapped.size
    return total / count


def _mc_shard(s: Symbol, values_of: Callable, samples: int, seed: np.random.SeedSequence) -> tuple[float, float, int]:
    rng = np.random.default_rng(seed)
    variables = s.variables()
    mapped = values_of(evaluate_angles(s, rng.uniform(0.0, 2 * np.pi, (samples, len(variables))), variables))
    return float(np.sum(mapped)), float(np.sum(mapped ** 2)), samples


def _average(s: Symbol, values_of: Callable, settings: QuadratureSettings) -> tuple[float, float, Method]:
    """Haar average of values_of(phi(z)) with an error estimate (grid refinement delta or MC standard error)."""
    nvars = len(s.variables())
    if nvars == 0:
        return float(values_of(np.array([s.constant_term()]))[0]), 0.0, "exact-quadrature"
    method = settings.method
    if method == "auto":
        method = "grid" if nvars <= GRID_VARIABLE_CAP and 3 ** nvars <= GRID_POINT_CAP else "monte-carlo"
    if method == "grid":
        if nvars > GRID_VARIABLE_CAP:
            raise ResourceLimitError(f"{nvars} active variables exceed the grid cap {GRID_VARIABLE_CAP}")
        points = _grid_points(nvars, settings)
        if points ** nvars > GRID_POINT_CAP:
            raise ResourceLimitError(f"grid of {points}^{nvars} points exceeds {GRID_POINT_CAP}")
        fine = _grid_average(s, values_of, points)
        coarse = _grid_average(s, values_of, max(points // 2, 2))
        return fine, abs(fine - coarse), "grid-quadrature"
    shards = np.random.SeedSequence(settings.seed).spawn(settings.shards)
    per_shard = [settings.samples // settings.shards] * settings.shards
    per_shard[0] += settings.samples % settings.shards
    with ThreadPoolExecutor(max_workers=max(settings.workers, 1)) as pool:
        results = list(pool.map(lambda args: _mc_shard(s, values_of, *args), zip(per_shard, shards)))
    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    n = sum(r[2] for r in results)
    mean = total / n
    variance = max(total_sq / n - mean ** 2, 0.0)
    return mean, math.sqrt(variance / n), "monte-carlo"


def torus_integral_continuous(s: Symbol, f: TraceFunction,
                              settings: QuadratureSettings = QuadratureSettings()) -> ReferenceLimit:
    """Integral of f(phi) for a continuous f, on a tensor grid or by Monte Carlo; the error bound is heuristic."""
    hermitian = s.is_hermitian(1e-12)

    def values_of(z):
        x = z.real if hermitian else z
        if f.name in ("log", "sqrt"):
            if not hermitian:
                raise DomainError(f"{f} needs a real-valued (hermitian) symbol")
            f.check_domain(float(np.min(x)), float(np.max(x)))
        return np.real(f(x))

    value, error, method = _average(s, values_of, settings)
    return ReferenceLimit(value, method, error, method == "exact-quadrature")


def pushforward_measure(s: Symbol, lo: float, hi: float,
                        settings: QuadratureSettings = QuadratureSettings()) -> ReferenceLimit:
    """m({z : lo < phi(z) < hi}); ``diagnostics['endpoint_mass']`` is the mass within 1e-6 of lo or hi."""
    if not s.is_hermitian(1e-12):
        raise DomainError("push-forward measure needs a hermitian symbol")
    if not lo < hi:
        raise DomainError(f"empty interval ({lo}, {hi})")
    value, error, method = _average(s, lambda z: ((z.real > lo) & (z.real < hi)).astype(np.float64), settings)
    near = lambda z: ((np.abs(z.real - lo) <= ENDPOINT_TOL) | (np.abs(z.real - hi) <= ENDPOINT_TOL)).astype(float)
    endpoint, _, _ = _average(s, near, settings)
    return ReferenceLimit(value, method, error, False, {"endpoint_mass": endpoint})


def geometric_mean(s: Symbol, settings: QuadratureSettings = QuadratureSettings()) -> ReferenceLimit:
    """exp of the integral of log phi, the limit of normalized determinants."""
    inner = torus_integral_continuous(s, TraceFunction("log"), settings)
    value = math.exp(inner.real)
    return ReferenceLimit(value, inner.method, value * math.expm1(inner.error_bound), inner.rigorous)


def limit_symbol(s: Symbol, family: SetFamily) -> Symbol:
    """The symbol whose torus integral is the limit along the family."""
    if s.kind != family.kind:
        raise DomainError(f"{s.kind} symbol does not act on the {family.kind} family {family.name!r}")
    match family.name:
        case "natural-segment" | "alternating" | "explicit":
            raise NoPredictedLimitError(f"no predicted limit along the {family.name!r} family")
        case "additive-segment" | "additive-box":
            return s
        case "even-segment" | "augmented":
            return ell_average(s, family.ell)
        case "sublattice-box":
            return sublattice_project(s, family.ells or (family.ell,) * family.dim)
        case "exponent-box" | "embedded-lattice-box":
            return tail_project(s, family.axes)
    raise NoPredictedLimitError(f"no predicted limit along the {family.name!r} family")


def predicted_limit(s: Symbol, family: SetFamily, f: TraceFunction,
                    settings: QuadratureSettings = QuadratureSettings()) -> ReferenceLimit:
    """Limit of (1/#sigma_N) Tr f(T_{sigma_N}(phi)) along a family, per the family's averaging rule."""
    if family.name == "sparse-powers":
        if s.kind != family.kind:
            raise DomainError(f"{s.kind} symbol does not act on the sparse-powers family")
        value = complex(f(np.array([s.constant_term().real]))[0])
        return ReferenceLimit(_real_if_close(value, 1.0), "closed-form", 0.0, True)
    target = limit_symbol(s, family)
    if f.is_polynomial:
        return torus_integral(target, f)
    return torus_integral_continuous(target, f, settings)


def _tail_bound(gamma: float, m: int, n_max: int, table: np.ndarray) -> tuple[float, bool]:
    if m == 1:
        return n_max ** (1 - 2 * gamma) / (2 * gamma - 1), True
    if m == 2:
        # d(n) <= 2 sqrt(n)
        return 4 * n_max ** (2 - 2 * gamma) / (2 * gamma - 2), True
    n = np.arange(1, n_max + 1, dtype=np.float64)
    growth = float(np.max(table[1:].astype(np.float64) ** 2 / n))
    return growth * n_max ** (2 - 2 * gamma) / (2 * gamma - 2), False


def zeta_moment(gamma: float, m: int, n_max: int) -> ReferenceLimit:
    """Limit of (1/2T) int |zeta(gamma + it)|^{2m} dt as the partial sum of d_m(n)^2 n^{-2 gamma} up to n_max.

    The tail bound is rigorous for m <= 2 and uses the largest observed d_m(n)^2 / n otherwise.
    """
    if gamma <= 1:
        raise DomainError(f"zeta moments need gamma > 1, got {gamma}")
    table = divisor_function(m, n_max)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    partial = float(np.sum(table[1:].astype(np.float64) ** 2 * n ** (-2 * gamma)))
    tail, rigorous = _tail_bound(gamma, m, n_max, table)
    if not rigorous:
        logger.warning("zeta moment tail bound for m=%s is heuristic", m)
    return ReferenceLimit(partial, "dirichlet-series", tail, rigorous, {"n_max": n_max})


def smooth_zeta_moment(gamma: float, m: int, primes: int, n_max: int | None = None) -> ReferenceLimit:
    """The zeta moment restricted to numbers built from the first ``primes`` primes.

    This is the limit along exponent boxes over those primes. Without ``n_max`` the Euler product is summed
    to convergence; with it only smooth n <= n_max are kept and the rest is reported as the error bound.
    """
    if gamma <= 1:
        raise DomainError(f"zeta moments need gamma > 1, got {gamma}")
    if primes < 1 or m < 1:
        raise DomainError(f"need primes >= 1 and m >= 1, got primes={primes}, m={m}")
    local = []
    for j in range(primes):
        x = nth_prime(j) ** (-2 * gamma)
        terms = [comb(k + m - 1, m - 1, exact=True) ** 2 * x ** k for k in range(400)]
        local.append(terms)
    full = math.prod(math.fsum(terms) for terms in local)
    if n_max is None:
        return ReferenceLimit(full, "dirichlet-series", 1e-15 * full, True, {"primes": primes})
    partial = 0.0
    stack = [(0, 1, 1.0)]
    while stack:
        j, n, weight = stack.pop()
        if j == primes:
            partial += weight
            continue
        p = nth_prime(j)
        k, value = 0, n
        while value <= n_max:
            stack.append((j + 1, value, weight * local[j][k]))
            k += 1
            value *= p
    return ReferenceLimit(partial, "dirichlet-series", max(full - partial, 0.0), True,
                          {"primes": primes, "n_max": n_max})


def bohr_time_average(s: Symbol, f: TraceFunction, horizon: float, step: float | None = None,
                      of: Literal["value", "abs2"] = "value") -> ReferenceLimit:
    """(1/2T) int_{-T}^{T} f(phi(p^{it})) dt by the trapezoid rule; the error is the change from horizon T/2.

    ``of="abs2"`` applies f to |phi|^2 instead of phi.
    """
    if s.kind.is_additive:
        raise DomainError("time averages need a multiplicative symbol")
    if horizon <= 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    frequencies = [abs(math.log(q.numerator) - math.log(q.denominator)) for q in s.support]
    omega = max(frequencies, default=0.0) * max(f.degree, 2) * (2 if of == "abs2" else 1)
    if omega == 0.0:
        value = complex(_apply(f, np.array([s.constant_term()]), of)[0])
        return ReferenceLimit(_real_if_close(value, 1.0), "time-average", 0.0, True)
    step = step or 2 * math.pi / (16 * omega)
    points = int(math.ceil(2 * horizon / step)) + 1
    if points > TIME_AVERAGE_POINTS_CAP:
        raise ResourceLimitError(f"time average needs {points} points, cap is {TIME_AVERAGE_POINTS_CAP}")

    def average(h: float) -> complex:
        t = np.linspace(-h, h, max(int(math.ceil(2 * h / step)) + 1, 3))
        return complex(trapezoid(_apply(f, bohr_eval(s, t), of), t) / (2 * h))

    value = average(horizon)
    delta = abs(value - average(horizon / 2))
    logger.debug("time average over [-%s, %s] with %s points: %s", horizon, horizon, points, value)
    return ReferenceLimit(_real_if_close(value, s.l1_norm()), "time-average", delta, False, {"horizon": horizon})


def _apply(f: TraceFunction, values: np.ndarray, of: str) -> np.ndarray:
    if of == "abs2":
        return f(np.abs(values) ** 2)
    if not f.is_polynomial and np.abs(values.imag).max(initial=0.0) > 1e-12:
        raise DomainError(f"{f} needs real values; use of='abs2' for complex symbols")
    return f(values) if f.is_polynomial else f(values.real)
