"""One class per experiment kind. Each turns a schedule point into an ExperimentRecord."""
import logging
import time
from functools import cached_property
from typing import ClassVar
from uuid import NAMESPACE_DNS, uuid3, uuid5

import numpy as np
import orjson
import pandas as pd

from multoeplitz.errors import DomainError, MultoeplitzError, NoPredictedLimitError
from multoeplitz.index_sets import (IndexSet, SetFamily, as_shift, folner_defect, folner_ratio,
                                    is_empirically_folner)
from multoeplitz.models import ExperimentConfig, ExperimentRecord, Verdict
from multoeplitz.operators import TruncatedOperator, gram_matrix, truncate
from multoeplitz.reference import (ReferenceLimit, bohr_time_average, geometric_mean, limit_symbol,
                                   predicted_limit, pushforward_measure, smooth_zeta_moment, torus_integral,
                                   torus_integral_continuous, zeta_moment)
from multoeplitz.spectral import (HERMITIAN_TOL, augmented_schedule, count_in_interval, determinant_upper_bound_check,
                                  eigenvalues, normalized_det, polynomial_trace, power_function, prop_b3_check,
                                  singular_moments, trace_of_f)
from multoeplitz.symbol import MULTIPLICATIVE, Symbol, adjoint, cosine_symbol, tail_project

logger = logging.getLogger(__name__)

PROJECT_SITE = "multoeplitz.invalid"
EXPERIMENTS: dict[str, type["Experiment"]] = {}


class Experiment:
    """Base class: holds the parsed config, the symbol and the index family of one sweep."""
    kind: ClassVar[str] = ""
    statement: ClassVar[str] = ""
    cites: ClassVar[str] = ""
    exploratory: ClassVar[bool] = False

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.kind:
            EXPERIMENTS[cls.kind] = cls

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.settings = config.experiment
        self.namespace = uuid3(NAMESPACE_DNS, PROJECT_SITE)
        self.f = config.function.build()
        self.quadrature = config.quadrature.build(seed=self.settings.seed, workers=self.settings.workers)

    @cached_property
    def symbol(self) -> Symbol | None:
        return self.config.symbol.build() if self.config.symbol else None

    @cached_property
    def folner_limit(self) -> ReferenceLimit:
        """Integral of f(phi) over the torus, the limit along Folner families."""
        if self.f.is_polynomial:
            return torus_integral(self.symbol, self.f)
        return torus_integral_continuous(self.symbol, self.f, self.quadrature)

    @cached_property
    def family(self) -> SetFamily | None:
        if self.config.family is None:
            return None
        kind = self.symbol.kind if self.symbol is not None else MULTIPLICATIVE
        family = self.config.family.build(kind)
        if family.name == "augmented":
            steps = augmented_schedule(self.symbol, self.config.family.schedule, family.ell,
                                       start=self.config.family.start, max_size=self.settings.max_size)
            family = SetFamily("augmented", ell=family.ell, explicit=tuple(step.sigma for step in steps))
        return family

    def mint_id(self) -> str:
        """Deterministic run id: uuid5 of the canonical config."""
        canonical = orjson.dumps(self.config.model_dump(mode="json"), option=orjson.OPT_SORT_KEYS)
        return str(uuid5(self.namespace, f"{self.kind}/{canonical.decode()}"))

    def schedule(self) -> list[int]:
        if self.family is not None and self.family.name == "explicit":
            return [len(sigma) for sigma in self.family.explicit]
        return list(self.config.family.schedule)

    def index_set(self, position: int, n: int) -> IndexSet:
        return self.family.build(n, position=position)

    def operator(self, sigma: IndexSet) -> TruncatedOperator:
        return truncate(self.symbol, sigma, max_size=self.settings.max_size)

    def measure(self, position: int, n: int) -> ExperimentRecord:
        raise NotImplementedError

    def record(self, position: int, n: int) -> ExperimentRecord:
        """measure() with timing and the schedule point attached to any error."""
        started = time.perf_counter()
        try:
            record = self.measure(position, n)
        except MultoeplitzError as e:
            raise type(e)(f"n={n}: {e}") from e
        if self.settings.record_timing:
            record = record.model_copy(update={"wall_ms": (time.perf_counter() - started) * 1e3})
        logger.debug("%s n=%s: value=%r reference=%r", self.kind, n, record.value, record.reference)
        return record

    @staticmethod
    def make_record(n: int, size: int, value: complex, reference: complex) -> ExperimentRecord:
        value, reference = float(np.real(value)), float(np.real(reference))
        return ExperimentRecord(n=n, size=size, value=value, reference=reference, abs_error=abs(value - reference))

    def verdict(self, records: list[ExperimentRecord]) -> Verdict:
        """PASS when the last error is below tolerance and the errors do not grow over the second half."""
        if self.exploratory or (self.family is not None and self.family.name == "alternating"):
            return "EXPLORATORY"
        if not records:
            return "FAIL"
        errors = np.array([r.abs_error for r in records])
        tail = errors[len(errors) // 2:]
        decreasing = bool(np.all(np.diff(tail) <= 1e-12))
        return "PASS" if errors[-1] < self.settings.tolerance and decreasing else "FAIL"

    def summary(self, records: list[ExperimentRecord]) -> dict:
        return {}

    @classmethod
    def describe(cls) -> str:
        text = f"{cls.kind}: {cls.statement}"
        return f"{text}\n  cites: {cls.cites}" if cls.cites else text


class SzegoSweep(Experiment):
    kind = "szego-sweep"
    statement = ("normalized traces (1/#sigma) Tr f(T_sigma(phi)) converge to the integral of f(phi) over the "
                 "torus along Folner families (first Szego limit theorem, additive and multiplicative), and to the "
                 "integral of f over the averaged symbol along even, sublattice, embedded-lattice and sparse "
                 "families.")
    cites = "Szego first limit theorem, in its Folner-sequence form for Z^d and Q_+"

    def reference(self, position: int) -> ReferenceLimit:
        family = self.family
        if family.name == "alternating":
            family = family.members[position % len(family.members)]
        return self._references(family)

    def _references(self, family: SetFamily) -> ReferenceLimit:
        cache = self.__dict__.setdefault("_reference_cache", {})
        if family not in cache:
            try:
                cache[family] = predicted_limit(self.symbol, family, self.f, self.quadrature)
            except NoPredictedLimitError:
                if self.family.name != "alternating":
                    raise
                # members without a closed form are compared with the Folner-family limit
                logger.info("no predicted limit along the %r member, using the Folner-family limit", family.name)
                cache[family] = self.folner_limit
        return cache[family]

    def measure(self, position, n):
        sigma = self.index_set(position, n)
        T = self.operator(sigma)
        if T.is_hermitian(HERMITIAN_TOL):
            value = trace_of_f(T, self.f)
        else:
            value = polynomial_trace(T, self.f)
        return self.make_record(n, len(sigma), value, self.reference(position).value)


class FolnerCheck(Experiment):
    kind = "folner-check"
    statement = ("shift-overlap fractions #{k in sigma : shift(k) in sigma}/#sigma tend to 1 for every shift "
                 "along Folner families; natural segments {1..N} give 1/n instead (not multiplicatively Folner).")
    cites = "Folner condition for the multiplicative group Q_+"

    def shifts(self) -> list:
        return [as_shift(self.family.kind, _parse_shift(s)) for s in self.settings.shifts]

    def measure(self, position, n):
        sigma = self.index_set(position, n)
        defect = max(1.0 - folner_ratio(sigma, shift) for shift in self.shifts())
        return self.make_record(n, len(sigma), defect, 0.0)

    @cached_property
    def table(self) -> pd.DataFrame:
        schedule = self.schedule()
        sets = [self.index_set(k, n) for k, n in enumerate(schedule)]
        return folner_defect(sets, self.shifts(), schedule)

    def verdict(self, records):
        return "FOLNER" if is_empirically_folner(self.table, self.settings.tolerance) else "NON-FOLNER"

    def summary(self, records):
        last = self.table.groupby("shift", sort=False).last()
        return {f"defect[{shift}]": float(row["defect"]) for shift, row in last.iterrows()}


class Sharpness(Experiment):
    kind = "sharpness"
    statement = ("(1/#sigma) Tr T_sigma(z^n + conj(z)^n)^2 equals 2 #{k in sigma : shift_n(k) in sigma}/#sigma "
                 "exactly, so the limit theorem needs the Folner condition for every shift.")
    cites = "necessity of the Folner condition, via the trace identity for z^n + conj(z)^n"

    def measure(self, position, n):
        sigma = self.index_set(position, n)
        worst = None
        for raw in self.settings.shifts:
            shift = as_shift(sigma.kind, _parse_shift(raw))
            T = truncate(cosine_symbol(sigma.kind, shift), sigma, max_size=self.settings.max_size)
            value = trace_of_f(T, power_function(2))
            reference = 2 * folner_ratio(sigma, shift)
            if worst is None or abs(value - reference) > abs(worst[0] - worst[1]):
                worst = (value, reference)
        return self.make_record(n, len(sigma), *worst)

    def verdict(self, records):
        if not records:
            return "FAIL"
        return "PASS" if max(r.abs_error for r in records) < self.settings.tolerance else "FAIL"


class Determinant(Experiment):
    kind = "determinant"
    statement = ("normalized determinants (det T_sigma(phi))^{1/#sigma} converge to the geometric mean "
                 "exp(integral of log phi) when inf phi > 0; without it only limsup <= geometric mean holds.")
    cites = "Szego limit theorem for determinants (geometric mean), limsup form for symbols touching zero"

    @cached_property
    def bound(self) -> ReferenceLimit:
        return geometric_mean(limit_symbol(self.symbol, self.family), self.quadrature)

    def measure(self, position, n):
        sigma = self.index_set(position, n)
        T = self.operator(sigma)
        if self.settings.det_mode == "upper-bound":
            check = determinant_upper_bound_check(T, self.bound.real, slack=self.settings.tolerance)
            if not check.holds:
                logger.info("n=%s: normalized determinant %.6g above geometric mean %.6g", n, check.value, check.bound)
            return self.make_record(n, len(sigma), check.value, check.bound)
        return self.make_record(n, len(sigma), normalized_det(T), self.bound.value)

    def verdict(self, records):
        if self.settings.det_mode == "upper-bound":
            last = records[-1]
            return "PASS" if last.value <= last.reference * (1 + 1e-8) + self.settings.tolerance else "FAIL"
        return super().verdict(records)

    def summary(self, records):
        return {"geometric_mean": self.bound.real, "geometric_mean_error": self.bound.error_bound}


class ZetaMoments(Experiment):
    kind = "zeta-moments"
    statement = ("for the Bohr lift of zeta(gamma + it), gamma > 1, (1/#sigma) Tr (T* T)^m along exponent boxes "
                 "converges to the mean of |zeta(gamma + it)|^{2m} over the line, sum d_m(n)^2 n^{-2 gamma}.")
    cites = "Bohr correspondence and Carlson mean-value theorem for Dirichlet series"

    @cached_property
    def symbol(self) -> Symbol:
        # only frequencies over the box primes can reach an entry
        return tail_project(self.config.symbol.build(), self.family.axes)

    @cached_property
    def family(self) -> SetFamily:
        return self.config.family.build(MULTIPLICATIVE)

    @cached_property
    def oracle(self) -> ReferenceLimit:
        return zeta_moment(self.config.symbol.zeta_gamma, self.settings.moment, self.settings.n_max)

    def measure(self, position, n):
        sigma = self.index_set(position, n)
        value = singular_moments(self.operator(sigma), self.settings.moment)
        return self.make_record(n, len(sigma), value, self.oracle.value)

    def summary(self, records):
        smooth = smooth_zeta_moment(self.config.symbol.zeta_gamma, self.settings.moment, self.family.axes)
        return {"tail_bound": self.oracle.error_bound, "tail_rigorous": self.oracle.rigorous,
                "smooth_limit": smooth.real, "prime_truncation_gap": self.oracle.real - smooth.real}


class Gram(Experiment):
    kind = "gram"
    statement = ("Gram matrices of the dilates f(jx), j in sigma, of f = sum a_n sqrt(2) sin(pi n x) are "
                 "truncated multiplicative Toeplitz matrices of |B f|^2; their normalized determinants converge to "
                 "the geometric mean of |B f|^2.")
    cites = "Gram matrices of dilation systems as multiplicative Toeplitz matrices; Szego determinant limit"

    @cached_property
    def bound(self) -> ReferenceLimit:
        return geometric_mean(limit_symbol(self.symbol, self.family), self.quadrature)

    def measure(self, position, n):
        sigma = self.index_set(position, n)
        G = gram_matrix(self.config.symbol.dilation, sigma)
        return self.make_record(n, len(sigma), normalized_det(G), self.bound.value)

    def summary(self, records):
        sigma = self.index_set(len(self.schedule()) - 1, self.schedule()[-1])
        G = gram_matrix(self.config.symbol.dilation, sigma)
        deviation = float(np.abs(G.entries - self.operator(sigma).entries.T).max())
        return {"geometric_mean": self.bound.real, "two_path_deviation": deviation}


class B3Check(Experiment):
    kind = "b3-check"
    statement = ("||pi L^n pi - (pi L pi)^n||_{S_1} <= (n(n-1)/2) ||L||^{n-2} ||pi L (1 - pi)||_{S_2}^2 for "
                 "self-adjoint Laurent operators L(phi) and finite projections pi.")
    cites = "Hilbert-Schmidt compression bound for powers of self-adjoint Laurent operators"

    def measure(self, position, n):
        sigma = self.index_set(position, n)
        check = prop_b3_check(self.symbol, sigma, self.settings.power, with_oracle=self.settings.with_oracle,
                              max_size=self.settings.max_size)
        if not check.holds:
            logger.warning("compression inequality fails at n=%s: lhs=%r rhs=%r", n, check.lhs, check.rhs)
        return self.make_record(n, len(sigma), check.lhs, check.rhs)

    def verdict(self, records):
        return "PASS" if records and all(r.value <= r.reference * (1 + 1e-8) + 1e-9 for r in records) else "FAIL"


class NaturalTruncationExplore(Experiment):
    kind = "natural-truncation-explore"
    exploratory = True
    statement = ("exploratory: normalized traces along the natural truncations {1..N}, which are not Folner; "
                 "whether a limit exists is open, so the Folner-family limit is shown for comparison only.")
    cites = "open question: Szego-type limits along non-Folner natural truncations"

    def measure(self, position, n):
        sigma = self.index_set(position, n)
        T = self.operator(sigma)
        value = trace_of_f(T, self.f) if T.is_hermitian(HERMITIAN_TOL) else polynomial_trace(T, self.f)
        return self.make_record(n, len(sigma), value, self.folner_limit.value)


class BohrAverage(Experiment):
    kind = "bohr-average"
    statement = ("time averages (1/2T) of f(phi(p^{it})) over [-T, T] converge to the torus integral of f(phi) "
                 "(Bohr lift and Kronecker's theorem).")
    cites = "Bohr lift and Kronecker theorem on the independence of log p"

    def schedule(self) -> list[int]:
        return [int(h) for h in self.settings.horizons]

    @cached_property
    def target(self) -> ReferenceLimit:
        if self.symbol.kind.is_additive:
            raise DomainError("bohr-average needs a multiplicative symbol")
        target = self.symbol if self.mode == "value" else self.symbol * adjoint(self.symbol)
        if self.f.is_polynomial:
            return torus_integral(target, self.f)
        return torus_integral_continuous(target, self.f, self.quadrature)

    @cached_property
    def mode(self) -> str:
        # complex symbols are averaged through |phi|^2 unless f is affine
        hermitian = self.symbol.is_hermitian(HERMITIAN_TOL)
        return "value" if hermitian or (self.f.is_polynomial and self.f.degree <= 1) else "abs2"

    def measure(self, position, n):
        horizon = self.settings.horizons[position]
        average = bohr_time_average(self.symbol, self.f, horizon, of=self.mode)
        return self.make_record(n, len(self.symbol), average.value, self.target.value)

    def verdict(self, records):
        # only the last horizon is judged
        if not records:
            return "FAIL"
        return "PASS" if records[-1].abs_error < self.settings.tolerance else "FAIL"


class EigenvalueCount(Experiment):
    kind = "eigenvalue-count"
    statement = ("the fraction of eigenvalues of T_sigma(phi) in an interval (a, b) converges to the Haar measure "
                 "of {phi in (a, b)} when the endpoints carry no mass.")
    cites = "Szego eigenvalue distribution theorem (weak convergence to the push-forward of Haar measure)"

    @cached_property
    def measure_of_interval(self) -> ReferenceLimit:
        lo, hi = self.settings.interval
        return pushforward_measure(limit_symbol(self.symbol, self.family), lo, hi, self.quadrature)

    def measure(self, position, n):
        lo, hi = self.settings.interval
        sigma = self.index_set(position, n)
        tally = count_in_interval(eigenvalues(self.operator(sigma)), lo, hi)
        if tally.boundary:
            logger.info("n=%s: %s eigenvalues within tolerance of an endpoint", n, tally.boundary)
        return self.make_record(n, len(sigma), tally.fraction, self.measure_of_interval.value)

    def summary(self, records):
        return {"endpoint_mass": self.measure_of_interval.diagnostics.get("endpoint_mass")}


def _parse_shift(raw: str):
    """'3', '3/2' or '1,0' into an int, a Fraction string or an integer vector."""
    raw = raw.strip()
    if "," in raw:
        return tuple(int(v) for v in raw.strip("()").split(","))
    return raw if "/" in raw else int(raw)


def build_experiment(config: ExperimentConfig) -> Experiment:
    try:
        return EXPERIMENTS[config.experiment.kind](config)
    except KeyError:
        raise DomainError(f"unknown experiment kind {config.experiment.kind!r}")
