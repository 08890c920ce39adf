"""Experiment configuration and result models."""
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from multoeplitz.index_sets import FamilyName, SetFamily, read_set_file
from multoeplitz.operators import DENSE_CAP
from multoeplitz.reference import QuadratureSettings
from multoeplitz.spectral import FunctionName, TraceFunction
from multoeplitz.symbol import MULTIPLICATIVE, GroupKind, Symbol, dilation_symbol, parse_symbol, zeta_symbol

ExperimentKind = Literal["szego-sweep", "folner-check", "sharpness", "determinant", "zeta-moments", "gram",
                         "b3-check", "natural-truncation-explore", "bohr-average", "eigenvalue-count"]
Verdict = Literal["PASS", "FAIL", "EXPLORATORY", "FOLNER", "NON-FOLNER"]

RECORD_COLUMNS = ["n", "size", "value", "reference", "abs_error", "wall_ms"]

# families without a closed-form limit
UNPREDICTED = {"natural-segment", "explicit"}


def _resolve(path: Optional[Path], info: ValidationInfo) -> Optional[Path]:
    if path is None:
        return None
    base = (info.context or {}).get("base")
    if base is not None and not path.is_absolute():
        path = Path(base) / path
    if not path.exists():
        raise ValueError(f"file {path} does not exist")
    return path


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ExperimentSection(Section):
    kind: ExperimentKind
    name: str = ""
    seed: int = Field(0, ge=0, lt=2 ** 64)
    tolerance: float = Field(1e-2, gt=0)
    max_size: int = Field(DENSE_CAP, ge=1)
    workers: int = Field(1, ge=1)
    record_timing: bool = False
    shifts: list[str] = []
    interval: Optional[tuple[float, float]] = None
    moment: int = Field(1, ge=1)
    n_max: int = Field(10 ** 5, ge=1)
    power: int = Field(2, ge=1)
    horizons: list[float] = []
    with_oracle: bool = False
    det_mode: Literal["limit", "upper-bound"] = "limit"

    @field_validator("interval")
    @classmethod
    def interval_is_open(cls, value):
        if value is not None and not value[0] < value[1]:
            raise ValueError(f"interval {value} is empty")
        return value

    @field_validator("horizons")
    @classmethod
    def horizons_increase(cls, value):
        if any(h <= 0 for h in value) or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("horizons must be positive and strictly increasing")
        return value


class SymbolSection(Section):
    """One symbol source: a literal, a file of literal lines, a zeta cutoff or dilation coefficients."""
    literal: Optional[str] = None
    file: Optional[Path] = None
    zeta_gamma: Optional[float] = None
    zeta_cutoff: int = Field(1000, ge=1)
    dilation: Optional[list[float]] = None

    @field_validator("literal")
    @classmethod
    def literal_parses(cls, value):
        if value is not None:
            parse_symbol(value)
        return value

    @field_validator("file")
    @classmethod
    def file_exists(cls, value, info: ValidationInfo):
        return _resolve(value, info)

    @field_validator("zeta_gamma")
    @classmethod
    def gamma_above_one(cls, value):
        if value is not None and value <= 1:
            raise ValueError(f"zeta_gamma must be > 1, got {value}")
        return value

    @model_validator(mode="after")
    def one_source(self):
        sources = [self.literal is not None, self.file is not None, self.zeta_gamma is not None,
                   self.dilation is not None]
        if sum(sources) != 1:
            raise ValueError("give exactly one of literal, file, zeta_gamma, dilation")
        return self

    def build(self) -> Symbol:
        if self.literal is not None:
            return parse_symbol(self.literal)
        if self.file is not None:
            return parse_symbol(self.file.read_text(encoding="utf-8"))
        if self.zeta_gamma is not None:
            return zeta_symbol(self.zeta_gamma, self.zeta_cutoff)
        return dilation_symbol(self.dilation)


class FamilySection(Section):
    name: FamilyName
    schedule: list[int] = []
    ell: int = Field(2, ge=1)
    base: int = Field(3, ge=2)
    dim: int = Field(1, ge=1)
    ells: list[int] = []
    weights: list[float] = []
    extra: list[int] = []
    members: list[FamilyName] = []
    set_file: Optional[Path] = None
    start: int = Field(8, ge=1)

    @field_validator("set_file")
    @classmethod
    def set_file_exists(cls, value, info: ValidationInfo):
        return _resolve(value, info)

    @field_validator("schedule")
    @classmethod
    def schedule_increases(cls, value):
        if any(n < 0 for n in value):
            raise ValueError("schedule values must be >= 0")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"schedule must be strictly increasing, got {value}")
        return value

    @model_validator(mode="after")
    def family_requirements(self):
        if self.name == "explicit" and self.set_file is None:
            raise ValueError("the explicit family needs set_file")
        if self.name != "explicit" and not self.schedule:
            raise ValueError(f"the {self.name} family needs a schedule")
        if self.name == "alternating" and len(self.members) != 2:
            raise ValueError("the alternating family needs exactly two members")
        if self.ells and len(self.ells) != self.dim:
            raise ValueError(f"ells has {len(self.ells)} entries for dim {self.dim}")
        return self

    def build(self, kind: GroupKind = MULTIPLICATIVE) -> SetFamily:
        common = dict(ell=self.ell, base=self.base, dim=self.dim, ells=tuple(self.ells), weights=tuple(self.weights))
        if self.name == "explicit":
            return SetFamily("explicit", explicit=tuple(read_set_file(self.set_file, kind)), **common)
        members = tuple(SetFamily(m, **common) for m in self.members)
        return SetFamily(self.name, extra=tuple(self.extra), members=members, **common)


class FunctionSection(Section):
    name: FunctionName = "polynomial"
    coefficients: list[float] = [0.0, 1.0]
    power: Optional[int] = Field(None, ge=0)
    interval: tuple[float, float] = (0.0, 1.0)

    def build(self) -> TraceFunction:
        coefficients = [0.0] * self.power + [1.0] if self.power is not None else self.coefficients
        return TraceFunction(self.name, tuple(float(c) for c in coefficients), tuple(self.interval))


class QuadratureSection(Section):
    method: Literal["auto", "grid", "monte-carlo"] = "auto"
    points: int = Field(0, ge=0)
    samples: int = Field(10 ** 6, ge=1)
    shards: int = Field(8, ge=1)

    def build(self, seed: int = 0, workers: int = 1) -> QuadratureSettings:
        return QuadratureSettings(self.method, self.points, self.samples, self.shards, seed, workers)


class OutputSection(Section):
    path: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"


class ExperimentConfig(Section):
    """A whole experiment file: ``[experiment]``, ``[symbol]``, ``[family]``, ``[function]``,
    ``[quadrature]`` and ``[output]`` sections."""
    experiment: ExperimentSection
    symbol: Optional[SymbolSection] = None
    family: Optional[FamilySection] = None
    function: FunctionSection = FunctionSection()
    quadrature: QuadratureSection = QuadratureSection()
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def kind_requirements(self):
        kind = self.experiment.kind
        if kind not in ("folner-check", "sharpness") and self.symbol is None:
            raise ValueError(f"{kind} needs a [symbol] section")
        if kind != "bohr-average" and self.family is None:
            raise ValueError(f"{kind} needs a [family] section")
        if kind in ("folner-check", "sharpness") and not self.experiment.shifts:
            raise ValueError(f"{kind} needs experiment.shifts")
        if kind == "eigenvalue-count" and self.experiment.interval is None:
            raise ValueError("eigenvalue-count needs experiment.interval")
        if kind == "zeta-moments" and (self.symbol is None or self.symbol.zeta_gamma is None):
            raise ValueError("zeta-moments needs symbol.zeta_gamma")
        if kind == "gram" and (self.symbol is None or self.symbol.dilation is None):
            raise ValueError("gram needs symbol.dilation")
        if kind == "b3-check" and self.experiment.power < 2:
            raise ValueError("b3-check needs experiment.power >= 2")
        if kind == "bohr-average" and not self.experiment.horizons:
            raise ValueError("bohr-average needs experiment.horizons")
        predicted = kind in ("szego-sweep", "determinant", "zeta-moments", "gram", "eigenvalue-count")
        if predicted and self.family is not None:
            name = self.family.name
            # only szego-sweep compares alternating members one by one
            if name in UNPREDICTED or (name == "alternating" and kind != "szego-sweep"):
                raise ValueError(f"{kind} has no reference limit along the {name} family")
        return self


class ExperimentRecord(BaseModel):
    """One schedule point of a sweep."""
    model_config = ConfigDict(frozen=True)
    n: int
    size: int
    value: float
    reference: float
    abs_error: float
    wall_ms: float = 0.0

    @field_validator("value", "reference", "abs_error", "wall_ms")
    @classmethod
    def finite(cls, value):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value}")
        return value


class RunResult(BaseModel):
    run_id: str
    kind: ExperimentKind
    verdict: Verdict
    records: list[ExperimentRecord]
    summary: dict[str, float | int | str | bool | None] = {}
