from fractions import Fraction
from typing import Any, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from polyrep.paths import get_default_run_dir
from polyrep.poly import format_rational, parse_rational

Evidence = Literal["exact", "sampled", "certified"]


class StrictConfigModel(BaseModel):
    """Base model for user configuration sections."""

    model_config = ConfigDict(extra="forbid")


class BudgetConfig(StrictConfigModel):
    """Caps for every "sufficiently large" search."""

    max_exponent: int = Field(64, description="Largest exponent tried by doubling searches")
    max_degree: int = Field(1024, description="Largest cushion approximation degree")
    samples: int = Field(240, description="Sample points per side during searches")
    max_terms: int = Field(50_000, description="Largest expansion kept in output documents")
    collar_attempts: int = 12
    refine: bool = Field(True, description="Bisect between the last failing and first passing exponent")
    seed: int = 0

    @model_validator(mode="after")
    def validate_positive(self) -> Self:
        for name in ("max_exponent", "max_degree", "samples", "max_terms", "collar_attempts"):
            if getattr(self, name) < 1:
                raise ValueError(f"budget.{name} must be positive")
        return self

    def scaled(self, factor: Fraction) -> Self:
        """Multiply every integer cap by ``factor`` (rounded, at least 1)."""
        update = {
            name: max(1, int(getattr(self, name) * factor))
            for name in ("max_exponent", "max_degree", "samples", "max_terms")
        }
        return self.model_copy(update=update)


class VerificationConfig(StrictConfigModel):
    """Defaults for the verification oracle."""

    samples: int = 2000
    resolution: str = "1/256"
    far_radii: list[int] = Field(default_factory=lambda: [1000, 1_000_000])
    max_boxes: int = 400_000

    @field_validator("resolution")
    @classmethod
    def validate_resolution(cls, value: str) -> str:
        if parse_rational(value) <= 0:
            raise ValueError("verification.resolution must be positive")
        return value

    @property
    def resolution_value(self) -> Fraction:
        return parse_rational(self.resolution)


class Config(StrictConfigModel):
    """Main application configuration."""

    budget: BudgetConfig = Field(default_factory=BudgetConfig)
    verification: VerificationConfig = Field(default_factory=VerificationConfig)
    run_dir: str = Field(default_factory=get_default_run_dir)
    cache_dir: str = "cache"
    log_dir: str = "log"
    log_level: str = "INFO"
    cushion_cache_entries: int = 64


# Report models


class FoundConstant(BaseModel):
    """A constant chosen by search or computed exactly during a construction."""

    name: str
    value: str
    evidence: Evidence = "exact"
    step: str | None = None

    @classmethod
    def of(cls, name: str, value: Fraction | int, evidence: Evidence = "exact", step: str | None = None) -> Self:
        return cls(name=name, value=format_rational(Fraction(value)), evidence=evidence, step=step)

    @property
    def fraction(self) -> Fraction:
        return parse_rational(self.value)

    def as_int(self) -> int:
        value = self.fraction
        if value.denominator != 1:
            raise ValueError(f"Constant {self.name} = {self.value} is not an integer")
        return int(value)


class ProvenanceEntry(BaseModel):
    """How one polynomial of a representation was built."""

    index: int
    construction: str
    degree: int
    constants: list[FoundConstant] = Field(default_factory=list)
    note: str | None = None


class Counterexample(BaseModel):
    point: list[str]
    stratum: str
    expected: bool | None = None
    observed: bool | None = None
    values: list[str] = Field(default_factory=list)
    detail: str | None = None


class VerificationReport(BaseModel):
    """Evidence that a representation or separation holds."""

    mode: Literal["sampled", "certified"]
    passed: bool
    strata: dict[str, int] = Field(default_factory=dict)
    empty_strata: list[str] = Field(default_factory=list)
    certified_boxes: int = 0
    gap_boxes: int = 0
    unresolved_boxes: int = 0
    resolution: str | None = None
    recession_checks: int = 0
    counterexamples: list[Counterexample] = Field(default_factory=list)
    seconds: float | None = None

    @model_validator(mode="after")
    def counterexamples_fail(self) -> Self:
        if self.counterexamples:
            self.passed = False
        return self


class RepresentationDocument(BaseModel):
    """JSON document emitted by ``polyrep represent``."""

    dim: int
    pipeline: str
    target: dict[str, Any]
    polynomials: list[dict[str, Any]]
    provenance: list[ProvenanceEntry]
    faithful: bool = False
    report: VerificationReport | None = None
    seconds: float | None = None


class SeparationDocument(BaseModel):
    """JSON document emitted by ``polyrep separate``."""

    dim: int
    construction: str
    polynomial: dict[str, Any]
    found_constants: list[FoundConstant]
    evidence: Evidence
    report: VerificationReport | None = None


class FaceAudit(BaseModel):
    face: int
    dim: int
    witness: list[str]
    vanishing: list[int]
    required: int
    ok: bool


class VanishingAudit(BaseModel):
    """Per-face count of polynomials vanishing identically on the face."""

    faces: list[FaceAudit]
    size: int
    lower_bound: int
    passed: bool


class PolyhedronInfo(BaseModel):
    """Summary printed by ``polyrep info``."""

    dim: int
    facets: int
    vertices: int
    rays: int
    bounded: bool
    lineality: int
    simple: bool
    s: int
    f_vector: list[int]
    lower_bound: int
    pipeline: str
    symmetric_epsilon: str | None = None
