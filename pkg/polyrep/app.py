"""polyrep application - configuration, logging and the library entry points used by the CLI."""

import json
import logging
import time
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.logging import RichHandler

from polyrep.catalog import load_entry
from polyrep.config import get_budget, get_log_level, load_config, resolve_runtime_paths
from polyrep.cushion_cache import CushionCache
from polyrep.errors import ParseError, VerificationFailure
from polyrep.geometry import HPolyhedron, load_hrep
from polyrep.models import (
    BudgetConfig,
    Config,
    PolyhedronInfo,
    RepresentationDocument,
    SeparationDocument,
    VerificationConfig,
)
from polyrep.poly import format_rational
from polyrep.representations import (
    Representation,
    choose_pipeline,
    faithful_normal_form,
    polynomial_json,
    represent,
    simplicity_profile,
    size_lower_bound,
    symmetric_reduction_epsilon,
)
from polyrep.separation import separate_disjoint
from polyrep.sides import side_from_json
from polyrep.verification import SeparationContract, check_representation, check_separation

logger = logging.getLogger(__name__)


class PolyRepApp:
    """Core polyrep application."""

    def __init__(
        self,
        config_path: str | None = None,
        seed: int | None = None,
        cache_dir: str | None = None,
        log_dir: str | None = None,
        timing: bool = False,
        budget: str | None = None,
    ):
        self.config_path = config_path
        self.seed = seed
        self.budget_override = budget
        self.cache_dir_override = cache_dir
        self.log_dir_override = log_dir
        self.timing = timing
        self._config: Config | None = None
        self._cache: CushionCache | None = None
        self._logging_initialized = False

    @property
    def config(self) -> Config:
        """Lazy load and cache configuration."""
        if self._config is None:
            self._config = load_config(self.config_path)
            overrides = {}
            if self.cache_dir_override is not None:
                overrides["cache_dir"] = self.cache_dir_override
            if self.log_dir_override is not None:
                overrides["log_dir"] = self.log_dir_override
            if overrides:
                self._config = resolve_runtime_paths(self._config.model_copy(update=overrides))
        return self._config

    @property
    def budget(self) -> BudgetConfig:
        return get_budget(self.config, self.seed, self.budget_override)

    @property
    def cache(self) -> CushionCache:
        if self._cache is None:
            self._cache = CushionCache.in_dir(self.config.cache_dir, self.config.cushion_cache_entries)
        return self._cache

    def verification_config(self, resolution: str | None = None, samples: int | None = None) -> VerificationConfig:
        update: dict[str, Any] = {}
        if resolution is not None:
            update["resolution"] = resolution
        if samples is not None:
            update["samples"] = samples
        if not update:
            return self.config.verification
        return VerificationConfig(**{**self.config.verification.model_dump(), **update})

    def setup_logging(self) -> None:
        """Set up logging with console and file handlers."""
        if self._logging_initialized:
            return

        log_dir = Path(self.config.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)

        console_handler = RichHandler(
            console=Console(stderr=True),
            rich_tracebacks=True,
            tracebacks_show_locals=False,
        )
        console_handler.setFormatter(logging.Formatter("%(message)s"))

        file_handler = RotatingFileHandler(log_dir / "polyrep.log", maxBytes=5 * 1024 * 1024, backupCount=3)
        file_handler.setFormatter(logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s"))

        logging.basicConfig(
            level=getattr(logging, get_log_level(self.config).upper(), logging.INFO),
            handlers=[console_handler, file_handler],
        )
        self._logging_initialized = True

    # Inputs

    def load_polyhedron(
        self, path: Path | None = None, catalog: str | None = None, allow_decimal: bool = False
    ) -> HPolyhedron:
        """Read a polyhedron from a file or the built-in catalog (exactly one of them)."""
        if (path is None) == (catalog is None):
            raise ParseError("Give exactly one of an input file or a catalog name")
        if catalog is not None:
            return load_entry(catalog)
        return load_hrep(path, allow_decimal)

    @staticmethod
    def load_json(path: Path) -> Any:
        try:
            return json.loads(Path(path).read_text())
        except OSError as e:
            raise ParseError(f"Cannot read {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ParseError(f"Invalid JSON in {path}: {e}") from e

    def load_representation(self, path: Path) -> Representation:
        try:
            doc = RepresentationDocument.model_validate(self.load_json(path))
        except ValueError as e:
            raise ParseError(f"Invalid representation document {path}: {e}") from e
        return Representation.from_document(doc)

    # Commands

    def represent(
        self,
        polyhedron: HPolyhedron,
        pipeline: str = "auto",
        certify: bool = False,
        faithful: bool = False,
    ) -> RepresentationDocument:
        """Build and verify a representation.

        Raises:
            VerificationFailure: If the independent check finds a counterexample.
        """
        start = time.perf_counter()
        budget = self.budget
        rep = represent(polyhedron, pipeline, budget, self.cache)
        if faithful:
            rep = faithful_normal_form(rep)
        mode = "certified" if certify else "sampled"
        report = check_representation(rep, polyhedron, mode, self.config.verification, budget.seed)
        if not self.timing:
            report = report.model_copy(update={"seconds": None})
        seconds = time.perf_counter() - start if self.timing else None
        doc = rep.to_document(budget.max_terms, report, seconds)
        if not report.passed:
            raise VerificationFailure(f"{rep.pipeline} representation failed verification", doc)
        return doc

    def verify(
        self, rep_path: Path, polyhedron: HPolyhedron, mode: str = "sampled", resolution: str | None = None
    ) -> RepresentationDocument:
        rep = self.load_representation(rep_path)
        seed = self.budget.seed
        report = check_representation(rep, polyhedron, mode, self.verification_config(resolution), seed)
        if not self.timing:
            report = report.model_copy(update={"seconds": None})
        doc = rep.to_document(self.budget.max_terms, report)
        if not report.passed:
            raise VerificationFailure("Representation failed verification", doc)
        return doc

    def separate(
        self, s_path: Path, t_path: Path, certify: bool = False, allow_decimal: bool = False
    ) -> SeparationDocument:
        s = side_from_json(self.load_json(s_path), allow_decimal, label="S")
        t = side_from_json(self.load_json(t_path), allow_decimal, label="T")
        budget = self.budget
        separator = separate_disjoint(s, t, budget)
        mode = "certified" if certify else "sampled"
        contract = SeparationContract.for_separator(s, t, separator)
        report = check_separation(contract, mode, self.config.verification, budget.seed)
        if not self.timing:
            report = report.model_copy(update={"seconds": None})
        doc = SeparationDocument(
            dim=s.dim,
            construction=separator.construction,
            polynomial=polynomial_json(separator.poly, budget.max_terms),
            found_constants=separator.constants,
            evidence="certified" if certify and report.passed else separator.evidence,
            report=report,
        )
        if not report.passed:
            raise VerificationFailure("Separator failed verification", doc)
        return doc

    def info(self, polyhedron: HPolyhedron) -> PolyhedronInfo:
        lattice = polyhedron.face_lattice
        profile = simplicity_profile(polyhedron)
        d, s = polyhedron.dim, profile.s
        epsilon = None
        if 0 < s < len(polyhedron.forms):
            epsilon = format_rational(symmetric_reduction_epsilon(len(polyhedron.forms), s, seed=self.budget.seed))
        return PolyhedronInfo(
            dim=d,
            facets=len(polyhedron.forms),
            vertices=len(polyhedron.vertices),
            rays=len(polyhedron.rays),
            bounded=polyhedron.is_bounded,
            lineality=polyhedron.lineality_dim,
            simple=polyhedron.is_simple,
            s=s,
            f_vector=lattice.f_vector,
            lower_bound=size_lower_bound(polyhedron),
            pipeline=choose_pipeline(polyhedron),
            symmetric_epsilon=epsilon,
        )
