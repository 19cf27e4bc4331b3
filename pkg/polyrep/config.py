import functools
import logging
import os
import tomllib
from pathlib import Path

from dotenv import load_dotenv
from pydantic import ValidationError

from polyrep.errors import ParseError
from polyrep.models import BudgetConfig, Config
from polyrep.poly import parse_rational

logger = logging.getLogger(__name__)

load_dotenv()  # Load environment variables from .env file

DEFAULT_CONFIG_PATH = Path("config/config.toml")


def _resolve_runtime_path(path: str, base_dir: Path | None = None) -> str:
    """Resolve a configured runtime path to an absolute path."""
    runtime_path = Path(path).expanduser()
    if not runtime_path.is_absolute():
        runtime_path = (base_dir or Path.cwd()) / runtime_path
    return str(runtime_path.resolve())


def resolve_runtime_paths(config: Config, base_dir: Path | None = None) -> Config:
    """Return a config copy with runtime directories resolved to absolute paths."""
    run_dir = _resolve_runtime_path(config.run_dir, base_dir)
    runtime_base = Path(run_dir)
    return config.model_copy(
        update={
            "run_dir": run_dir,
            "cache_dir": _resolve_runtime_path(config.cache_dir, runtime_base),
            "log_dir": _resolve_runtime_path(config.log_dir, runtime_base),
        }
    )


@functools.lru_cache(maxsize=8)
def load_config(path: str | Path | None = None) -> Config:
    """Loads the configuration from a TOML file and validates it against the Config model.

    Args:
        path: The path to the configuration TOML file. When omitted, ``config/config.toml`` is used if it
            exists and the built-in defaults otherwise.

    Returns:
        A Config object containing the loaded configuration.

    Raises:
        FileNotFoundError: If an explicitly given configuration file does not exist.
        ValueError: If the configuration is invalid (malformed TOML or schema validation error).
    """
    if path is None:
        if not DEFAULT_CONFIG_PATH.exists():
            logger.debug("No configuration file at %s, using defaults", DEFAULT_CONFIG_PATH)
            return resolve_runtime_paths(Config(), Path.cwd())
        path = DEFAULT_CONFIG_PATH
    config_path = Path(path)
    try:
        logger.info("Loading configuration from %s", config_path)
        with config_path.open("rb") as f:
            data = tomllib.load(f)
        logger.info("Configuration loaded successfully.")
        return resolve_runtime_paths(Config(**data), Path.cwd())
    except FileNotFoundError:
        logger.error("Configuration file not found at: %s", config_path)
        raise FileNotFoundError(f"Configuration file not found at: {config_path}")
    except tomllib.TOMLDecodeError as e:
        logger.error("Failed to parse TOML file at %s: %s", config_path, e)
        raise ValueError(f"Invalid TOML configuration at {config_path}: {e}")
    except ValidationError as e:
        logger.error("Invalid configuration schema: %s", e)
        raise ValueError(f"Invalid configuration schema: {e}")


def budget_override(budget: BudgetConfig, value: str) -> BudgetConfig:
    """Apply a ``--budget`` value: a positive rational scale, or a TOML file with budget keys.

    The TOML file may hold the keys at top level or under ``[budget]``; keys it omits keep their current
    values.

    Raises:
        ParseError: If the value is neither a positive rational nor a valid budget file.
    """
    path = Path(value).expanduser()
    if path.suffix == ".toml" or path.is_file():
        try:
            with path.open("rb") as f:
                data = tomllib.load(f)
        except FileNotFoundError:
            raise ParseError(f"Budget file not found: {path}") from None
        except tomllib.TOMLDecodeError as e:
            raise ParseError(f"Invalid TOML budget at {path}: {e}") from e
        table = data.get("budget", data)
        try:
            result = BudgetConfig(**{**budget.model_dump(), **table})
        except (TypeError, ValidationError) as e:
            raise ParseError(f"Invalid budget in {path}: {e}") from e
        logger.info("Using budget from %s", path)
        return result
    scale = parse_rational(value)
    if scale <= 0:
        raise ParseError(f"Budget scale must be positive, got {value}")
    logger.info("Scaling the budget by %s", value)
    return budget.scaled(scale)


def get_budget(config: Config, seed: int | None = None, override: str | None = None) -> BudgetConfig:
    """Budget from config, scaled by ``POLYREP_BUDGET_SCALE``, then ``override``, reseeded when ``seed`` is given.

    Args:
        config: Loaded configuration.
        seed: Optional seed that takes precedence over the configured one.
        override: Optional ``--budget`` value, see `budget_override`.

    Returns:
        The effective search budget.
    """
    budget = config.budget
    env_scale = os.environ.get("POLYREP_BUDGET_SCALE")
    if env_scale:
        try:
            scale = parse_rational(env_scale)
            if scale <= 0:
                raise ValueError("scale must be positive")
            budget = budget.scaled(scale)
            logger.info("Using POLYREP_BUDGET_SCALE environment variable: %s", env_scale)
        except (ParseError, ValueError):
            logger.warning("Invalid POLYREP_BUDGET_SCALE value: %s, using config value", env_scale)
    if override is not None:
        budget = budget_override(budget, override)
    if seed is not None:
        budget = budget.model_copy(update={"seed": seed})
    return budget


def get_log_level(config: Config) -> str:
    """Log level from config, overridden by ``POLYREP_LOG_LEVEL``."""
    env_level = os.environ.get("POLYREP_LOG_LEVEL")
    if env_level:
        if env_level.upper() in logging.getLevelNamesMapping():
            return env_level.upper()
        logger.warning("Invalid POLYREP_LOG_LEVEL value: %s, using config value", env_level)
    return config.log_level
