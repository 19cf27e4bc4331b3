import os
from pathlib import Path

APP_STATE_DIR_NAME = "polyrep"


def get_default_run_dir() -> str:
    """Return the default runtime state directory following the XDG base directory spec."""
    override = os.environ.get("POLYREP_STATE_DIR")
    if override:
        return str(Path(override).expanduser())
    state_home = Path(os.environ.get("XDG_STATE_HOME", Path.home() / ".local" / "state")).expanduser()
    return str(state_home / APP_STATE_DIR_NAME)


def get_default_cache_dir() -> Path:
    """Return the default directory for certified cushion polynomials."""
    return Path(get_default_run_dir()) / "cache"
