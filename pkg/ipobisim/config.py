"""Project settings read from ``ipobisim.toml``.

Precedence: the ``IPOBISIM_SEED`` environment variable (seed only), then
command-line flags, then the file, then the built-in defaults.
"""

from __future__ import annotations

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from ipobisim.errors import IpoBisimError

LOG = logging.getLogger(__name__)

CONFIG_FILE = "ipobisim.toml"
SEED_ENV = "IPOBISIM_SEED"

ACCEPTANCE_DEFAULTS: dict[str, int] = {
    "coincidence_depth": 8,
    "coincidence_fuel": 200,
    "first_order_pool": 2,
    "first_order_depth": 2,
    "cbv_depth": 4,
    "contextual_pool": 3,
    "contextual_size": 5,
    "corpus_size": 7,
    "corpus_fuel": 1000,
    "tables_max_size": 6,
    "tables_max_metavars": 2,
    "tables_jobs": 4,
    "correspondence_depth": 6,
    "congruence_samples": 200,
    "congruence_seed": 42,
    "invariants_max_size": 8,
    "mgu_pairs": 10_000,
}


@dataclass(frozen=True)
class Settings:
    depth: int = 6
    fuel: int = 512
    pool: int = 3
    arg_bound: int = 2
    seed: int = 0
    jobs: int = 1
    context_size: int = 3
    acceptance: Mapping[str, int] = field(default_factory=lambda: dict(ACCEPTANCE_DEFAULTS))

    def override(self, **values: Any) -> "Settings":
        """Copy with every non-None value replaced."""
        return replace(self, **{k: v for k, v in values.items() if v is not None})


def load_settings(path: str | Path | None = None, environ: Mapping[str, str] | None = None) -> Settings:
    environ = os.environ if environ is None else environ
    settings = Settings()
    config_path = Path(path) if path is not None else Path.cwd() / CONFIG_FILE
    if config_path.is_file():
        settings = _from_file(config_path, settings)
    elif path is not None:
        raise IpoBisimError(f"config file not found: {config_path}")
    else:
        LOG.debug("no %s found, using built-in defaults", CONFIG_FILE)
    if SEED_ENV in environ:
        try:
            settings = replace(settings, seed=int(environ[SEED_ENV]))
        except ValueError as e:
            raise IpoBisimError(f"{SEED_ENV} must be an integer") from e
    return settings


def _from_file(path: Path, settings: Settings) -> Settings:
    with path.open("rb") as f:
        try:
            data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise IpoBisimError(f"{path}: {e}") from e
    known = {f.name for f in fields(Settings)} - {"acceptance"}
    defaults = {}
    for key, value in data.get("defaults", {}).items():
        if key in known:
            defaults[key] = int(value)
        else:
            LOG.warning("%s: ignoring unknown key defaults.%s", path, key)
    acceptance = dict(ACCEPTANCE_DEFAULTS)
    for key, value in data.get("acceptance", {}).items():
        if key in ACCEPTANCE_DEFAULTS:
            acceptance[key] = int(value)
        else:
            LOG.warning("%s: ignoring unknown key acceptance.%s", path, key)
    return replace(settings, acceptance=acceptance, **defaults)
