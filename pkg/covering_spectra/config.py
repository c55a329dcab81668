"""Run configuration: defaults, a JSON config file, then command-line overrides."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    DEFAULT_CLUSTER_RTOL,
    DEFAULT_COUNT_MARGIN,
    DEFAULT_DENSE_LIMIT,
    DEFAULT_EIG_COUNT,
    DEFAULT_EPS_ZERO,
    DEFAULT_MAX_COSET_DEGREE,
    DEFAULT_MAX_INDEX_FREE,
    DEFAULT_MAX_INDEX_RELATOR,
    DEFAULT_MAX_ITER,
    DEFAULT_SEED,
    DEFAULT_TOL,
    ENV_CONFIG_PATH,
    FORMAT_CSV,
    FORMAT_JSON,
    LAPLACE_COTANGENT,
    LAPLACE_GRAPH,
)
from .exceptions import UsageError
from .helpers import stable_hash

_LOGGER = logging.getLogger(__name__)

_POSITIVE_FLOAT = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
_POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional("m"): _POSITIVE_INT,
        vol.Optional("tol"): _POSITIVE_FLOAT,
        vol.Optional("seed"): vol.Any(None, vol.All(vol.Coerce(int), vol.Range(min=0))),
        vol.Optional("max_iter"): _POSITIVE_INT,
        vol.Optional("dense_limit"): _POSITIVE_INT,
        vol.Optional("margin"): _POSITIVE_FLOAT,
        vol.Optional("cluster_rtol"): _POSITIVE_FLOAT,
        vol.Optional("eps_zero"): vol.All(vol.Coerce(float), vol.Range(min=0, max=0.1, min_included=False,
                                                                       max_included=False)),
        vol.Optional("max_index_free"): _POSITIVE_INT,
        vol.Optional("max_index_relator"): _POSITIVE_INT,
        vol.Optional("max_coset_degree"): _POSITIVE_INT,
        vol.Optional("laplacian"): vol.In((LAPLACE_GRAPH, LAPLACE_COTANGENT)),
        vol.Optional("output"): vol.Any(None, str),
        vol.Optional("format"): vol.In((FORMAT_JSON, FORMAT_CSV)),
        vol.Optional("jobs"): _POSITIVE_INT,
    }
)

# Not part of the config hash: where and how results are written.
_OUTPUT_KEYS = frozenset({"output", "format", "jobs"})


@dataclass(frozen=True)
class RunConfig:
    m: int = DEFAULT_EIG_COUNT
    tol: float = DEFAULT_TOL
    seed: int | None = DEFAULT_SEED
    max_iter: int = DEFAULT_MAX_ITER
    dense_limit: int = DEFAULT_DENSE_LIMIT
    margin: float = DEFAULT_COUNT_MARGIN
    cluster_rtol: float = DEFAULT_CLUSTER_RTOL
    eps_zero: float = DEFAULT_EPS_ZERO
    max_index_free: int = DEFAULT_MAX_INDEX_FREE
    max_index_relator: int = DEFAULT_MAX_INDEX_RELATOR
    max_coset_degree: int = DEFAULT_MAX_COSET_DEGREE
    laplacian: str = LAPLACE_GRAPH
    output: str | None = None
    format: str = FORMAT_JSON
    jobs: int = 1

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        try:
            clean = CONFIG_SCHEMA(dict(data))
        except vol.Invalid as err:
            raise UsageError(f"invalid configuration: {err}") from err
        return cls(**clean)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def merged(self, overrides: dict[str, Any]) -> RunConfig:
        """Apply non-None overrides, validated like a config file."""
        known = {f.name for f in fields(self)}
        present = {k: v for k, v in overrides.items() if k in known and v is not None}
        if not present:
            return self
        try:
            clean = CONFIG_SCHEMA(present)
        except vol.Invalid as err:
            raise UsageError(f"invalid option: {err}") from err
        return replace(self, **clean)

    @property
    def solver(self) -> dict[str, Any]:
        """Keyword arguments for lowest_eigenpairs."""
        return {
            "tol": self.tol,
            "seed": self.seed,
            "max_iter": self.max_iter,
            "dense_limit": self.dense_limit,
            "cluster_rtol": self.cluster_rtol,
        }

    @property
    def enumeration(self) -> dict[str, int]:
        return {"max_index_free": self.max_index_free, "max_index_relator": self.max_index_relator}

    @property
    def config_hash(self) -> str:
        return stable_hash({k: v for k, v in self.to_dict().items() if k not in _OUTPUT_KEYS})


def load_config(path: str | None = None) -> RunConfig:
    """Defaults, overlaid with ``path`` or the file named by the environment."""
    path = path or os.environ.get(ENV_CONFIG_PATH)
    if not path:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise UsageError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise UsageError(f"config {path} is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    _LOGGER.debug("Loaded config from %s", path)
    return RunConfig.from_dict(data)
