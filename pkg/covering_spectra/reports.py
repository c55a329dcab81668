"""Versioned JSON artifacts and CSV tables.

Every artifact is an envelope ``{schema_version, kind, config_hash, seed,
result}``. JSON is written with sorted keys so an identical config yields
byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import numpy as np

from .config import RunConfig
from .const import FORMAT_CSV, FORMAT_JSON, SCHEMA_VERSION
from .exceptions import UsageError

_LOGGER = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ("index", "eigenvalue", "cluster_id", "residual")
LEDGER_COLUMNS = ("experiment", "name", "claimed", "observed", "holds", "tight")


def _plain(value: Any) -> Any:
    """Numpy scalars and arrays to JSON types; non-finite floats as strings."""
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def envelope(kind: str, result: Any, config: RunConfig) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config_hash": config.config_hash,
        "seed": config.seed,
        "result": _plain(result),
    }


def dumps_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def spectrum_csv(result: Mapping[str, Any]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SPECTRUM_COLUMNS)
    for i, (value, cid, res) in enumerate(zip(result["eigenvalues"], result["cluster_ids"], result["residuals"])):
        writer.writerow([i, repr(float(value)), int(cid), repr(float(res))])
    return out.getvalue()


def ledger_rows(experiment: str, result: Mapping[str, Any]) -> list[list[Any]]:
    return [
        [experiment, e["name"], e["claimed"], e["observed"], e["holds"], e["tight"]]
        for e in result.get("entries", [])
    ]


def ledger_csv(rows: Iterable[list[Any]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(LEDGER_COLUMNS)
    writer.writerows(rows)
    return out.getvalue()


def render(data: dict[str, Any], fmt: str) -> str:
    """Text of an envelope in ``fmt``; CSV exists for spectra and ledgers."""
    if fmt == FORMAT_JSON:
        return dumps_json(data)
    if fmt != FORMAT_CSV:
        raise UsageError(f"unknown format {fmt!r}")
    result = data["result"]
    if isinstance(result, Mapping) and "eigenvalues" in result and "cluster_ids" in result:
        return spectrum_csv(result)
    if isinstance(result, Mapping) and "entries" in result:
        return ledger_csv(ledger_rows(data["kind"], result))
    raise UsageError(f"{data['kind']} results have no CSV form")


def write_output(text: str, path: str | None) -> None:
    if path is None:
        print(text, end="")
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    _LOGGER.info("Wrote %s", target)


def read_payload(path: str) -> dict[str, Any]:
    """The ``result`` of an artifact, or the whole object for plain input files."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise UsageError(f"{path} is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise UsageError(f"{path} must hold a JSON object")
    if "schema_version" in data:
        version = data["schema_version"]
        if version != SCHEMA_VERSION:
            raise UsageError(f"{path} has schema version {version}, expected {SCHEMA_VERSION}")
        return data["result"]
    return data
