"""Tests for artifacts and tables."""
import json
import math

import numpy as np
import pytest

from covering_spectra.config import RunConfig
from covering_spectra.const import FORMAT_CSV, FORMAT_JSON, SCHEMA_VERSION
from covering_spectra.exceptions import UsageError
from covering_spectra.reports import envelope, read_payload, render, write_output


def _make_envelope(kind, result):
    return envelope(kind, result, RunConfig())


class TestEnvelope:
    """Tests for artifact envelopes."""

    def test_fields(self):
        """Envelopes carry version, kind, hash and seed."""
        data = _make_envelope("spectrum", {"x": 1})

        assert data["schema_version"] == SCHEMA_VERSION
        assert data["kind"] == "spectrum"
        assert data["config_hash"] == RunConfig().config_hash
        assert data["seed"] == RunConfig().seed

    def test_numpy_values_become_plain(self):
        """Arrays, numpy scalars and infinities are JSON friendly."""
        data = _make_envelope("x", {"v": np.arange(3), "f": np.float64(0.5), "b": np.bool_(True), "i": math.inf,
                                    "t": (1, 2)})

        assert data["result"] == {"v": [0, 1, 2], "f": 0.5, "b": True, "i": "inf", "t": [1, 2]}
        json.dumps(data)

    def test_json_is_deterministic(self):
        """Sorted keys give identical text for identical results."""
        first = render(_make_envelope("x", {"b": 1, "a": 2}), FORMAT_JSON)
        second = render(_make_envelope("x", {"a": 2, "b": 1}), FORMAT_JSON)

        assert first == second
        assert first.endswith("\n")


class TestCsv:
    """Tests for CSV rendering."""

    def test_spectrum_csv(self):
        """Spectra render one row per eigenvalue."""
        text = render(
            _make_envelope("spectrum", {"eigenvalues": [0.0, 2.0], "cluster_ids": [0, 1], "residuals": [0.0, 0.0]}),
            FORMAT_CSV,
        )

        assert text.splitlines() == ["index,eigenvalue,cluster_id,residual", "0,0.0,0,0.0", "1,2.0,1,0.0"]

    def test_ledger_csv(self):
        """Bound ledgers render one row per entry."""
        entry = {"name": "gain", "claimed": 3, "observed": 3, "holds": True, "tight": True}
        text = render(_make_envelope("numberg", {"entries": [entry]}), FORMAT_CSV)

        assert text.splitlines()[1] == "numberg,gain,3,3,True,True"

    def test_no_csv_form(self):
        """Other results have no table."""
        with pytest.raises(UsageError, match="no CSV form"):
            render(_make_envelope("homology", {"rank": 1}), FORMAT_CSV)

    def test_unknown_format(self):
        """Formats are json or csv."""
        with pytest.raises(UsageError):
            render(_make_envelope("x", {}), "xml")


class TestFiles:
    """Tests for writing and reading artifacts."""

    def test_round_trip(self, tmp_path):
        """read_payload unwraps the result of a written artifact."""
        path = tmp_path / "sub" / "out.json"
        write_output(render(_make_envelope("x", {"a": 1}), FORMAT_JSON), str(path))

        assert read_payload(str(path)) == {"a": 1}

    def test_plain_input(self, tmp_path):
        """Files without an envelope are returned whole."""
        path = tmp_path / "plain.json"
        path.write_text('{"vertices": 3}', encoding="utf-8")

        assert read_payload(str(path)) == {"vertices": 3}

    def test_version_mismatch(self, tmp_path):
        """Artifacts of another schema version are refused."""
        path = tmp_path / "old.json"
        path.write_text(json.dumps({"schema_version": SCHEMA_VERSION + 1, "result": {}}), encoding="utf-8")

        with pytest.raises(UsageError, match="schema version"):
            read_payload(str(path))

    def test_stdout(self, capsys):
        """Without a path the text goes to stdout."""
        write_output("hello\n", None)

        assert capsys.readouterr().out == "hello\n"
