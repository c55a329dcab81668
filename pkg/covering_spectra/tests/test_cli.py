"""Tests for the command line."""
import json
import logging

import pytest

from covering_spectra.cli import main, run_job
from covering_spectra.const import (
    EXIT_AMBIGUOUS,
    EXIT_BOUND_VIOLATED,
    EXIT_OK,
    EXIT_USAGE,
    SCHEMA_VERSION,
    VERDICT_STRICT,
)

from .conftest import MOCK_COVER_LAMBDA_1, MOCK_CYCLE_LENGTH, MOCK_JOB, MOCK_LAMBDA_1, MOCK_TRIANGLE


def _make_file(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def _make_cycle_cover(tmp_path):
    """Write C12 and its connected double cover, return the cover path."""
    complex_path = tmp_path / "cycle.json"
    cover_path = tmp_path / "cover.json"
    assert main(["surface", "make", "--kind", "cycle", "--params", str(MOCK_CYCLE_LENGTH),
                 "-o", str(complex_path)]) == EXIT_OK
    assert main(["cover", "build", "--complex", str(complex_path), "--cyclic", "2", "-o", str(cover_path)]) == EXIT_OK
    return complex_path, cover_path


class TestSurfaceCommands:
    """Tests for the surface group."""

    def test_make_writes_artifact(self, tmp_path):
        """Artifacts carry the schema version, kind and result."""
        complex_path, _ = _make_cycle_cover(tmp_path)
        data = _read(complex_path)

        assert data["schema_version"] == SCHEMA_VERSION
        assert data["kind"] == "complex"
        assert data["result"]["vertices"] == MOCK_CYCLE_LENGTH

    def test_classify_triangle(self, tmp_path, capsys):
        """A graph triangle has chi 0 and no boundary edges."""
        path = _make_file(tmp_path, "triangle.json", MOCK_TRIANGLE)

        assert main(["surface", "classify", "--complex", path]) == EXIT_OK
        result = json.loads(capsys.readouterr().out)["result"]
        assert result["chi"] == 0
        assert result["connected"] is True

    def test_homology_of_cycle(self, tmp_path, capsys):
        """H1 of a cycle is Z."""
        complex_path, _ = _make_cycle_cover(tmp_path)
        capsys.readouterr()

        assert main(["surface", "homology", "--complex", str(complex_path)]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["result"] == {"rank": 1, "torsion": []}

    def test_unknown_preset(self):
        """argparse rejects unknown kinds with a usage exit."""
        assert main(["surface", "make", "--kind", "klein-bottle-ish", "--params", "1"]) == EXIT_USAGE

    def test_bad_params(self, capsys):
        """Wrong parameter counts are reported on stderr."""
        assert main(["surface", "make", "--kind", "cycle", "--params", "3,4,5"]) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err


class TestCoverAndStability:
    """Tests for cover building and verdicts through the command line."""

    def test_cover_artifact(self, tmp_path):
        """The double cover of C12 is a connected 24-cycle."""
        _, cover_path = _make_cycle_cover(tmp_path)
        result = _read(cover_path)["result"]

        assert result["degree"] == 2
        assert result["connected"] is True
        assert result["total"]["vertices"] == 2 * MOCK_CYCLE_LENGTH

    def test_verdict_lambda_1(self, tmp_path, capsys):
        """lambda_1 of C12 is strictly unstable under the double cover."""
        _, cover_path = _make_cycle_cover(tmp_path)
        capsys.readouterr()

        assert main(["stab", "verdict", "--cover", str(cover_path)]) == EXIT_OK
        result = json.loads(capsys.readouterr().out)["result"]
        assert result["verdict"] == VERDICT_STRICT
        assert result["target"]["lambda"] == pytest.approx(MOCK_LAMBDA_1)

    def test_ambiguous_interval_exit(self, tmp_path):
        """An interval end within the margin of an eigenvalue exits 3."""
        _, cover_path = _make_cycle_cover(tmp_path)
        target = f"0,{MOCK_COVER_LAMBDA_1 - 1e-8!r}"

        assert main(["stab", "verdict", "--cover", str(cover_path), "--target", target]) == EXIT_AMBIGUOUS

    def test_bad_target(self, tmp_path):
        """Targets that are neither indices nor intervals are usage errors."""
        _, cover_path = _make_cycle_cover(tmp_path)

        assert main(["stab", "verdict", "--cover", str(cover_path), "--target", "lambda-one"]) == EXIT_USAGE

    def test_cover_without_spec(self, tmp_path):
        """cover build needs --spec or --cyclic."""
        complex_path, _ = _make_cycle_cover(tmp_path)

        assert main(["cover", "build", "--complex", str(complex_path)]) == EXIT_USAGE


    def test_tower_without_roof(self, tmp_path, capsys):
        """Without --roof the tower only records its trajectory."""
        complex_path = tmp_path / "c3.json"
        assert main(["surface", "make", "--kind", "cycle", "--params", "3", "-o", str(complex_path)]) == EXIT_OK
        capsys.readouterr()

        assert main(["stab", "tower", "--complex", str(complex_path), "--schedule", "0,0"]) == EXIT_OK
        result = json.loads(capsys.readouterr().out)["result"]
        assert result["roof"] is None
        assert not any(e["name"] == "final level below roof" for e in result["entries"])

    def test_tower_roof_tolerance(self, tmp_path):
        """A zero roof with tolerance passes where the bare roof fails."""
        complex_path = tmp_path / "c3.json"
        assert main(["surface", "make", "--kind", "cycle", "--params", "3", "-o", str(complex_path)]) == EXIT_OK
        base = ["stab", "tower", "--complex", str(complex_path), "--schedule", "0,0,0,0,0", "--roof", "0"]

        assert main([*base, "--roof-tol", "0.01"]) == EXIT_OK
        assert main(base) == EXIT_BOUND_VIOLATED


class TestSpectrumCommands:
    """Tests for spectrum computation and export."""

    def test_compute_csv(self, tmp_path, capsys):
        """CSV output has a header and one row per eigenpair."""
        complex_path, _ = _make_cycle_cover(tmp_path)
        capsys.readouterr()

        assert main(["spec", "compute", "--complex", str(complex_path), "--m", "4", "--format", "csv"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 5

    def test_compute_needs_input(self):
        """Neither --complex nor --cover is a usage error."""
        assert main(["spec", "compute"]) == EXIT_USAGE

    def test_export(self, tmp_path):
        """Triplet export is an artifact whose text starts with the stiffness header."""
        path = _make_file(tmp_path, "triangle.json", MOCK_TRIANGLE)
        out = tmp_path / "triplets.json"

        assert main(["spec", "export", "--complex", path, "-o", str(out)]) == EXIT_OK
        data = _read(out)
        assert data["kind"] == "triplets"
        assert data["config_hash"]
        assert data["result"]["dim"] == 3
        assert data["result"]["triplets"].startswith("% stiffness graph 3 3")

    def test_missing_file(self, tmp_path):
        """Unreadable inputs are usage errors."""
        assert main(["spec", "compute", "--complex", str(tmp_path / "absent.json")]) == EXIT_USAGE


class TestGroupAndBatch:
    """Tests for group counts and batch runs."""

    def test_abelian_mu(self, capsys):
        """Z/2 x Z/4 needs two generators."""
        assert main(["group", "mu", "--factors", "2,4"]) == EXIT_OK
        result = json.loads(capsys.readouterr().out)["result"]
        assert result["mu"] == 2
        assert result["invariants"] == {"rank": 0, "torsion": [2, 4]}

    def test_respec(self, capsys):
        """Trivial and random instances all pass."""
        assert main(["stab", "respec", "--random", "2", "--dim", "30", "--seed", "1"]) == EXIT_OK
        result = json.loads(capsys.readouterr().out)["result"]
        assert result["passed"] is True

    def test_batch(self, tmp_path):
        """Batch summaries list every job with its exit code."""
        job = _make_file(tmp_path, "job.json", MOCK_JOB)
        summary = tmp_path / "summary.json"

        assert main(["stab", "batch", job, "-o", str(summary)]) == EXIT_OK
        assert _read(summary)["result"]["jobs"] == {
            "mu": {"exit": EXIT_OK, "error": None, "output": str(tmp_path / "mu.out")}
        }
        assert _read(tmp_path / "mu.out")["result"]["mu"] == 2

    def test_batch_keeps_stdout_clean(self, tmp_path, capsys):
        """Job artifacts go to their own files, so stdout carries only the summary."""
        first = _make_file(tmp_path, "a.json", {"id": "a", "argv": ["group", "mu", "--factors", "2,4"]})
        second = _make_file(tmp_path, "b.json", {"id": "b", "argv": ["group", "mu", "--factors", "3,9"]})

        assert main(["stab", "batch", first, second, "--jobs", "2"]) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert sorted(summary["result"]["jobs"]) == ["a", "b"]
        assert _read(tmp_path / "b.out")["result"]["mu"] == 2

    def test_run_job_leaves_logging_alone(self, capsys):
        """run_job dispatches without touching the root logger."""
        root = logging.getLogger()
        before = (root.level, list(root.handlers))

        assert run_job(["group", "mu", "--factors", "2,4", "-vv"]) == EXIT_OK
        assert (root.level, list(root.handlers)) == before
        assert run_job(["group", "nope"]) == EXIT_USAGE

    def test_batch_duplicate_ids(self, tmp_path):
        """Job ids are unique across files."""
        first = _make_file(tmp_path, "a.json", MOCK_JOB)
        second = _make_file(tmp_path, "b.json", MOCK_JOB)

        assert main(["stab", "batch", first, second]) == EXIT_USAGE
