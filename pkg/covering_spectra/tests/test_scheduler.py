"""Tests for the batch scheduler."""
import json
import threading
import time

import pytest

from covering_spectra.const import EXIT_OK, EXIT_USAGE
from covering_spectra.exceptions import UsageError
from covering_spectra.scheduler import BatchJob, BatchScheduler, batch_summary, load_jobs, run_batch

from .conftest import MOCK_JOB


def _make_jobs(count):
    return [BatchJob(id=f"job{i}", argv=(str(i),)) for i in range(count)]


class _CountingRunner:
    """Runner that records the peak number of concurrent calls."""

    def __init__(self):
        self.active = 0
        self.peak = 0
        self._lock = threading.Lock()

    def __call__(self, argv):
        with self._lock:
            self.active += 1
            self.peak = max(self.peak, self.active)
        time.sleep(0.02)
        with self._lock:
            self.active -= 1
        return int(argv[0]) % 2


class TestBatchScheduler:
    """Tests for BatchScheduler."""

    @pytest.mark.asyncio
    async def test_results_by_id(self):
        """Every job reports its exit code under its id."""
        results = await BatchScheduler(_CountingRunner(), concurrency=2).run(_make_jobs(4))

        assert sorted(results) == ["job0", "job1", "job2", "job3"]
        assert results["job1"].exit_code == 1
        assert results["job2"].exit_code == EXIT_OK

    @pytest.mark.asyncio
    async def test_concurrency_limit(self):
        """No more than the configured number of jobs run at once."""
        runner = _CountingRunner()
        await BatchScheduler(runner, concurrency=2).run(_make_jobs(6))

        assert runner.peak <= 2

    @pytest.mark.asyncio
    async def test_failing_job_isolated(self):
        """A raising job is recorded and the others still run."""

        def runner(argv):
            if argv == ["1"]:
                raise RuntimeError("boom")
            return EXIT_OK

        results = await BatchScheduler(runner).run(_make_jobs(3))

        assert results["job1"].exit_code == EXIT_USAGE
        assert results["job1"].error == "RuntimeError: boom"
        assert results["job0"].exit_code == EXIT_OK
        assert results["job2"].exit_code == EXIT_OK

    def test_concurrency_positive(self):
        """Concurrency below one is refused."""
        with pytest.raises(UsageError):
            BatchScheduler(lambda argv: 0, concurrency=0)


class TestRunBatch:
    """Tests for the synchronous entry point and job files."""

    def test_run_batch(self):
        """run_batch drives the scheduler to completion."""
        results = run_batch(_make_jobs(3), _CountingRunner(), concurrency=3)

        assert batch_summary(results) == {
            "jobs": {
                "job0": {"exit": 0, "error": None, "output": None},
                "job1": {"exit": 1, "error": None, "output": None},
                "job2": {"exit": 0, "error": None, "output": None},
            }
        }

    def test_load_jobs(self, tmp_path):
        """Job files hold an id and an argument vector."""
        path = tmp_path / "mu.json"
        path.write_text(json.dumps(MOCK_JOB), encoding="utf-8")
        (job,) = load_jobs([str(path)])

        assert job.id == "mu"
        assert job.argv == ("group", "mu", "--factors", "2,4")
        assert job.output == str(tmp_path / "mu.out")
        assert job.command()[-2:] == ["--output", str(tmp_path / "mu.out")]

    def test_explicit_output(self, tmp_path):
        """An output key in the job file replaces the default artifact path."""
        path = tmp_path / "mu.json"
        path.write_text(json.dumps({**MOCK_JOB, "output": "elsewhere.json"}), encoding="utf-8")
        (job,) = load_jobs([str(path)])

        assert job.command() == [*MOCK_JOB["argv"], "--output", "elsewhere.json"]

    def test_argv_output_kept(self):
        """An output flag already in argv is left alone and reported."""
        job = BatchJob(id="mu", argv=("group", "mu", "-o", "mine.json"), output="default.out")

        assert job.command() == ["group", "mu", "-o", "mine.json"]
        assert job.target == "mine.json"

    def test_runner_gets_output(self):
        """The runner receives the job's own output path and the result records it."""
        seen = []

        def runner(argv):
            seen.append(argv)
            return EXIT_OK

        results = run_batch([BatchJob(id="a", argv=("x",), output="a.out")], runner)

        assert seen == [["x", "--output", "a.out"]]
        assert results["a"].to_dict() == {"exit": EXIT_OK, "error": None, "output": "a.out"}

    def test_duplicate_ids(self, tmp_path):
        """Job ids are unique across files."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        first.write_text(json.dumps(MOCK_JOB), encoding="utf-8")
        second.write_text(json.dumps(MOCK_JOB), encoding="utf-8")

        with pytest.raises(UsageError, match="duplicate"):
            load_jobs([str(first), str(second)])

    def test_invalid_job(self, tmp_path):
        """Jobs without argv are rejected."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"id": "x"}), encoding="utf-8")

        with pytest.raises(UsageError, match="invalid job file"):
            load_jobs([str(path)])
