"""Concurrent batch runner for independent experiment jobs."""
from __future__ import annotations

import asyncio
import json
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import EXIT_OK, EXIT_USAGE
from .exceptions import UsageError

_LOGGER = logging.getLogger(__name__)

JOB_SCHEMA = vol.Schema(
    {
        vol.Required("id"): vol.All(str, vol.Length(min=1)),
        vol.Required("argv"): [str],
        vol.Optional("output"): vol.All(str, vol.Length(min=1)),
    },
    extra=vol.ALLOW_EXTRA,
)

Runner = Callable[[list[str]], int]

OUTPUT_FLAGS = ("-o", "--output")


@dataclass(frozen=True)
class BatchJob:
    """One job; its artifact goes to ``output`` unless its argv already names one."""

    id: str
    argv: tuple[str, ...]
    output: str | None = None

    @property
    def named_output(self) -> str | None:
        for i, arg in enumerate(self.argv):
            if arg in OUTPUT_FLAGS and i + 1 < len(self.argv):
                return self.argv[i + 1]
            if arg.startswith("--output="):
                return arg.partition("=")[2]
        return None

    @property
    def target(self) -> str | None:
        return self.named_output or self.output

    def command(self) -> list[str]:
        if self.output is None or self.named_output is not None:
            return list(self.argv)
        return [*self.argv, "--output", self.output]


@dataclass(frozen=True)
class JobResult:
    id: str
    exit_code: int
    error: str | None = None
    output: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"exit": self.exit_code, "error": self.error, "output": self.output}


def load_jobs(paths: Sequence[str]) -> list[BatchJob]:
    jobs: list[BatchJob] = []
    seen: set[str] = set()
    for path in paths:
        try:
            data = JOB_SCHEMA(json.loads(Path(path).read_text(encoding="utf-8")))
        except OSError as err:
            raise UsageError(f"cannot read job file {path}: {err}") from err
        except (json.JSONDecodeError, vol.Invalid) as err:
            raise UsageError(f"invalid job file {path}: {err}") from err
        if data["id"] in seen:
            raise UsageError(f"duplicate job id {data['id']!r}")
        seen.add(data["id"])
        output = data.get("output", str(Path(path).with_name(f"{data['id']}.out")))
        jobs.append(BatchJob(id=data["id"], argv=tuple(data["argv"]), output=output))
    return jobs


class BatchScheduler:
    """Run jobs through a synchronous runner on worker threads.

    At most ``concurrency`` jobs run at once. Jobs share no state and each
    writes its own artifact file; a job that raises is recorded with a usage
    exit code and does not stop the others.
    """

    def __init__(self, runner: Runner, concurrency: int = 1) -> None:
        if concurrency < 1:
            raise UsageError("concurrency must be at least 1")
        self._runner = runner
        self._semaphore = asyncio.Semaphore(concurrency)

    async def _run_one(self, job: BatchJob) -> JobResult:
        async with self._semaphore:
            _LOGGER.debug("Job %s started", job.id)
            try:
                code = await asyncio.to_thread(self._runner, job.command())
            except Exception as err:
                _LOGGER.exception("Job %s failed", job.id)
                return JobResult(job.id, EXIT_USAGE, f"{type(err).__name__}: {err}", job.target)
            _LOGGER.debug("Job %s finished with exit %d", job.id, code)
            return JobResult(job.id, code, output=job.target)

    async def run(self, jobs: Sequence[BatchJob]) -> dict[str, JobResult]:
        results = await asyncio.gather(*(self._run_one(job) for job in jobs))
        return {r.id: r for r in results}


def run_batch(jobs: Sequence[BatchJob], runner: Runner, concurrency: int = 1) -> dict[str, JobResult]:
    async def _main() -> dict[str, JobResult]:
        return await BatchScheduler(runner, concurrency).run(jobs)

    results = asyncio.run(_main())
    failed = sorted(job_id for job_id, r in results.items() if r.exit_code != EXIT_OK)
    if failed:
        _LOGGER.warning("%d of %d jobs failed: %s", len(failed), len(results), ", ".join(failed))
    return results


def batch_summary(results: dict[str, JobResult]) -> dict[str, Any]:
    return {"jobs": {job_id: results[job_id].to_dict() for job_id in sorted(results)}}
