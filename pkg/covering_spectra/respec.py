"""Finite-dimensional check of the negative-eigenspace dimension inequality.

For a symmetric A with spectral splitting H = H- + H0 + H+, a subspace X on
which the form of A is nonpositive and a subspace Y with X orthogonal to Y
and P Y inside Y (P the projection onto H-), then

    dim(H- minus Y) >= dim P X = dim X - dim(X intersected with H0).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from .const import DEFAULT_RESPEC_DIM, RANK_AMBIGUITY, RANK_TOL
from .exceptions import BoundViolationError, InvalidParamsError, RankAmbiguousError

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class _Split:
    negative: np.ndarray
    null: np.ndarray
    positive: np.ndarray


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0


def _check_band(values: np.ndarray, tol: float, what: str) -> None:
    near = values[(np.abs(values) > tol / RANK_AMBIGUITY) & (np.abs(values) < tol * RANK_AMBIGUITY)]
    if near.size:
        raise RankAmbiguousError(f"{what}: {near.size} values within a factor {RANK_AMBIGUITY:g} of {tol:.1e}")


def _split(a: np.ndarray, tol: float) -> _Split:
    values, vectors = np.linalg.eigh(a)
    _check_band(values, tol, "eigenvalues")
    return _Split(
        negative=vectors[:, values < -tol],
        null=vectors[:, np.abs(values) <= tol],
        positive=vectors[:, values > tol],
    )


def _rank(matrix: np.ndarray, tol: float, what: str) -> int:
    if matrix.size == 0:
        return 0
    sv = np.linalg.svd(matrix, compute_uv=False)
    _check_band(sv, tol, what)
    return int(np.sum(sv > tol))


@dataclass(frozen=True)
class RespecInstance:
    """Symmetric matrix with subspaces X, Y given by basis columns."""

    a: np.ndarray
    x: np.ndarray
    y: np.ndarray
    tol: float = RANK_TOL
    seed: int | None = None

    def __post_init__(self) -> None:
        a, x, y = self.a, self.x, self.y
        n = a.shape[0]
        if a.shape != (n, n) or x.shape[0] != n or y.shape[0] != n:
            raise InvalidParamsError("matrix and subspace bases have mismatched dimensions")
        tol = self.tol * _scale(a)
        if np.max(np.abs(a - a.T), initial=0.0) > tol:
            raise InvalidParamsError("matrix is not symmetric")
        if x.shape[1]:
            form = x.T @ a @ x
            if np.max(np.linalg.eigvalsh((form + form.T) / 2)) > tol * max(1.0, _scale(x) ** 2):
                raise InvalidParamsError("quadratic form is not nonpositive on X")
        if x.shape[1] and y.shape[1] and np.max(np.abs(x.T @ y)) > tol * max(1.0, _scale(x) * _scale(y)):
            raise InvalidParamsError("X is not orthogonal to Y")
        if y.shape[1]:
            neg = _split(a, tol).negative
            py = neg @ (neg.T @ y)
            coeffs, *_ = np.linalg.lstsq(y, py, rcond=None)
            if np.max(np.abs(y @ coeffs - py)) > tol * max(1.0, _scale(y)):
                raise InvalidParamsError("Y is not invariant under the projection onto the negative eigenspace")

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class RespecReport:
    dim_x: int
    dim_x_null: int
    dim_px: int
    dim_neg_minus_y: int
    dim_x_ker_p: int
    orthogonality: float
    seed: int | None = None

    @property
    def equality(self) -> bool:
        return self.dim_px == self.dim_x - self.dim_x_null and self.dim_x_ker_p == self.dim_x_null

    @property
    def inequality(self) -> bool:
        return self.dim_neg_minus_y >= self.dim_px

    @property
    def passed(self) -> bool:
        return self.equality and self.inequality

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim_X": self.dim_x,
            "dim_X_H0": self.dim_x_null,
            "dim_PX": self.dim_px,
            "dim_Hminus_Y": self.dim_neg_minus_y,
            "dim_X_kerP": self.dim_x_ker_p,
            "orthogonality": self.orthogonality,
            "seed": self.seed,
            "pass": self.passed,
        }


def respec_check(inst: RespecInstance) -> RespecReport:
    """All four dimensions by tolerance-banded rank, then the equality and the inequality."""
    tol = inst.tol * _scale(inst.a)
    split = _split(inst.a, tol)
    x, y = inst.x, inst.y
    p = split.negative @ split.negative.T
    px = p @ x
    dim_x = _rank(x, tol, "X")
    off_null = x - split.null @ (split.null.T @ x)
    dim_x_null = dim_x - _rank(off_null, tol, "X off H0")
    dim_px = _rank(px, tol, "PX")
    dim_neg_minus_y = split.negative.shape[1] - _rank(p @ y, tol, "PY")
    ortho = float(np.max(np.abs(px.T @ y))) if px.size and y.size else 0.0
    report = RespecReport(
        dim_x=dim_x,
        dim_x_null=dim_x_null,
        dim_px=dim_px,
        dim_neg_minus_y=dim_neg_minus_y,
        dim_x_ker_p=dim_x - dim_px,
        orthogonality=ortho,
        seed=inst.seed,
    )
    if ortho > tol * max(1.0, _scale(x) * _scale(y)):
        raise BoundViolationError(f"PX is not orthogonal to Y ({ortho:.3e})", claimed=0.0, observed=ortho)
    if not report.passed:
        raise BoundViolationError(
            f"dimensions {report.to_dict()} violate dim(H- - Y) >= dim PX = dim X - dim(X n H0)",
            claimed=report.dim_px,
            observed=report.dim_neg_minus_y,
        )
    _LOGGER.debug("Respec instance of dimension %d: %s", inst.dim, report.to_dict())
    return report


def trivial_respec_instances() -> list[RespecInstance]:
    e = np.eye(3)
    return [
        RespecInstance(np.diag([-1.0, 0.0, 1.0]), e[:, [0]], np.zeros((3, 0))),
        RespecInstance(np.diag([-1.0, 0.0, 1.0]), e[:, [1]], np.zeros((3, 0))),
        RespecInstance(np.diag([-1.0, -2.0, 1.0]), e[:, [0]], e[:, [1]]),
    ]


def random_respec_instance(rng: np.random.Generator, dim: int = DEFAULT_RESPEC_DIM,
                           seed: int | None = None) -> RespecInstance:
    """Instance built from a random orthonormal eigenbasis.

    Y takes part of H- and part of H+, X mixes the rest of H- with H0, so
    every hypothesis holds by construction.
    """
    if dim < 6:
        raise InvalidParamsError("random instances need dimension at least 6")
    basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    n_neg = int(rng.integers(dim // 4, dim // 2 + 1))
    n_null = int(rng.integers(1, dim // 5 + 2))
    n_pos = dim - n_neg - n_null
    values = np.concatenate([-rng.uniform(0.5, 2.0, n_neg), np.zeros(n_null), rng.uniform(0.5, 2.0, n_pos)])
    a = basis @ np.diag(values) @ basis.T
    a = (a + a.T) / 2
    neg, null, pos = basis[:, :n_neg], basis[:, n_neg:n_neg + n_null], basis[:, n_neg + n_null:]

    q_neg = int(rng.integers(0, n_neg))
    q_pos = int(rng.integers(0, n_pos + 1))
    y_neg = neg[:, :q_neg] @ rng.standard_normal((q_neg, q_neg)) if q_neg else np.zeros((dim, 0))
    y_pos = pos @ rng.standard_normal((n_pos, q_pos))
    y = np.hstack([y_neg, y_pos])

    free_neg = neg[:, q_neg:]
    mixed = int(rng.integers(1, free_neg.shape[1] + 1))
    pure = int(rng.integers(0, n_null + 1))
    x_mixed = free_neg @ rng.standard_normal((free_neg.shape[1], mixed)) + null @ rng.standard_normal((n_null, mixed))
    x_pure = null @ rng.standard_normal((n_null, pure))
    x = np.hstack([x_mixed, x_pure])
    return RespecInstance(a=a, x=x, y=y, seed=seed)
