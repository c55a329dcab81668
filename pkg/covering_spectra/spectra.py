"""Laplace operators, low eigenpairs, counting functions and transfer operators."""
from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.sparse.linalg import lobpcg

from .const import (
    CANONICAL_SAMPLES,
    CLUSTER_ATOL,
    DEFAULT_CLUSTER_RTOL,
    DEFAULT_COUNT_MARGIN,
    DEFAULT_DENSE_LIMIT,
    DEFAULT_MAX_ITER,
    DEFAULT_SEED,
    DEFAULT_TOL,
    DEGENERATE_AREA,
    LAPLACE_COTANGENT,
    LAPLACE_DIRICHLET,
    LAPLACE_GRAPH,
    MODE_CLOSED,
    MODE_OPEN,
    TRANSFER_TOL,
)
from .covering import Cover
from .exceptions import (
    AmbiguousCountError,
    BoundViolationError,
    ClusterNotFoundError,
    ConvergenceError,
    DegenerateTriangleError,
    IntertwiningError,
    InvalidParamsError,
    MissingCoordinatesError,
    RangeExceededError,
)
from .helpers import make_rng
from .models import SurfaceComplex

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class LaplaceOperator:
    """Stiffness matrix L and diagonal mass B of a generalized eigenproblem L v = lambda B v."""

    stiffness: sp.csr_matrix
    mass: np.ndarray
    kind: str = LAPLACE_GRAPH

    @property
    def dim(self) -> int:
        return int(self.stiffness.shape[0])

    @property
    def mass_matrix(self) -> sp.dia_matrix:
        return sp.diags(self.mass)

    def rayleigh(self, phi: np.ndarray) -> float:
        return float(phi @ (self.stiffness @ phi)) / float(phi @ (self.mass * phi))

    def restrict(self, vertices: Iterable[int]) -> LaplaceOperator:
        """Principal submatrix: Dirichlet condition outside ``vertices``."""
        idx = np.asarray(sorted(set(vertices)), dtype=np.int64)
        return LaplaceOperator(self.stiffness[idx][:, idx].tocsr(), self.mass[idx], LAPLACE_DIRICHLET)


def _graph_operator(c: SurfaceComplex) -> LaplaceOperator:
    w = c.adjacency
    degree = np.asarray(w.sum(axis=1)).ravel()
    return LaplaceOperator((sp.diags(degree) - w).tocsr(), c.mass_array.copy(), LAPLACE_GRAPH)


def _cotangent_operator(c: SurfaceComplex) -> LaplaceOperator:
    if c.coordinates is None:
        raise MissingCoordinatesError("cotangent assembly needs vertex coordinates")
    pts = np.zeros((c.num_vertices, 3))
    raw = np.asarray(c.coordinates, dtype=float)
    pts[:, : raw.shape[1]] = raw
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    mass = np.zeros(c.num_vertices)
    for fid in range(c.num_faces):
        tri = c.face_vertices(fid)
        if len(tri) != 3:
            raise InvalidParamsError(f"cotangent assembly needs triangles, face {fid} has {len(tri)} sides")
        i, j, k = tri
        area = 0.5 * np.linalg.norm(np.cross(pts[j] - pts[i], pts[k] - pts[i]))
        if area < DEGENERATE_AREA:
            raise DegenerateTriangleError(f"face {fid} has area {area:.3e}", face=fid)
        for a, b, o in ((i, j, k), (j, k, i), (k, i, j)):
            u, v = pts[a] - pts[o], pts[b] - pts[o]
            half_cot = 0.5 * float(np.dot(u, v)) / np.linalg.norm(np.cross(u, v))
            rows += [a, b, a, b]
            cols += [b, a, a, b]
            vals += [-half_cot, -half_cot, half_cot, half_cot]
        mass[[i, j, k]] += area / 3.0
    stiffness = sp.csr_matrix((vals, (rows, cols)), shape=(c.num_vertices, c.num_vertices))
    if np.any(mass <= 0):
        raise InvalidParamsError("every vertex needs an incident triangle for a lumped mass")
    return LaplaceOperator(stiffness, mass, LAPLACE_COTANGENT)


def assemble(c: SurfaceComplex, kind: str = LAPLACE_GRAPH) -> LaplaceOperator:
    if kind == LAPLACE_GRAPH:
        return _graph_operator(c)
    if kind == LAPLACE_COTANGENT:
        return _cotangent_operator(c)
    raise InvalidParamsError(f"unknown Laplacian kind {kind!r}")


# -- eigenpairs ------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Lowest eigenpairs, ascending, with B-orthonormal eigenvectors.

    ``residuals[i]`` is the B^-1 norm of ``L v - lambda B v``; it bounds the
    distance from ``eigenvalues[i]`` to the spectrum.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    cluster_ids: np.ndarray
    cluster_gap: float
    tol: float
    seed: int | None
    complete: bool
    solver: str
    mass: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    @property
    def lambda_ess(self) -> float:
        return math.inf

    def clusters(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.cluster_ids == cid) for cid in range(int(self.cluster_ids.max()) + 1)]

    def error_bound(self, i: int) -> float:
        return max(float(self.residuals[i]), CLUSTER_ATOL)

    def cluster_at(self, lam: float) -> int | None:
        """Cluster id whose eigenvalues lie within the cluster gap of ``lam``."""
        for cid, idx in enumerate(self.clusters()):
            vals = self.eigenvalues[idx]
            slack = self.cluster_gap + max(self.error_bound(i) for i in idx)
            if vals.min() - slack <= lam <= vals.max() + slack:
                return cid
        return None

    def cluster_truncated(self, cid: int) -> bool:
        """True when the cluster touches the last computed pair of an incomplete spectrum."""
        return not self.complete and int(self.clusters()[cid][-1]) == self.count - 1

    def certifies(self, lam: float, margin: float = DEFAULT_COUNT_MARGIN) -> bool:
        return self.complete or lam <= float(self.eigenvalues[-1]) - margin

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "cluster_ids": [int(x) for x in self.cluster_ids],
            "residuals": [float(x) for x in self.residuals],
            "cluster_gap": self.cluster_gap,
            "tol": self.tol,
            "seed": self.seed,
            "complete": self.complete,
            "solver": self.solver,
            "lambda_ess": "inf",
        }


def _residuals(op: LaplaceOperator, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    r = op.stiffness @ vectors - vectors * op.mass[:, None] * values[None, :]
    return np.sqrt(np.sum(r * r / op.mass[:, None], axis=0))


def _cluster(values: np.ndarray, rtol: float) -> tuple[np.ndarray, float]:
    gap = max(rtol * float(np.max(np.abs(values))) if len(values) else 0.0, CLUSTER_ATOL)
    ids = np.zeros(len(values), dtype=np.int64)
    for i in range(1, len(values)):
        ids[i] = ids[i - 1] + (1 if values[i] - values[i - 1] > gap else 0)
    return ids, gap


def lowest_eigenpairs(
    op: LaplaceOperator,
    m: int,
    tol: float = DEFAULT_TOL,
    seed: int | None = DEFAULT_SEED,
    max_iter: int = DEFAULT_MAX_ITER,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    cluster_rtol: float = DEFAULT_CLUSTER_RTOL,
) -> Spectrum:
    """The ``m`` smallest generalized eigenpairs of ``op``.

    Small operators use the dense symmetric solver; larger ones run LOBPCG
    from a seeded block with a Jacobi preconditioner, followed by a final
    Rayleigh-Ritz step.
    """
    n = op.dim
    if not 1 <= m <= n:
        raise InvalidParamsError(f"requested {m} eigenpairs of a {n}-dimensional operator")
    if tol <= 0:
        raise InvalidParamsError("tolerance must be positive")
    scale = max(1.0, float(abs(op.stiffness).sum(axis=1).max()))
    if n <= dense_limit:
        values, vectors = la.eigh(op.stiffness.toarray(), np.diag(op.mass), subset_by_index=[0, m - 1])
        solver = "dense"
    else:
        rng = make_rng(seed)
        x0 = rng.standard_normal((n, m))
        diag = op.stiffness.diagonal()
        precond = sp.diags(1.0 / np.where(diag > 0, diag, 1.0))
        values, vectors = lobpcg(
            op.stiffness, x0, B=op.mass_matrix, M=precond, tol=tol * scale / 10, maxiter=max_iter, largest=False
        )
        # Rayleigh-Ritz on the returned block restores B-orthonormality
        gram_l = vectors.T @ (op.stiffness @ vectors)
        gram_b = vectors.T @ (vectors * op.mass[:, None])
        values, coeffs = la.eigh((gram_l + gram_l.T) / 2, (gram_b + gram_b.T) / 2)
        vectors = vectors @ coeffs
        solver = "lobpcg"
    order = np.argsort(values)
    values, vectors = np.asarray(values)[order], np.asarray(vectors)[:, order]
    residuals = _residuals(op, values, vectors)
    bad = residuals > tol * scale
    if np.any(bad):
        raise ConvergenceError(
            f"{int(bad.sum())} eigenpairs above residual tolerance {tol * scale:.2e} (max {residuals.max():.2e})",
            residuals=[float(x) for x in residuals],
        )
    ids, gap = _cluster(values, cluster_rtol)
    _LOGGER.debug("Solved %d eigenpairs of a %d-dimensional %s operator with %s (max residual %.2e)", m, n, op.kind,
                  solver, residuals.max())
    return Spectrum(
        eigenvalues=values,
        eigenvectors=vectors,
        residuals=residuals,
        cluster_ids=ids,
        cluster_gap=gap,
        tol=tol,
        seed=seed,
        complete=m == n,
        solver=solver,
        mass=op.mass.copy(),
    )


def count_below(s: Spectrum, lam: float, mode: str = MODE_CLOSED, margin: float = DEFAULT_COUNT_MARGIN) -> int:
    """N(lambda) (closed) or N(lambda-) (open) with a margin band around ``lam``."""
    if mode not in (MODE_CLOSED, MODE_OPEN):
        raise InvalidParamsError(f"unknown count mode {mode!r}")
    if not s.certifies(lam, margin):
        raise RangeExceededError(
            f"lambda={lam:.6g} beyond the certified range (last eigenvalue {s.eigenvalues[-1]:.6g})"
        )
    for i, value in enumerate(s.eigenvalues):
        if abs(abs(value - lam) - margin) <= s.error_bound(i):
            raise AmbiguousCountError(
                f"eigenvalue {value:.12g} sits on the margin band edge of {lam:.12g}",
                value=lam,
                eigenvalue=float(value),
            )
    if mode == MODE_CLOSED:
        return int(np.sum(s.eigenvalues <= lam + margin))
    return int(np.sum(s.eigenvalues < lam - margin))


# -- transfer operators ----------------------------------------------------


@dataclass(frozen=True)
class TransferPair:
    """Pullback p* (copy to every sheet) and pushdown p_* (fiber average)."""

    pullback: sp.csr_matrix
    pushdown: sp.csr_matrix
    degree: int
    base_mass: np.ndarray
    cover_mass: np.ndarray
    intertwining_residual: float

    def adjointness_residual(self, phi_cover: np.ndarray, phi_base: np.ndarray) -> float:
        """|<phi', p* phi>_M' - |p| <p_* phi', phi>_M|, relative to the norms involved."""
        left = float(np.dot(phi_cover * self.cover_mass, self.pullback @ phi_base))
        right = self.degree * float(np.dot(self.pushdown @ phi_cover * self.base_mass, phi_base))
        norm = math.sqrt(float(np.dot(phi_cover * self.cover_mass, phi_cover))) * math.sqrt(
            self.degree * float(np.dot(phi_base * self.base_mass, phi_base))
        )
        return abs(left - right) / max(norm, 1.0)


def transfer_pair(cov: Cover, kind: str = LAPLACE_GRAPH) -> TransferPair:
    """Build p*, p_* and verify p_* p* = I and L' p* = p* L."""
    n, nv = cov.degree, cov.base.num_vertices
    rows = np.arange(n * nv)
    pullback = sp.csr_matrix((np.ones(n * nv), (rows, cov.vertex_projection)), shape=(n * nv, nv))
    pushdown = (pullback.T / n).tocsr()
    base_op, cover_op = assemble(cov.base, kind), assemble(cov.total, kind)
    ident = abs(pushdown @ pullback - sp.identity(nv)).max()
    lhs = cover_op.stiffness @ pullback - pullback @ base_op.stiffness
    scale = max(1.0, float(abs(base_op.stiffness).max()))
    residual = max(float(abs(lhs).max()) / scale, float(ident),
                   float(np.max(np.abs(cover_op.mass - pullback @ base_op.mass))) / scale)
    if residual > TRANSFER_TOL:
        raise IntertwiningError(f"transfer identities fail with residual {residual:.3e}", residual=residual)
    return TransferPair(pullback=pullback, pushdown=pushdown, degree=n, base_mass=base_op.mass,
                        cover_mass=cover_op.mass, intertwining_residual=residual)


@dataclass(frozen=True)
class SplittingReport:
    """Decomposition of a cover eigenspace into lifted and fiber-mean-zero parts."""

    value: float
    dim_total: int
    dim_lifted: int
    dim_kernel: int
    ortho_residual: float
    isometry_residual: float
    lift_residual: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.value,
            "dim_total": self.dim_total,
            "dim_lifted": self.dim_lifted,
            "dim_kernel": self.dim_kernel,
            "ortho_residual": self.ortho_residual,
            "isometry_residual": self.isometry_residual,
            "lift_residual": self.lift_residual,
        }


def invariant_splitting(
    cov: Cover, lam: float, s_base: Spectrum, s_cover: Spectrum, pair: TransferPair | None = None,
    tol: float = 1e-8,
) -> SplittingReport:
    """E'_lambda = p* E_lambda + (E'_lambda intersected with ker p_*)."""
    pair = pair or transfer_pair(cov)
    cid = s_cover.cluster_at(lam)
    if cid is None:
        raise ClusterNotFoundError(f"no cover eigenvalue cluster at {lam:.12g}")
    if s_cover.cluster_truncated(cid):
        _LOGGER.warning("Cover cluster at %.6g may extend past the computed pairs", lam)
    cover_vecs = s_cover.eigenvectors[:, s_cover.clusters()[cid]]
    base_cid = s_base.cluster_at(lam)
    if base_cid is None:
        if not s_base.certifies(lam, s_base.cluster_gap):
            raise RangeExceededError(f"base spectrum does not reach {lam:.6g}")
        base_vecs = np.zeros((cov.base.num_vertices, 0))
    else:
        base_vecs = s_base.eigenvectors[:, s_base.clusters()[base_cid]]

    n = cov.degree
    lifted = (pair.pullback @ base_vecs) / math.sqrt(n)
    pushed = pair.pushdown @ cover_vecs
    if pushed.size:
        # absolute threshold: a cluster of new eigenvalues pushes down to numerical zero
        _, singular, vh = la.svd(pushed)
        kernel_coeffs = vh[int(np.sum(singular > tol)):].T
    else:
        kernel_coeffs = np.eye(cover_vecs.shape[1])
    kernel = cover_vecs @ kernel_coeffs
    bmass = pair.cover_mass
    ortho = float(np.max(np.abs(kernel.T @ (lifted * bmass[:, None])))) if kernel.size and lifted.size else 0.0
    restored = math.sqrt(n) * (pair.pushdown @ lifted)
    gram = restored.T @ (restored * pair.base_mass[:, None])
    isometry = float(np.max(np.abs(gram - np.eye(gram.shape[0])))) if gram.size else 0.0
    projection = cover_vecs @ (cover_vecs.T @ (lifted * bmass[:, None]))
    lift_res = float(np.max(np.abs(lifted - projection))) if lifted.size else 0.0
    report = SplittingReport(
        value=lam,
        dim_total=cover_vecs.shape[1],
        dim_lifted=base_vecs.shape[1],
        dim_kernel=kernel.shape[1],
        ortho_residual=ortho,
        isometry_residual=isometry,
        lift_residual=lift_res,
    )
    if report.dim_total != report.dim_lifted + report.dim_kernel:
        raise BoundViolationError(
            f"eigenspace of dimension {report.dim_total} does not split as "
            f"{report.dim_lifted} + {report.dim_kernel}",
            claimed=report.dim_total,
            observed=report.dim_lifted + report.dim_kernel,
        )
    return report


def dirichlet_lambda0(
    c: SurfaceComplex,
    sub: Iterable[int],
    kind: str = LAPLACE_GRAPH,
    op: LaplaceOperator | None = None,
    **solver: Any,
) -> float:
    """Smallest eigenvalue of the principal submatrix of (L, B) on ``sub``."""
    verts = set(int(v) for v in sub)
    if not verts or len(verts) >= c.num_vertices:
        raise InvalidParamsError("Dirichlet subset must be nonempty and proper")
    if min(verts) < 0 or max(verts) >= c.num_vertices:
        raise InvalidParamsError("Dirichlet subset has out-of-range vertices")
    op = op or assemble(c, kind)
    return float(lowest_eigenpairs(op.restrict(verts), 1, **solver).eigenvalues[0])


# -- representatives and export --------------------------------------------


def _fix_sign(phi: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(phi)))
    return -phi if phi[pivot] < 0 else phi


def _best_on_pattern(basis: np.ndarray, signs: np.ndarray) -> tuple[float, np.ndarray] | None:
    dim = basis.shape[1]
    # variables: coefficients c (free) and t; maximise t
    cost = np.zeros(dim + 1)
    cost[-1] = -1.0
    a_ub = np.vstack([
        np.hstack([-signs[:, None] * basis, np.ones((basis.shape[0], 1))]),
        np.hstack([basis, np.zeros((basis.shape[0], 1))]),
        np.hstack([-basis, np.zeros((basis.shape[0], 1))]),
    ])
    b_ub = np.concatenate([np.zeros(basis.shape[0]), np.ones(2 * basis.shape[0])])
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * (dim + 1), method="highs")
    if not result.success:
        return None
    return float(result.x[-1]), result.x[:-1]


def canonical_eigenvector(
    s: Spectrum, cluster: int, samples: int = CANONICAL_SAMPLES, seed: int | None = DEFAULT_SEED
) -> np.ndarray:
    """Deterministic vector of a cluster maximising min |phi(v)| / max |phi(v)|.

    Candidate sign patterns come from the basis vectors and seeded random
    combinations; each pattern is refined by a linear program.
    """
    idx = s.clusters()[cluster]
    basis = s.eigenvectors[:, idx]
    if basis.shape[1] == 1:
        return _fix_sign(basis[:, 0].copy())
    rng = make_rng(seed)
    combos = [np.eye(basis.shape[1])[i] for i in range(basis.shape[1])]
    combos += [rng.standard_normal(basis.shape[1]) for _ in range(samples)]
    best_score, best = -np.inf, basis[:, 0]
    seen: set[bytes] = set()
    for coeffs in combos:
        phi = basis @ coeffs
        signs = np.where(phi >= 0, 1.0, -1.0)
        key = signs.tobytes()
        if key in seen:
            continue
        seen.add(key)
        refined = _best_on_pattern(basis, signs)
        if refined is None:
            continue
        score, c = refined
        if score > best_score + 1e-12:
            best_score, best = score, basis @ c
    norm = math.sqrt(float(np.dot(best * s.mass, best))) if s.mass.size else float(np.linalg.norm(best))
    _LOGGER.debug("Canonical vector of a %d-dimensional cluster over %d sign patterns: min/max %.3e", len(idx),
                  len(seen), best_score)
    return _fix_sign(best / norm)


def export_triplets(op: LaplaceOperator) -> str:
    """Coordinate triplets ``i j value`` for L, then the diagonal of B."""
    coo = op.stiffness.tocoo()
    lines = [f"% stiffness {op.kind} {op.dim} {op.dim} {coo.nnz}"]
    order = np.lexsort((coo.col, coo.row))
    lines += [f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}" for k in order]
    lines.append(f"% mass {op.dim} {op.dim} {op.dim}")
    lines += [f"{i} {i} {float(m)!r}" for i, m in enumerate(op.mass)]
    return "\n".join(lines) + "\n"


def lift(cov: Cover, phi: np.ndarray) -> np.ndarray:
    """p* phi: copy a base function to every sheet."""
    return np.asarray(phi)[cov.vertex_projection]
