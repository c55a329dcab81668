"""First homology and cocycle lattices of surface complexes.

Generators of the fundamental group are the non-tree edges of the BFS
spanning tree; every face gives one relator row. Rows are reduced by unit
pivots in sparse form, and whatever survives goes through the Smith normal
form of sympy's DomainMatrix.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from sympy import isprime
from sympy.polys.matrices import DM
from sympy.polys.matrices.normalforms import smith_normal_decomp

from .const import COEFFS_Z, COEFFS_Z2
from .exceptions import DisconnectedError, InvalidParamsError
from .models import AbelianInvariants, SurfaceComplex, dart_edge
from .surface import SpanningTree, require_connected, spanning_tree

_LOGGER = logging.getLogger(__name__)

Row = dict[int, int]


@dataclass(frozen=True)
class RelationMatrix:
    """Relators of the abelianised fundamental group in non-tree-edge coordinates."""

    tree: SpanningTree
    generators: tuple[int, ...]
    rows: tuple[Row, ...]

    @property
    def column_of(self) -> dict[int, int]:
        return {eid: i for i, eid in enumerate(self.generators)}


def relation_matrix(c: SurfaceComplex, tree: SpanningTree | None = None) -> RelationMatrix:
    if not c.is_connected():
        raise DisconnectedError("homology needs a connected complex")
    tree = tree or spanning_tree(c)
    tree_edges = tree.edges
    generators = tuple(eid for eid in range(c.num_edges) if eid not in tree_edges)
    column = {eid: i for i, eid in enumerate(generators)}
    rows = []
    for face in c.faces:
        row: Row = {}
        for dart in face:
            eid = dart_edge(dart)
            if eid in column:
                j = column[eid]
                row[j] = row.get(j, 0) + (1 if dart >= 0 else -1)
        rows.append({j: v for j, v in row.items() if v})
    return RelationMatrix(tree=tree, generators=generators, rows=tuple(rows))


def tree_potentials(c: SurfaceComplex, tree: SpanningTree, column: dict[int, int]) -> dict[int, Row]:
    """Generator vector of the tree path from the root to each vertex."""
    potentials: dict[int, Row] = {tree.root: {}}
    for v in tree.order[1:]:
        dart = tree.parent_dart[v]
        parent = c.dart_tail(dart)
        row = dict(potentials[parent])
        eid = dart_edge(dart)
        if eid in column:
            j = column[eid]
            row[j] = row.get(j, 0) + (1 if dart >= 0 else -1)
            if not row[j]:
                del row[j]
        potentials[v] = row
    return potentials


def subdomain_loops(c: SurfaceComplex, sub: Iterable[int], relations: RelationMatrix) -> list[Row]:
    """One generator vector per fundamental cycle of the induced subgraph on ``sub``."""
    verts = require_connected(c, sub)
    local = spanning_tree(c, verts)
    column = relations.column_of
    potential = tree_potentials(c, local, column)
    loops = []
    for eid, (u, v) in enumerate(c.edges):
        if u not in verts or v not in verts or eid in local.edges:
            continue
        # root ~> u along the local tree, across e, then v ~> root
        row = _add(_add(potential[u], _edge_vector(eid, column)), potential[v], -1)
        if row:
            loops.append(row)
    return loops


def _edge_vector(eid: int, column: dict[int, int]) -> Row:
    return {column[eid]: 1} if eid in column else {}


def _add(a: Row, b: Row, scale: int = 1) -> Row:
    out = dict(a)
    for j, val in b.items():
        out[j] = out.get(j, 0) + scale * val
        if not out[j]:
            del out[j]
    return out


def loop_vector(c: SurfaceComplex, darts: Sequence[int], relations: RelationMatrix) -> Row:
    """Generator vector of a closed dart walk."""
    column = relations.column_of
    row: Row = {}
    for dart in darts:
        eid = dart_edge(dart)
        if eid in column:
            row = _add(row, {column[eid]: 1 if dart >= 0 else -1})
    return row


# -- reduction -------------------------------------------------------------


@dataclass
class _Reduction:
    """Result of unit-pivot elimination.

    ``transform`` maps reduced columns back to generator coordinates;
    ``alive`` lists the columns that were not pivoted away.
    """

    units: int
    residual: list[Row]
    alive: list[int]
    transform: np.ndarray


def _reduce(rows: Sequence[Row], ncols: int, modulus: int | None) -> _Reduction:
    """Eliminate unit pivots by column operations, tracking the column transform.

    Over Z only entries of absolute value one are pivots; over Z/p every
    nonzero entry is.
    """
    work = [dict(r) for r in rows]
    if modulus is not None:
        work = [{j: v % modulus for j, v in r.items() if v % modulus} for r in work]
    transform = np.eye(ncols, dtype=object)
    alive = set(range(ncols))
    units = 0
    remaining = list(range(len(work)))
    progress = True
    while progress:
        progress = False
        for idx in list(remaining):
            row = work[idx]
            if not row:
                remaining.remove(idx)
                continue
            pivot = _pick_pivot(row, modulus)
            if pivot is None:
                continue
            j, value = pivot
            inv = value if modulus is None else pow(value, -1, modulus)
            for k, entry in list(row.items()):
                if k == j:
                    continue
                factor = entry * inv
                if modulus is not None:
                    factor %= modulus
                # col_k -= factor * col_j
                transform[:, k] = transform[:, k] - factor * transform[:, j]
                if modulus is not None:
                    transform[:, k] %= modulus
                for other in remaining:
                    r = work[other]
                    if j in r:
                        nv = r.get(k, 0) - factor * r[j]
                        if modulus is not None:
                            nv %= modulus
                        if nv:
                            r[k] = nv
                        else:
                            r.pop(k, None)
            for other in remaining:
                work[other].pop(j, None)
            remaining.remove(idx)
            alive.discard(j)
            units += 1
            progress = True
    residual = [work[i] for i in remaining if work[i]]
    _LOGGER.debug("Reduced %d relators over %d generators: %d unit pivots, %d rows left", len(rows), ncols, units,
                  len(residual))
    return _Reduction(units=units, residual=residual, alive=sorted(alive), transform=transform)


def _pick_pivot(row: Row, modulus: int | None) -> tuple[int, int] | None:
    for j in sorted(row):
        value = row[j]
        if modulus is not None or abs(value) == 1:
            return j, value
    return None


def _residual_snf(red: _Reduction) -> tuple[list[int], np.ndarray]:
    """Nonzero invariant factors and kernel basis (in alive-column coordinates)."""
    n = len(red.alive)
    if not red.residual or n == 0:
        return [], np.eye(n, dtype=object)
    local = {j: i for i, j in enumerate(red.alive)}
    dense = [[0] * n for _ in red.residual]
    for r, row in enumerate(red.residual):
        for j, v in row.items():
            dense[r][local[j]] = int(v)
    smith, _, right = smith_normal_decomp(DM(dense, "ZZ").to_dense())
    diag = smith.to_list()
    factors = [abs(int(diag[i][i])) for i in range(min(len(diag), n)) if diag[i][i] != 0]
    right_np = np.array([[int(x) for x in row] for row in right.to_list()], dtype=object)
    return factors, right_np[:, len(factors):]


# -- public operations -----------------------------------------------------


def _invariants(rows: Sequence[Row], ncols: int, coeffs: str) -> AbelianInvariants:
    if coeffs == COEFFS_Z2:
        red = _reduce(rows, ncols, 2)
        dim = ncols - red.units
        return AbelianInvariants(rank=0, torsion=(2,) * dim)
    if coeffs != COEFFS_Z:
        raise InvalidParamsError(f"unknown coefficients {coeffs!r}")
    red = _reduce(rows, ncols, None)
    factors, _ = _residual_snf(red)
    torsion = tuple(sorted(k for k in factors if k > 1))
    return AbelianInvariants(rank=len(red.alive) - len(factors), torsion=torsion)


def homology_h1(c: SurfaceComplex, coeffs: str = COEFFS_Z) -> AbelianInvariants:
    """H1 of a connected complex with Z or Z/2 coefficients."""
    rel = relation_matrix(c)
    return _invariants(rel.rows, len(rel.generators), coeffs)


def quotient_by_subdomain(c: SurfaceComplex, sub: Iterable[int], coeffs: str = COEFFS_Z) -> AbelianInvariants:
    """H1(c) modulo the image of H1 of the induced subcomplex on ``sub``."""
    rel = relation_matrix(c)
    loops = subdomain_loops(c, sub, rel)
    return _invariants(list(rel.rows) + loops, len(rel.generators), coeffs)


def cohomology_basis(
    c: SurfaceComplex,
    modulus: int | None = None,
    killed: Sequence[Row] = (),
    relations: RelationMatrix | None = None,
) -> list[np.ndarray]:
    """Closed cocycles on edges vanishing on the ``killed`` loops.

    With ``modulus=None`` the result is a basis of the integer lattice of
    such cocycles; with a prime modulus, an F_p basis. Cocycles are zero on
    tree edges.
    """
    rel = relations or relation_matrix(c)
    ncols = len(rel.generators)
    rows = list(rel.rows) + list(killed)
    if modulus is not None:
        if not isprime(modulus):
            raise InvalidParamsError(f"cocycle modulus {modulus} is not prime")
        red = _reduce(rows, ncols, modulus)
        kernel = red.transform[:, red.alive] if red.alive else np.zeros((ncols, 0), dtype=object)
        kernel = kernel % modulus
    else:
        red = _reduce(rows, ncols, None)
        _, local_kernel = _residual_snf(red)
        kernel = red.transform[:, red.alive].dot(local_kernel) if red.alive else np.zeros((ncols, 0), dtype=object)
    cocycles = []
    for k in range(kernel.shape[1]):
        vec = np.zeros(c.num_edges, dtype=np.int64)
        for i, eid in enumerate(rel.generators):
            vec[eid] = int(kernel[i, k])
        cocycles.append(vec)
    _LOGGER.debug("Cocycle basis: %d vectors (modulus=%s, %d killed loops)", len(cocycles), modulus, len(killed))
    return cocycles


def evaluate_cocycle(c: SurfaceComplex, cocycle: np.ndarray, darts: Sequence[int]) -> int:
    """Sum of a cochain along a dart walk."""
    return int(sum(cocycle[dart_edge(d)] * (1 if d >= 0 else -1) for d in darts))


def is_closed(c: SurfaceComplex, cocycle: np.ndarray, modulus: int | None = None) -> bool:
    for face in c.faces:
        total = evaluate_cocycle(c, cocycle, face)
        if (total % modulus if modulus else total) != 0:
            return False
    return True
