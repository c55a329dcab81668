"""Finite covers from permutation voltages, subdomain groups and towers.

Cover vertices are sheet-major: vertex ``v`` on sheet ``s`` is ``s * |V| + v``
and edge ``e`` on sheet ``s`` is ``s * |E| + e``. A lifted edge leaves sheet
``s`` and arrives on sheet ``sigma_e(s)``.
"""
from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .exceptions import BasepointOutsideError, CoverError, FaceVoltageError, InvalidParamsError
from .helpers import Word, cyclic_power, free_reduce, invert_perm, invert_word
from .models import CosetAction, CoverSpec, SubgroupWordSet, SurfaceComplex, dart_edge
from .surface import SpanningTree, induced_components, require_connected, spanning_tree

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cover:
    """A built cover together with its projection data."""

    base: SurfaceComplex
    total: SurfaceComplex
    spec: CoverSpec
    tree: SpanningTree
    generators: tuple[int, ...]
    monodromy: CosetAction

    @property
    def degree(self) -> int:
        return self.spec.degree

    @property
    def connected(self) -> bool:
        return self.monodromy.is_transitive()

    @cached_property
    def vertex_projection(self) -> np.ndarray:
        return np.tile(np.arange(self.base.num_vertices), self.degree)

    @cached_property
    def vertex_sheet(self) -> np.ndarray:
        return np.repeat(np.arange(self.degree), self.base.num_vertices)

    @cached_property
    def edge_projection(self) -> np.ndarray:
        return np.tile(np.arange(self.base.num_edges), self.degree)

    def lift_vertices(self, vertices: Iterable[int]) -> list[int]:
        nv = self.base.num_vertices
        return sorted(s * nv + v for s in range(self.degree) for v in set(vertices))

    def fiber(self, vertex: int) -> list[int]:
        return self.lift_vertices([vertex])


def _tree_from_edges(c: SurfaceComplex, edges: Sequence[int]) -> SpanningTree:
    if len(edges) != c.num_vertices - 1 or any(not 0 <= e < c.num_edges for e in edges):
        raise InvalidParamsError("tree must list |V| - 1 valid edge ids")
    g = nx.MultiGraph()
    g.add_nodes_from(range(c.num_vertices))
    for eid in edges:
        g.add_edge(*c.edges[eid], key=eid)
    if not nx.is_tree(g):
        raise InvalidParamsError("tree edges do not form a spanning tree")
    parent_dart: dict[int, int] = {}
    order = [0]
    for u, v, eid in _bfs_keyed(g, 0):
        parent_dart[v] = eid if c.edges[eid][0] == u else ~eid
        order.append(v)
    return SpanningTree(root=0, order=tuple(order), parent_dart=parent_dart)


def _bfs_keyed(g: nx.MultiGraph, root: int) -> Iterable[tuple[int, int, int]]:
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for _, v, eid in sorted(g.edges(u, keys=True), key=lambda t: t[2]):
            if v not in seen:
                seen.add(v)
                queue.append(v)
                yield u, v, eid


def build_cover(c: SurfaceComplex, spec: CoverSpec) -> Cover:
    """Lift vertices, edges and faces of ``c`` along the voltages of ``spec``."""
    if not c.is_connected():
        raise CoverError("covers are built over connected complexes")
    tree = _tree_from_edges(c, spec.tree) if spec.tree is not None else spanning_tree(c)
    identity = tuple(range(spec.degree))
    for eid in tree.edges:
        if spec.voltage(eid) != identity:
            raise InvalidParamsError(f"tree edge {eid} carries a nontrivial voltage")
    for eid in spec.voltages:
        if not 0 <= eid < c.num_edges:
            raise InvalidParamsError(f"voltage on unknown edge {eid}")

    n, nv, ne = spec.degree, c.num_vertices, c.num_edges
    sigma = [spec.voltage(e) for e in range(ne)]
    sigma_inv = [invert_perm(p) for p in sigma]
    edges = []
    for s in range(n):
        for eid, (u, v) in enumerate(c.edges):
            edges.append((s * nv + u, sigma[eid][s] * nv + v))

    faces = []
    for fid, face in enumerate(c.faces):
        for start in range(n):
            sheet, darts = start, []
            for dart in face:
                eid = dart_edge(dart)
                if dart >= 0:
                    darts.append(sheet * ne + eid)
                    sheet = sigma[eid][sheet]
                else:
                    sheet = sigma_inv[eid][sheet]
                    darts.append(~(sheet * ne + eid))
            if sheet != start:
                raise FaceVoltageError(f"face {fid} has nontrivial total voltage", face=fid)
            faces.append(tuple(darts))

    coords = None
    if c.coordinates is not None:
        coords = tuple(c.coordinates) * n
    total = SurfaceComplex(
        num_vertices=n * nv,
        edges=tuple(edges),
        weights=tuple(c.weights) * n,
        faces=tuple(faces),
        mass=tuple(c.mass) * n,
        infinity_edges=frozenset(s * ne + e for s in range(n) for e in c.infinity_edges),
        coordinates=coords,
        name=f"{c.name or 'complex'}~{n}",
    )
    generators = tuple(eid for eid in range(ne) if eid not in tree.edges)
    monodromy = CosetAction(perms=tuple(sigma[e] for e in generators), degree=n)
    cover = Cover(base=c, total=total, spec=spec, tree=tree, generators=generators, monodromy=monodromy)
    if not cover.connected:
        _LOGGER.warning("Cover %s of degree %d is not connected", total.name, n)
    _LOGGER.debug("Built cover %s: V=%d E=%d F=%d", total.name, total.num_vertices, total.num_edges,
                  total.num_faces)
    return cover


def preimage_components(cov: Cover, sub: Iterable[int]) -> list[list[int]]:
    """Components of the preimage of a connected base subset."""
    verts = require_connected(cov.base, sub)
    return induced_components(cov.total, cov.lift_vertices(verts))


# -- subdomain groups ------------------------------------------------------


def _letters(c: SurfaceComplex, darts: Iterable[int], letter: dict[int, int]) -> Word:
    return tuple(letter[dart_edge(d)] * (1 if d >= 0 else -1) for d in darts if dart_edge(d) in letter)


def _tietze(relators: list[Word], rank: int) -> set[int]:
    """Generators (1-based) surviving elimination by single-occurrence relators."""
    alive = set(range(1, rank + 1))
    rels = [free_reduce(r) for r in relators]
    progress = True
    while progress:
        progress = False
        for idx, rel in enumerate(rels):
            counts: dict[int, int] = {}
            for letter in rel:
                counts[abs(letter)] = counts.get(abs(letter), 0) + 1
            single = sorted(g for g, k in counts.items() if k == 1)
            if not single:
                continue
            x = single[0]
            pos = next(i for i, letter in enumerate(rel) if abs(letter) == x)
            rotated = rel[pos:] + rel[:pos]
            rest = rotated[1:]
            # x^eps * rest = 1
            value = invert_word(rest) if rotated[0] > 0 else rest
            inverse = invert_word(value)
            rels.pop(idx)
            new_rels = []
            for other in rels:
                expanded: list[int] = []
                for letter in other:
                    if letter == x:
                        expanded.extend(value)
                    elif letter == -x:
                        expanded.extend(inverse)
                    else:
                        expanded.append(letter)
                reduced = _cyclic_reduce(free_reduce(tuple(expanded)))
                if reduced:
                    new_rels.append(reduced)
            rels = new_rels
            alive.discard(x)
            progress = True
            break
    return alive


def _cyclic_reduce(word: Word) -> Word:
    while len(word) > 1 and word[0] == -word[-1]:
        word = word[1:-1]
    return word


def subdomain_group(
    c: SurfaceComplex,
    sub: Iterable[int],
    basepoint: int | None = None,
    tree: SpanningTree | None = None,
) -> SubgroupWordSet:
    """Words generating the image of the fundamental group of ``sub``.

    Letters are the non-tree edges of ``tree`` (1-based, in edge-id order).
    Loops of ``sub`` that bound faces inside ``sub`` are eliminated.
    """
    sub = list(sub)
    if basepoint is not None and basepoint not in set(sub):
        raise BasepointOutsideError(f"basepoint {basepoint} is not in the subset")
    verts = require_connected(c, sub)
    tree = tree or spanning_tree(c)
    global_letter = {eid: i + 1 for i, eid in enumerate(e for e in range(c.num_edges) if e not in tree.edges)}
    local = spanning_tree(c, verts, root=basepoint if basepoint is not None else min(verts))

    # global letters along the local tree from the basepoint
    path: dict[int, Word] = {local.root: ()}
    for v in local.order[1:]:
        dart = local.parent_dart[v]
        path[v] = path[c.dart_tail(dart)] + _letters(c, [dart], global_letter)

    loop_edges = [eid for eid, (u, v) in enumerate(c.edges) if u in verts and v in verts and eid not in local.edges]
    local_letter = {eid: i + 1 for i, eid in enumerate(loop_edges)}
    relators = []
    for face in c.faces:
        if all(c.dart_tail(d) in verts for d in face):
            word = _letters(c, face, local_letter)
            if word:
                relators.append(word)
    survivors = _tietze(relators, len(loop_edges))
    words = []
    for eid in loop_edges:
        if local_letter[eid] not in survivors:
            continue
        u, v = c.edges[eid]
        words.append(free_reduce(path[u] + _letters(c, [eid], global_letter) + invert_word(path[v])))
    _LOGGER.debug("Subdomain of %d vertices: %d loops, %d face relators, %d generators", len(verts),
                  len(loop_edges), len(relators), len(survivors))
    return SubgroupWordSet.from_words(words)


# -- towers ----------------------------------------------------------------


@dataclass(frozen=True)
class Tower:
    """Stacked covers M_k -> ... -> M_1 -> M_0."""

    base: SurfaceComplex
    covers: tuple[Cover, ...] = ()
    labels: tuple[str, ...] = field(default=())

    @property
    def height(self) -> int:
        return len(self.covers)

    def _check_level(self, k: int) -> None:
        if not 0 <= k <= self.height:
            raise InvalidParamsError(f"level {k} outside the tower of height {self.height}")

    def complex(self, k: int) -> SurfaceComplex:
        self._check_level(k)
        return self.base if k == 0 else self.covers[k - 1].total

    def degree(self, k: int) -> int:
        self._check_level(k)
        out = 1
        for cov in self.covers[:k]:
            out *= cov.degree
        return out

    def composite_projection(self, k: int) -> np.ndarray:
        """Base vertex under each vertex of level ``k``."""
        self._check_level(k)
        proj = np.arange(self.complex(k).num_vertices)
        for cov in reversed(self.covers[:k]):
            proj = cov.vertex_projection[proj]
        return proj

    def composite_edge_projection(self, k: int) -> np.ndarray:
        self._check_level(k)
        proj = np.arange(self.complex(k).num_edges)
        for cov in reversed(self.covers[:k]):
            proj = cov.edge_projection[proj]
        return proj

    def composite_action(self, k: int) -> CosetAction:
        """Monodromy of M_k -> M_0 on the fiber over the base root.

        Fiber points are ordered by vertex id; generators are the non-tree
        edges of the base BFS tree.
        """
        base = self.base
        tree = spanning_tree(base)
        total = self.complex(k)
        vproj = self.composite_projection(k)
        eproj = self.composite_edge_projection(k)
        step: dict[tuple[int, int, int], int] = {}
        for eid, (a, b) in enumerate(total.edges):
            step[(a, int(eproj[eid]), 1)] = b
            step[(b, int(eproj[eid]), -1)] = a
        fiber = [int(x) for x in np.flatnonzero(vproj == tree.root)]
        index = {x: i for i, x in enumerate(fiber)}
        to_vertex: dict[int, list[int]] = {tree.root: []}
        for v in tree.order[1:]:
            to_vertex[v] = to_vertex[base.dart_tail(tree.parent_dart[v])] + [tree.parent_dart[v]]
        perms = []
        for eid in range(base.num_edges):
            if eid in tree.edges:
                continue
            u, v = base.edges[eid]
            walk = to_vertex[u] + [eid] + [~d for d in reversed(to_vertex[v])]
            perm = []
            for x in fiber:
                y = x
                for d in walk:
                    y = step[(y, dart_edge(d), 1 if d >= 0 else -1)]
                perm.append(index[y])
            perms.append(tuple(perm))
        return CosetAction(perms=tuple(perms), degree=len(fiber))


def build_tower(c: SurfaceComplex, specs: Sequence[CoverSpec]) -> Tower:
    """Build each spec over the total space of the previous level."""
    covers: list[Cover] = []
    current = c
    for spec in specs:
        cov = build_cover(current, spec)
        covers.append(cov)
        current = cov.total
    return Tower(base=c, covers=tuple(covers))


def _length_matrix(c: SurfaceComplex) -> sp.csr_matrix:
    best: dict[tuple[int, int], float] = {}
    for (u, v), w in zip(c.edges, c.weights):
        key = (min(u, v), max(u, v))
        best[key] = min(best.get(key, np.inf), 1.0 / w)
    rows = [u for u, _ in best] + [v for _, v in best]
    cols = [v for _, v in best] + [u for u, _ in best]
    data = list(best.values()) * 2
    return sp.csr_matrix((data, (rows, cols)), shape=(c.num_vertices, c.num_vertices))


def fiber_diameter(t: Tower, k: int, x0: int) -> float:
    """Largest shortest-path distance between two points of the fiber over ``x0``."""
    t._check_level(k)
    if not 0 <= x0 < t.base.num_vertices:
        raise InvalidParamsError(f"base vertex {x0} out of range")
    fiber = np.flatnonzero(t.composite_projection(k) == x0)
    if len(fiber) < 2:
        return 0.0
    dist = dijkstra(_length_matrix(t.complex(k)), directed=False, indices=fiber)
    return float(dist[:, fiber].max())


# -- cocycles to voltages --------------------------------------------------


def cocycle_to_voltage(
    c: SurfaceComplex, cocycle: np.ndarray, modulus: int | None, tree: SpanningTree | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the coboundary of the tree potential so tree edges carry zero.

    Returns the shifted cochain and the potential ``f`` with
    ``cocycle = shifted + delta f``.
    """
    tree = tree or spanning_tree(c)
    omega = np.asarray(cocycle, dtype=np.int64)
    f = np.zeros(c.num_vertices, dtype=np.int64)
    for v in tree.order[1:]:
        dart = tree.parent_dart[v]
        eid = dart_edge(dart)
        f[v] = f[c.dart_tail(dart)] + (omega[eid] if dart >= 0 else -omega[eid])
    ea = c.edge_array
    shifted = omega - (f[ea[:, 1]] - f[ea[:, 0]])
    if modulus is not None:
        shifted %= modulus
        f %= modulus
    return shifted, f


def _translation(moduli: Sequence[int], shift: Sequence[int]) -> tuple[int, ...]:
    """Mixed-radix translation, first factor least significant."""
    degree = int(np.prod(moduli)) if moduli else 1
    perm = []
    for x in range(degree):
        rest, stride, y = x, 1, 0
        for m, a in zip(moduli, shift):
            digit = rest % m
            rest //= m
            y += ((digit + a) % m) * stride
            stride *= m
        perm.append(y)
    return tuple(perm)


def abelian_cover_spec(
    c: SurfaceComplex,
    cocycles: Sequence[np.ndarray],
    moduli: Sequence[int],
    tree: SpanningTree | None = None,
) -> CoverSpec:
    """Regular Z/m1 x ... x Z/mk cover along closed cochains."""
    if len(cocycles) != len(moduli) or any(m < 1 for m in moduli):
        raise InvalidParamsError("one positive modulus per cocycle required")
    tree = tree or spanning_tree(c)
    shifted = [cocycle_to_voltage(c, w, m, tree)[0] for w, m in zip(cocycles, moduli)]
    degree = int(np.prod(moduli)) if moduli else 1
    voltages = {}
    for eid in range(c.num_edges):
        if eid in tree.edges:
            continue
        shift = [int(s[eid]) for s in shifted]
        if any(shift):
            voltages[eid] = _translation(moduli, shift)
    tree_edges = tuple(dart_edge(tree.parent_dart[v]) for v in tree.order[1:])
    return CoverSpec(degree=degree, voltages=voltages, tree=tree_edges, base=c.name)


def cyclic_cover_spec(c: SurfaceComplex, cocycle: np.ndarray, n: int, tree: SpanningTree | None = None) -> CoverSpec:
    """Cyclic n-sheeted cover: voltage sigma^omega(e) with sigma the n-cycle."""
    if n < 1:
        raise InvalidParamsError("cover degree must be positive")
    tree = tree or spanning_tree(c)
    shifted, _ = cocycle_to_voltage(c, cocycle, n, tree)
    voltages = {eid: cyclic_power(n, int(shifted[eid])) for eid in range(c.num_edges)
                if eid not in tree.edges and shifted[eid] % n}
    tree_edges = tuple(dart_edge(tree.parent_dart[v]) for v in tree.order[1:])
    return CoverSpec(degree=n, voltages=voltages, tree=tree_edges, base=c.name)


def abelian_tower(c: SurfaceComplex, cocycles: Sequence[np.ndarray], schedule: Sequence[int]) -> Tower:
    """Tower of double covers whose composite is the abelian cover along ``cocycles``.

    ``schedule[j]`` names the cocycle doubled at level j + 1; after the tower
    the composite is Z/2^a1 x ... with a_d the number of times d appears.
    Every level tracks, per cocycle, the sheet coordinate of each vertex.
    """
    if any(not 0 <= d < len(cocycles) for d in schedule):
        raise InvalidParamsError("schedule refers to an unknown cocycle")
    base_tree = spanning_tree(c)
    omega = [cocycle_to_voltage(c, w, None, base_tree)[0] for w in cocycles]
    moduli = [1] * len(cocycles)
    coords = [np.zeros(c.num_vertices, dtype=np.int64) for _ in cocycles]
    covers: list[Cover] = []
    labels: list[str] = []
    current = c
    edge_to_base = np.arange(c.num_edges)
    for d in schedule:
        m = moduli[d]
        w_base = omega[d] % m
        h_base = (omega[d] % (2 * m)) // m
        ea = current.edge_array
        base_e = edge_to_base
        carry = (h_base[base_e] + (coords[d][ea[:, 0]] + w_base[base_e]) // m) % 2
        tree = spanning_tree(current)
        shifted, f = cocycle_to_voltage(current, carry, 2, tree)
        spec = CoverSpec(
            degree=2,
            voltages={eid: (1, 0) for eid in range(current.num_edges) if shifted[eid] and eid not in tree.edges},
            tree=tuple(dart_edge(tree.parent_dart[v]) for v in tree.order[1:]),
            base=current.name,
        )
        cov = build_cover(current, spec)
        sheet = cov.vertex_sheet
        proj = cov.vertex_projection
        bit = (sheet + f[proj]) % 2
        coords = [coords[i][proj] + (m * bit if i == d else 0) for i in range(len(cocycles))]
        moduli[d] = 2 * m
        edge_to_base = edge_to_base[cov.edge_projection]
        covers.append(cov)
        labels.append("x".join(f"Z/{k}" for k in moduli))
        current = cov.total
        _LOGGER.debug("Abelian tower level %d: %s, V=%d", len(covers), labels[-1], current.num_vertices)
    return Tower(base=c, covers=tuple(covers), labels=tuple(labels))
