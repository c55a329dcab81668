"""Preset complexes, spanning trees and subsurface classification."""
from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass
from math import cos, pi, sin

import networkx as nx

from .const import (
    KIND_ANNULUS,
    KIND_CYCLE,
    KIND_GENUS_POLYGON,
    KIND_GRID_TORUS,
    KIND_MOEBIUS,
    KIND_PATH,
    PRESET_KINDS,
)
from .exceptions import DisconnectedError, InvalidParamsError, NonSurfaceError, TopologyError
from .models import DomainTopology, SurfaceComplex, dart_edge, signature_mu

_LOGGER = logging.getLogger(__name__)


# -- presets ---------------------------------------------------------------


def cycle(n: int) -> SurfaceComplex:
    if n < 3:
        raise InvalidParamsError("cycle length must be at least 3")
    edges = tuple((i, (i + 1) % n) for i in range(n))
    return SurfaceComplex(num_vertices=n, edges=edges, name=f"cycle({n})")


def path(n: int) -> SurfaceComplex:
    if n < 2:
        raise InvalidParamsError("path needs at least 2 vertices")
    edges = tuple((i, i + 1) for i in range(n - 1))
    return SurfaceComplex(num_vertices=n, edges=edges, name=f"path({n})")


def grid_torus(rows: int, cols: int) -> SurfaceComplex:
    """Square-grid torus; vertex (i, j) is ``i * cols + j``.

    Edge ``i * cols + j`` is horizontal from (i, j) to (i, j + 1), edge
    ``rows * cols + i * cols + j`` vertical from (i, j) to (i + 1, j).
    """
    if rows < 3 or cols < 3:
        raise InvalidParamsError("grid torus needs at least 3 x 3 vertices")

    def vid(i: int, j: int) -> int:
        return (i % rows) * cols + (j % cols)

    horizontal = [(vid(i, j), vid(i, j + 1)) for i in range(rows) for j in range(cols)]
    vertical = [(vid(i, j), vid(i + 1, j)) for i in range(rows) for j in range(cols)]
    offset = rows * cols
    faces = []
    for i in range(rows):
        for j in range(cols):
            h_top = vid(i, j)
            v_right = offset + vid(i, j + 1)
            h_bottom = vid(i + 1, j)
            v_left = offset + vid(i, j)
            faces.append((h_top, v_right, ~h_bottom, ~v_left))
    return SurfaceComplex(
        num_vertices=rows * cols,
        edges=tuple(horizontal + vertical),
        faces=tuple(faces),
        name=f"grid_torus({rows},{cols})",
    )


def annulus(n: int, rings: int = 1, marked: int = 0) -> SurfaceComplex:
    """Triangulated planar annulus of ``rings + 1`` concentric circles.

    ``marked`` circles are placed at infinity: 1 marks the outer circle,
    2 marks both.
    """
    if n < 3 or rings < 1 or marked not in (0, 1, 2):
        raise InvalidParamsError("annulus needs n >= 3, rings >= 1 and marked in {0, 1, 2}")

    def vid(k: int, j: int) -> int:
        return k * n + (j % n)

    faces = []
    for k in range(rings):
        for j in range(n):
            faces.append((vid(k, j), vid(k + 1, j), vid(k + 1, j + 1)))
            faces.append((vid(k, j), vid(k + 1, j + 1), vid(k, j + 1)))
    coords = tuple(
        ((1.0 + k) * cos(2 * pi * j / n), (1.0 + k) * sin(2 * pi * j / n)) for k in range(rings + 1) for j in range(n)
    )
    circles = [rings, 0][:marked]
    infinity = [(vid(k, j), vid(k, j + 1)) for k in circles for j in range(n)]
    return SurfaceComplex.from_vertex_faces(
        (rings + 1) * n,
        faces,
        coordinates=coords,
        infinity_pairs=infinity,
        name=f"annulus({n},{rings},{marked})",
    )


def moebius(n: int, width: int = 1) -> SurfaceComplex:
    """Square-grid Moebius band: columns 0..n-1, rows 0..width, twisted wrap."""
    if n < 3 or width < 1:
        raise InvalidParamsError("moebius band needs n >= 3 and width >= 1")

    def vid(i: int, j: int) -> int:
        return i * n + j

    faces = []
    for i in range(width):
        for j in range(n - 1):
            faces.append((vid(i, j), vid(i, j + 1), vid(i + 1, j + 1), vid(i + 1, j)))
        faces.append((vid(i, n - 1), vid(width - i, 0), vid(width - i - 1, 0), vid(i + 1, n - 1)))
    return SurfaceComplex.from_vertex_faces((width + 1) * n, faces, name=f"moebius({n},{width})")


def genus_g_polygon(genus: int, refinement: int = 3) -> SurfaceComplex:
    """Closed orientable surface from the 4g-gon a1 b1 a1^-1 b1^-1 ... .

    Each side is cut into ``refinement`` segments and the disc is filled by a
    central fan plus ``refinement - 1`` triangulated rings.
    """
    if genus < 1 or refinement < 3:
        raise InvalidParamsError("genus polygon needs genus >= 1 and refinement >= 3")
    r = refinement
    ring = 4 * genus * r

    def raw(t: int, j: int) -> int:
        return 1 + (t - 1) * ring + (j % ring)

    total = 1 + r * ring
    parent = list(range(total))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for h in range(genus):
        for t in range(r + 1):
            for side in (4 * h, 4 * h + 1):
                a = find(raw(r, side * r + t))
                b = find(raw(r, (side + 2) * r + (r - t)))
                if a != b:
                    parent[max(a, b)] = min(a, b)
    relabel: dict[int, int] = {}
    for x in range(total):
        relabel.setdefault(find(x), len(relabel))

    def vid(t: int, j: int) -> int:
        return relabel[find(raw(t, j))]

    faces = [(relabel[find(0)], vid(1, j), vid(1, j + 1)) for j in range(ring)]
    for t in range(1, r):
        for j in range(ring):
            faces.append((vid(t, j), vid(t + 1, j), vid(t + 1, j + 1)))
            faces.append((vid(t, j), vid(t + 1, j + 1), vid(t, j + 1)))
    return SurfaceComplex.from_vertex_faces(len(relabel), faces, name=f"genus_g_polygon({genus},{r})")


_BUILDERS = {
    KIND_CYCLE: (cycle, 1, 1),
    KIND_PATH: (path, 1, 1),
    KIND_GRID_TORUS: (grid_torus, 2, 2),
    KIND_ANNULUS: (annulus, 1, 3),
    KIND_MOEBIUS: (moebius, 1, 2),
    KIND_GENUS_POLYGON: (genus_g_polygon, 1, 2),
}


def build_preset(kind: str, params: Iterable[int]) -> SurfaceComplex:
    """Build a preset complex by kind name."""
    if kind not in _BUILDERS:
        raise InvalidParamsError(f"unknown preset {kind!r}; expected one of {', '.join(PRESET_KINDS)}")
    builder, least, most = _BUILDERS[kind]
    args = [int(p) for p in params]
    if not least <= len(args) <= most:
        raise InvalidParamsError(f"{kind} takes {least} to {most} integer parameters, got {len(args)}")
    complex_ = builder(*args)
    _LOGGER.debug("Built %s: V=%d E=%d F=%d", complex_.name, complex_.num_vertices, complex_.num_edges,
                  complex_.num_faces)
    return complex_


def euler_characteristic(c: SurfaceComplex) -> int:
    return c.euler_characteristic()


def orientable(c: SurfaceComplex) -> bool:
    return c.coherent_orientation() is not None


# -- trees and components --------------------------------------------------


@dataclass(frozen=True)
class SpanningTree:
    """BFS spanning tree of a connected vertex set.

    ``parent_dart[v]`` walks from the parent of ``v`` to ``v``.
    """

    root: int
    order: tuple[int, ...]
    parent_dart: dict[int, int]

    @property
    def edges(self) -> frozenset[int]:
        return frozenset(dart_edge(d) for d in self.parent_dart.values())


def _vertex_set(c: SurfaceComplex, vertices: Iterable[int]) -> frozenset[int]:
    verts = frozenset(int(v) for v in vertices)
    if not verts:
        raise InvalidParamsError("vertex subset is empty")
    if min(verts) < 0 or max(verts) >= c.num_vertices:
        raise InvalidParamsError("vertex subset has out-of-range entries")
    return verts


def spanning_tree(c: SurfaceComplex, vertices: Iterable[int] | None = None, root: int | None = None) -> SpanningTree:
    """BFS tree of the induced 1-skeleton, neighbours visited in edge-id order."""
    verts = frozenset(range(c.num_vertices)) if vertices is None else _vertex_set(c, vertices)
    root = min(verts) if root is None else root
    if root not in verts:
        raise InvalidParamsError(f"root {root} outside the vertex set")
    parent_dart: dict[int, int] = {}
    seen = {root}
    order = [root]
    queue = deque([root])
    graph = c.graph
    while queue:
        u = queue.popleft()
        for _, v, eid in sorted(graph.edges(u, keys=True), key=lambda t: t[2]):
            if v in seen or v not in verts:
                continue
            seen.add(v)
            order.append(v)
            parent_dart[v] = eid if c.edges[eid][0] == u else ~eid
            queue.append(v)
    if len(seen) != len(verts):
        raise DisconnectedError(f"vertex set of size {len(verts)} is not connected ({len(seen)} reachable)")
    return SpanningTree(root=root, order=tuple(order), parent_dart=parent_dart)


def induced_edges(c: SurfaceComplex, vertices: Iterable[int]) -> list[int]:
    verts = set(vertices)
    return [eid for eid, (u, v) in enumerate(c.edges) if u in verts and v in verts]


def induced_components(c: SurfaceComplex, vertices: Iterable[int]) -> list[list[int]]:
    """Components of the induced 1-skeleton, sorted by smallest vertex."""
    sub = c.graph.subgraph(set(vertices))
    comps = [sorted(comp) for comp in nx.connected_components(sub)]
    return sorted(comps, key=lambda comp: comp[0])


def require_connected(c: SurfaceComplex, vertices: Iterable[int]) -> frozenset[int]:
    verts = _vertex_set(c, vertices)
    if not nx.is_connected(c.graph.subgraph(verts)):
        raise DisconnectedError("vertex subset does not induce a connected subcomplex")
    return verts


# -- classification --------------------------------------------------------


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[object, object] = {}

    def find(self, x: object) -> object:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: object, b: object) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _thicken(c: SurfaceComplex, verts: frozenset[int]) -> tuple[int, int, int, bool]:
    """Euler characteristic, doors, exits and orientability of the thickening.

    The thickening is the union of the corner quads of every face at the
    vertices of ``verts``; a quad at corner v of face f has corners
    v, mid(e_out), centre(f), mid(e_in). Quads are glued along half-edges
    around v and along spokes mid(e)-centre(f) when both ends of e are in
    the set.
    """
    # segment key -> [(quad, start corner, end corner, direction)]
    segments: dict[tuple[object, ...], list[tuple[tuple[int, int], object, object, int]]] = {}
    quads: list[tuple[int, int]] = []
    for fid, face in enumerate(c.faces):
        size = len(face)
        for i, d_out in enumerate(face):
            v = c.dart_tail(d_out)
            if v not in verts:
                continue
            d_in = face[i - 1]
            q = (fid, i)
            quads.append(q)
            e_out, e_in = dart_edge(d_out), dart_edge(d_in)
            corner_v, corner_out, corner_c, corner_in = (q, "v"), (q, "mo"), (q, "c"), (q, "mi")
            # canonical directions: half-edge v -> mid(e), spoke mid(e) -> centre
            segments.setdefault(("h", e_out, v), []).append((q, corner_v, corner_out, 1))
            segments.setdefault(("s", e_out, fid), []).append((q, corner_out, corner_c, 1))
            segments.setdefault(("s", e_in, fid), []).append((q, corner_in, corner_c, -1))
            segments.setdefault(("h", e_in, v), []).append((q, corner_v, corner_in, -1))
            if size < 3:
                raise NonSurfaceError(f"face {fid} has fewer than three sides")
    for eid in induced_edges(c, verts):
        if not c.edge_faces[eid]:
            raise NonSurfaceError(f"edge {eid} lies in no face")

    points = _UnionFind()
    for q in quads:
        for tag in ("v", "mo", "c", "mi"):
            points.find((q, tag))
    sign: dict[tuple[int, int], int] = {}
    glue: dict[tuple[int, int], list[tuple[tuple[int, int], int]]] = {q: [] for q in quads}
    boundary = nx.MultiGraph()
    exits_edges: list[bool] = []
    for key, uses in segments.items():
        if len(uses) > 2:
            raise NonSurfaceError(f"segment {key} is shared by more than two corners")
        if len(uses) == 2:
            (qa, sa, ea, da), (qb, sb, eb, db) = uses
            points.union(sa, sb)
            points.union(ea, eb)
            # coherent iff the quads traverse the segment in opposite directions
            glue[qa].append((qb, -da * db))
            glue[qb].append((qa, -da * db))
    for key, uses in segments.items():
        if len(uses) == 1:
            _, start, end, _ = uses[0]
            at_infinity = key[0] == "h" and key[1] in c.infinity_edges
            boundary.add_edge(points.find(start), points.find(end), at_infinity=at_infinity)
            exits_edges.append(at_infinity)

    is_orientable = True
    for start in quads:
        if start in sign:
            continue
        sign[start] = 1
        queue = deque([start])
        while queue:
            q = queue.popleft()
            for other, relation in glue[q]:
                wanted = sign[q] * relation
                if other not in sign:
                    sign[other] = wanted
                    queue.append(other)
                elif sign[other] != wanted:
                    is_orientable = False

    num_points = len({points.find(x) for x in list(points.parent)})
    euler = num_points - len(segments) + len(quads)
    doors = exits = 0
    for comp in nx.connected_components(boundary):
        flags = [data["at_infinity"] for _, _, data in boundary.subgraph(comp).edges(data=True)]
        if flags and all(flags):
            exits += 1
        else:
            doors += 1
    return euler, doors, exits, is_orientable


def classify_subsurface(c: SurfaceComplex, sub: Iterable[int]) -> DomainTopology:
    """Topological type (orientable, g, k, l, chi, mu) of a connected vertex set."""
    verts = require_connected(c, sub)
    if c.is_graph:
        euler = len(verts) - len(induced_edges(c, verts))
        doors = 2 - euler
        return DomainTopology(
            orientable=True, genus=0, doors=doors, exits=0, euler=euler, mu=signature_mu(0, doors, 0, True)
        )
    euler, doors, exits, is_orientable = _thicken(c, verts)
    deficit = 2 - euler - doors - exits
    if is_orientable:
        if deficit < 0 or deficit % 2:
            raise TopologyError(f"inconsistent orientable signature: chi={euler}, boundary={doors + exits}")
        genus = deficit // 2
    else:
        if deficit < 1:
            raise TopologyError(f"inconsistent non-orientable signature: chi={euler}, boundary={doors + exits}")
        genus = deficit
    mu = signature_mu(genus, doors, exits, is_orientable) if doors else None
    _LOGGER.debug("Classified %d vertices: orientable=%s g=%d k=%d l=%d chi=%d", len(verts), is_orientable, genus,
                  doors, exits, euler)
    return DomainTopology(orientable=is_orientable, genus=genus, doors=doors, exits=exits, euler=euler, mu=mu)
