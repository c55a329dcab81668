"""Domain models shared across covering-spectra.

Faces are stored as signed edge lists: ``e >= 0`` walks edge ``e`` from its
first to its second endpoint, ``~e`` walks it backwards. The same integers
are used in JSON (``~e == -e - 1``).
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Any

import networkx as nx
import numpy as np
import scipy.sparse as sp
import voluptuous as vol
from sympy import factorint

from .const import GRAPH_ONLY, NON_ORIENTABLE, ORIENTABLE, ORIENTATIONS
from .exceptions import InvalidParamsError, InvalidWordError, UsageError
from .helpers import free_reduce, is_reduced, validate_word

_LOGGER = logging.getLogger(__name__)

COMPLEX_SCHEMA = vol.Schema(
    {
        vol.Required("vertices"): vol.All(int, vol.Range(min=1)),
        vol.Required("edges"): [vol.All(list, vol.Length(min=2, max=3))],
        vol.Optional("faces", default=list): [[int]],
        vol.Optional("mass"): [vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))],
        vol.Optional("infinity_edges", default=list): [vol.All(int, vol.Range(min=0))],
        vol.Optional("orientation"): vol.In(ORIENTATIONS),
        vol.Optional("coordinates"): vol.Any(None, [[vol.Coerce(float)]]),
        vol.Optional("name", default=""): str,
    },
    extra=vol.ALLOW_EXTRA,
)

PRESENTATION_SCHEMA = vol.Schema(
    {
        vol.Required("rank"): vol.All(int, vol.Range(min=0)),
        vol.Optional("relators", default=list): [[int]],
    },
    extra=vol.ALLOW_EXTRA,
)

ACTION_SCHEMA = vol.Schema(
    {
        vol.Required("degree"): vol.All(int, vol.Range(min=1)),
        vol.Required("perms"): [[vol.All(int, vol.Range(min=0))]],
    },
    extra=vol.ALLOW_EXTRA,
)

COVER_SCHEMA = vol.Schema(
    {
        vol.Optional("base"): str,
        vol.Required("degree"): vol.All(int, vol.Range(min=1)),
        vol.Optional("tree"): vol.Any(None, [vol.All(int, vol.Range(min=0))]),
        vol.Optional("voltages", default=dict): {vol.Coerce(int): [vol.All(int, vol.Range(min=0))]},
    },
    extra=vol.ALLOW_EXTRA,
)


def _validated(schema: vol.Schema, data: Any, what: str) -> dict[str, Any]:
    try:
        return schema(data)
    except vol.Invalid as err:
        raise UsageError(f"invalid {what}: {err}") from err


def dart_edge(dart: int) -> int:
    return dart if dart >= 0 else ~dart


@dataclass(frozen=True)
class SurfaceComplex:
    """Weighted 2-dimensional cell complex.

    Pure graphs have no faces. Masses default to one per vertex.
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] = ()
    faces: tuple[tuple[int, ...], ...] = ()
    mass: tuple[float, ...] = ()
    infinity_edges: frozenset[int] = frozenset()
    orientation: str = ""
    coordinates: tuple[tuple[float, ...], ...] | None = None
    name: str = ""

    def __post_init__(self) -> None:
        n = self.num_vertices
        if n < 1:
            raise InvalidParamsError("complex needs at least one vertex")
        if not self.weights:
            object.__setattr__(self, "weights", tuple(1.0 for _ in self.edges))
        if not self.mass:
            object.__setattr__(self, "mass", tuple(1.0 for _ in range(n)))
        if len(self.weights) != len(self.edges):
            raise InvalidParamsError("one weight per edge required")
        if len(self.mass) != n:
            raise InvalidParamsError("one mass per vertex required")
        if any(w <= 0 for w in self.weights) or any(m <= 0 for m in self.mass):
            raise InvalidParamsError("weights and masses must be strictly positive")
        for eid, (u, v) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParamsError(f"edge {eid} has an endpoint out of range")
            if u == v:
                raise InvalidParamsError(f"edge {eid} is a loop")
        counts = [0] * len(self.edges)
        for fid, face in enumerate(self.faces):
            if not face:
                raise InvalidParamsError(f"face {fid} is empty")
            for i, dart in enumerate(face):
                eid = dart_edge(dart)
                if eid >= len(self.edges):
                    raise InvalidParamsError(f"face {fid} uses unknown edge {eid}")
                counts[eid] += 1
                nxt = face[(i + 1) % len(face)]
                if self.dart_head(dart) != self.dart_tail(nxt):
                    raise InvalidParamsError(f"face {fid} does not close up")
        if any(c > 2 for c in counts):
            raise InvalidParamsError("an edge lies in more than two faces")
        for eid in self.infinity_edges:
            if eid >= len(self.edges) or counts[eid] > 1:
                raise InvalidParamsError(f"infinity edge {eid} must exist and lie in at most one face")
        if self.coordinates is not None and len(self.coordinates) != n:
            raise InvalidParamsError("one coordinate tuple per vertex required")
        if not self.orientation:
            object.__setattr__(self, "orientation", self._detect_orientation())
        elif self.orientation not in ORIENTATIONS:
            raise InvalidParamsError(f"unknown orientation {self.orientation!r}")

    # -- darts -------------------------------------------------------------

    def dart_tail(self, dart: int) -> int:
        u, v = self.edges[dart_edge(dart)]
        return u if dart >= 0 else v

    def dart_head(self, dart: int) -> int:
        u, v = self.edges[dart_edge(dart)]
        return v if dart >= 0 else u

    def face_vertices(self, fid: int) -> tuple[int, ...]:
        return tuple(self.dart_tail(d) for d in self.faces[fid])

    # -- cached structure --------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @property
    def is_graph(self) -> bool:
        return not self.faces

    @cached_property
    def edge_array(self) -> np.ndarray:
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @cached_property
    def mass_array(self) -> np.ndarray:
        return np.asarray(self.mass, dtype=float)

    @cached_property
    def edge_faces(self) -> tuple[tuple[int, ...], ...]:
        """Faces incident to each edge, in face order."""
        incidence: list[list[int]] = [[] for _ in self.edges]
        for fid, face in enumerate(self.faces):
            for dart in face:
                incidence[dart_edge(dart)].append(fid)
        return tuple(tuple(x) for x in incidence)

    @cached_property
    def graph(self) -> nx.MultiGraph:
        """1-skeleton keyed by edge id."""
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.num_vertices))
        for eid, (u, v) in enumerate(self.edges):
            g.add_edge(u, v, key=eid, weight=self.weights[eid])
        return g

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weight matrix W."""
        e = self.edge_array
        w = self.weight_array
        n = self.num_vertices
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sp.csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n))

    @property
    def boundary_edges(self) -> list[int]:
        """Edges in exactly one face."""
        return [eid for eid, fs in enumerate(self.edge_faces) if len(fs) == 1]

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_faces

    def is_connected(self) -> bool:
        return nx.is_connected(self.graph)

    def coherent_orientation(self) -> list[int] | None:
        """Face signs making every shared edge traversed oppositely, or None."""
        if not self.faces:
            return []
        sign: list[int] = [0] * self.num_faces
        # per edge, (face, direction of traversal)
        uses: list[list[tuple[int, int]]] = [[] for _ in self.edges]
        for fid, face in enumerate(self.faces):
            for dart in face:
                uses[dart_edge(dart)].append((fid, 1 if dart >= 0 else -1))
        for start in range(self.num_faces):
            if sign[start]:
                continue
            sign[start] = 1
            queue = deque([start])
            while queue:
                fid = queue.popleft()
                for dart in self.faces[fid]:
                    pair = uses[dart_edge(dart)]
                    if len(pair) < 2:
                        continue
                    (f0, d0), (f1, d1) = pair
                    other, d_self, d_other = (f1, d0, d1) if f0 == fid else (f0, d1, d0)
                    wanted = -sign[fid] * d_self * d_other
                    if sign[other] == 0:
                        sign[other] = wanted
                        queue.append(other)
                    elif sign[other] != wanted:
                        return None
        return sign

    def _detect_orientation(self) -> str:
        if not self.faces:
            return GRAPH_ONLY
        return ORIENTABLE if self.coherent_orientation() is not None else NON_ORIENTABLE

    # -- construction ------------------------------------------------------

    @classmethod
    def from_vertex_faces(
        cls,
        num_vertices: int,
        faces: list[tuple[int, ...]] | list[list[int]],
        extra_edges: list[tuple[int, int]] | None = None,
        **kwargs: Any,
    ) -> SurfaceComplex:
        """Build edges and signed faces from vertex cycles.

        Edges are keyed by unordered vertex pair and oriented as first seen.
        """
        edges: list[tuple[int, int]] = []
        lookup: dict[frozenset[int], int] = {}

        def edge_for(u: int, v: int) -> int:
            key = frozenset((u, v))
            if key not in lookup:
                lookup[key] = len(edges)
                edges.append((u, v))
            return lookup[key]

        for u, v in extra_edges or []:
            edge_for(u, v)
        signed: list[tuple[int, ...]] = []
        for cycle in faces:
            darts = []
            for i, u in enumerate(cycle):
                v = cycle[(i + 1) % len(cycle)]
                eid = edge_for(u, v)
                darts.append(eid if edges[eid] == (u, v) else ~eid)
            signed.append(tuple(darts))
        infinity_pairs = kwargs.pop("infinity_pairs", None)
        if infinity_pairs:
            kwargs["infinity_edges"] = frozenset(lookup[frozenset(p)] for p in infinity_pairs)
        return cls(num_vertices=num_vertices, edges=tuple(edges), faces=tuple(signed), **kwargs)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SurfaceComplex:
        data = _validated(COMPLEX_SCHEMA, data, "complex")
        edges: list[tuple[int, int]] = []
        weights: list[float] = []
        for entry in data["edges"]:
            edges.append((int(entry[0]), int(entry[1])))
            weights.append(float(entry[2]) if len(entry) == 3 else 1.0)
        coords = data.get("coordinates")
        return cls(
            num_vertices=data["vertices"],
            edges=tuple(edges),
            weights=tuple(weights),
            faces=tuple(tuple(f) for f in data["faces"]),
            mass=tuple(data.get("mass") or ()),
            infinity_edges=frozenset(data["infinity_edges"]),
            orientation=data.get("orientation", ""),
            coordinates=tuple(tuple(c) for c in coords) if coords else None,
            name=data["name"],
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "vertices": self.num_vertices,
            "edges": [[u, v, w] for (u, v), w in zip(self.edges, self.weights)],
            "faces": [list(f) for f in self.faces],
            "mass": list(self.mass),
            "infinity_edges": sorted(self.infinity_edges),
            "orientation": self.orientation,
        }
        if self.coordinates is not None:
            out["coordinates"] = [list(c) for c in self.coordinates]
        return out


def signature_mu(genus: int, doors: int, exits: int, orientable: bool) -> int:
    """Generator count of the complement signature (g, k, l)."""
    return (2 * genus if orientable else genus) + doors - 1 + max(exits - 1, 0)


@dataclass(frozen=True)
class DomainTopology:
    """Topological type of a thickened vertex subset.

    ``doors`` are boundary circles adjacent to the rest of the surface,
    ``exits`` are circles made only of edges marked at infinity.
    ``mu`` is None for closed surfaces.
    """

    orientable: bool
    genus: int
    doors: int
    exits: int
    euler: int
    mu: int | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "orientable": self.orientable,
            "g": self.genus,
            "k": self.doors,
            "l": self.exits,
            "chi": self.euler,
            "mu": self.mu,
        }


@dataclass(frozen=True)
class AbelianInvariants:
    """Z^rank x Z/k1 x ... x Z/kn with k1 | k2 | ... ."""

    rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.rank < 0:
            raise InvalidParamsError("rank must be nonnegative")
        if any(k < 2 for k in self.torsion):
            raise InvalidParamsError("torsion factors must be at least 2")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise InvalidParamsError(f"torsion factors {self.torsion} break the divisibility chain")

    @property
    def order(self) -> int | None:
        """Group order, None when infinite."""
        return None if self.rank else prod(self.torsion)

    @property
    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    @classmethod
    def from_factors(cls, factors: tuple[int, ...] | list[int]) -> AbelianInvariants:
        """Invariant factors of Z/k1 x ... x Z/kn for arbitrary orders."""
        powers: dict[int, list[int]] = {}
        for k in factors:
            if k < 1:
                raise InvalidParamsError(f"cyclic factor order {k} must be positive")
            for p, e in factorint(k).items():
                powers.setdefault(p, []).append(p**e)
        length = max((len(v) for v in powers.values()), default=0)
        torsion = [1] * length
        for qs in powers.values():
            for i, q in enumerate(sorted(qs, reverse=True)):
                torsion[length - 1 - i] *= q
        return cls(rank=0, torsion=tuple(t for t in torsion if t > 1))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AbelianInvariants:
        return cls(rank=int(data.get("rank", 0)), torsion=tuple(int(k) for k in data.get("torsion", [])))

    def to_dict(self) -> dict[str, Any]:
        return {"rank": self.rank, "torsion": list(self.torsion)}


@dataclass(frozen=True)
class Presentation:
    """Finitely presented group; letters are +i / -i for generator i (1-based)."""

    rank: int
    relators: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        for rel in self.relators:
            validate_word(rel, self.rank)

    @classmethod
    def free(cls, rank: int) -> Presentation:
        return cls(rank=rank)

    @classmethod
    def surface(cls, genus: int) -> Presentation:
        """Closed orientable genus-g surface group, relator [a1,b1]...[ag,bg]."""
        if genus < 1:
            raise InvalidParamsError("surface genus must be at least 1")
        rel: list[int] = []
        for h in range(genus):
            a, b = 2 * h + 1, 2 * h + 2
            rel.extend((a, b, -a, -b))
        return cls(rank=2 * genus, relators=(tuple(rel),))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Presentation:
        data = _validated(PRESENTATION_SCHEMA, data, "presentation")
        return cls(rank=data["rank"], relators=tuple(tuple(r) for r in data["relators"]))

    def to_dict(self) -> dict[str, Any]:
        return {"rank": self.rank, "relators": [list(r) for r in self.relators]}


@dataclass(frozen=True)
class CosetAction:
    """Right action of the generators on the points 0..n-1; basepoint 0.

    ``perms[i][x]`` is the image of point ``x`` under generator ``i + 1``.
    """

    perms: tuple[tuple[int, ...], ...]
    degree: int = 0

    def __post_init__(self) -> None:
        if not self.degree:
            if not self.perms:
                raise InvalidParamsError("degree required for an action without generators")
            object.__setattr__(self, "degree", len(self.perms[0]))
        for i, perm in enumerate(self.perms):
            if sorted(perm) != list(range(self.degree)):
                raise InvalidParamsError(f"generator {i + 1} is not a permutation of {self.degree} points")

    @property
    def rank(self) -> int:
        return len(self.perms)

    @cached_property
    def inverses(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for perm in self.perms:
            inv = [0] * self.degree
            for x, y in enumerate(perm):
                inv[y] = x
            out.append(tuple(inv))
        return tuple(out)

    def letter_perm(self, letter: int) -> tuple[int, ...]:
        return self.perms[letter - 1] if letter > 0 else self.inverses[-letter - 1]

    def apply(self, point: int, word: tuple[int, ...]) -> int:
        for letter in word:
            point = self.letter_perm(letter)[point]
        return point

    def word_perm(self, word: tuple[int, ...]) -> tuple[int, ...]:
        validate_word(word, self.rank)
        return tuple(self.apply(x, word) for x in range(self.degree))

    def is_transitive(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for perm in self.perms:
                y = perm[x]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == self.degree

    def satisfies(self, presentation: Presentation) -> bool:
        identity = tuple(range(self.degree))
        return all(self.word_perm(rel) == identity for rel in presentation.relators)

    @classmethod
    def regular_abelian(cls, factors: tuple[int, ...] | list[int]) -> CosetAction:
        """Regular action of Z/k1 x ... x Z/kn, one generator per factor.

        Points are mixed-radix encodings with the first factor least significant.
        """
        factors = tuple(int(k) for k in factors)
        if any(k < 1 for k in factors):
            raise InvalidParamsError("cyclic factors must be positive")
        degree = prod(factors)
        perms = []
        stride = 1
        for k in factors:
            perm = []
            for x in range(degree):
                digit = (x // stride) % k
                perm.append(x - digit * stride + ((digit + 1) % k) * stride)
            perms.append(tuple(perm))
            stride *= k
        return cls(perms=tuple(perms), degree=degree)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CosetAction:
        data = _validated(ACTION_SCHEMA, data, "coset action")
        return cls(perms=tuple(tuple(p) for p in data["perms"]), degree=data["degree"])

    def to_dict(self) -> dict[str, Any]:
        return {"degree": self.degree, "perms": [list(p) for p in self.perms]}


@dataclass(frozen=True)
class SubgroupWordSet:
    """Generating words of a subgroup; all words freely reduced."""

    words: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        for word in self.words:
            if not is_reduced(word):
                raise InvalidWordError(f"word {word} is not freely reduced", word)

    @classmethod
    def from_words(cls, words: list[tuple[int, ...]] | list[list[int]]) -> SubgroupWordSet:
        reduced = [free_reduce(tuple(w)) for w in words]
        return cls(words=tuple(w for w in reduced if w))

    def __len__(self) -> int:
        return len(self.words)

    def validate(self, rank: int) -> None:
        for word in self.words:
            validate_word(word, rank)

    def to_dict(self) -> dict[str, Any]:
        return {"words": [list(w) for w in self.words]}


@dataclass(frozen=True)
class CoverSpec:
    """Permutation voltages on non-tree edges; missing edges carry the identity."""

    degree: int
    voltages: dict[int, tuple[int, ...]] = field(default_factory=dict)
    tree: tuple[int, ...] | None = None
    base: str = ""

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise InvalidParamsError("cover degree must be at least 1")
        for eid, perm in self.voltages.items():
            if sorted(perm) != list(range(self.degree)):
                raise InvalidParamsError(f"voltage on edge {eid} is not a permutation of {self.degree} sheets")

    def voltage(self, eid: int) -> tuple[int, ...]:
        return self.voltages.get(eid, tuple(range(self.degree)))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CoverSpec:
        data = _validated(COVER_SCHEMA, data, "cover spec")
        tree = data.get("tree")
        return cls(
            degree=data["degree"],
            voltages={int(k): tuple(v) for k, v in data["voltages"].items()},
            tree=tuple(tree) if tree is not None else None,
            base=data.get("base", ""),
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "degree": self.degree,
            "tree": list(self.tree) if self.tree is not None else None,
            "voltages": {str(k): list(v) for k, v in sorted(self.voltages.items())},
        }
        if self.base:
            out["base"] = self.base
        return out
