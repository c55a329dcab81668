"""Coset actions: orbits, generator counts and low-index subgroup enumeration.

Subgroups of finite index are represented by pointed transitive actions
(basepoint 0). Enumeration builds standard-form coset tables, so every
subgroup appears exactly once and in a deterministic order.
"""
from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterator
from dataclasses import dataclass, field
from math import ceil, factorial, prod
from typing import Any

from sympy import multiplicity, primefactors

from .const import (
    DEFAULT_MAX_COSET_DEGREE,
    DEFAULT_MAX_INDEX_FREE,
    DEFAULT_MAX_INDEX_RELATOR,
    EXHAUSTIVE_ABELIAN_ORDER,
    MAX_ABELIAN_ORDER,
)
from .exceptions import (
    BoundExceededError,
    BoundViolationError,
    DegreeTooLargeError,
    InfiniteGroupError,
    InvalidParamsError,
    NotTransitiveError,
)
from .helpers import Word, compose, invert_perm
from .models import AbelianInvariants, CosetAction, Presentation, SubgroupWordSet, SurfaceComplex, dart_edge
from .surface import SpanningTree, spanning_tree

_LOGGER = logging.getLogger(__name__)

Perm = tuple[int, ...]


# -- orbits ----------------------------------------------------------------


def _orbit_partition(degree: int, perms: list[Perm]) -> list[list[int]]:
    parent = list(range(degree))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for perm in perms:
        for x, y in enumerate(perm):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
    classes: dict[int, list[int]] = {}
    for x in range(degree):
        classes.setdefault(find(x), []).append(x)
    return sorted(classes.values(), key=lambda orbit: orbit[0])


def orbits(a: CosetAction, gens: SubgroupWordSet) -> list[list[int]]:
    """Orbits of the subgroup generated by ``gens``, ordered by smallest point."""
    gens.validate(a.rank)
    return _orbit_partition(a.degree, [a.word_perm(w) for w in gens.words])


def fixed_identity_coset(a: CosetAction, gens: SubgroupWordSet) -> bool:
    """True iff every generating word fixes the basepoint."""
    gens.validate(a.rank)
    return all(a.apply(0, w) == 0 for w in gens.words)


def fixes_all_points(a: CosetAction, gens: SubgroupWordSet) -> bool:
    """True iff the normal closure of ``gens`` lies in the point stabilizer.

    A word fixes every coset exactly when all its conjugates fix the
    basepoint.
    """
    gens.validate(a.rank)
    identity = tuple(range(a.degree))
    return all(a.word_perm(w) == identity for w in gens.words)


# -- generators of coset spaces --------------------------------------------


def _transversal(a: CosetAction) -> dict[int, tuple[Word, Perm]]:
    """BFS words from the basepoint to every point with their permutations."""
    identity = tuple(range(a.degree))
    out: dict[int, tuple[Word, Perm]] = {0: ((), identity)}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        word, perm = out[x]
        for i, gen in enumerate(a.perms):
            y = gen[x]
            if y not in out:
                out[y] = (word + (i + 1,), compose(perm, gen))
                queue.append(y)
    return out


def _stabilizer_generators(a: CosetAction, transversal: dict[int, tuple[Word, Perm]]) -> list[Perm]:
    """Schreier generators of the stabilizer of the basepoint."""
    identity = tuple(range(a.degree))
    found: dict[Perm, None] = {}
    for x, (_, t_x) in transversal.items():
        for gen in a.perms:
            y = gen[x]
            schreier = compose(compose(t_x, gen), invert_perm(transversal[y][1]))
            if schreier != identity:
                found.setdefault(schreier)
    return list(found)


def _orbit_of_basepoint(perms: list[Perm]) -> frozenset[int]:
    seen = {0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for perm in perms:
            y = perm[x]
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return frozenset(seen)


@dataclass(frozen=True)
class CosetGenerators:
    """Witness for the generator count of a coset space."""

    count: int
    words: tuple[Word, ...]
    suborbits: int

    def to_dict(self) -> dict[str, Any]:
        return {"count": self.count, "words": [list(w) for w in self.words], "suborbits": self.suborbits}


def coset_generators(a: CosetAction, max_degree: int = DEFAULT_MAX_COSET_DEGREE) -> CosetGenerators:
    """Fewest group elements that, with the point stabilizer, act transitively.

    ``<K, g>`` depends only on the double coset ``KgK``, which corresponds to
    the suborbit of K containing the image of the basepoint under g, so the
    search runs over suborbit representatives.

    Overgroups H of K correspond one to one with the blocks ``0.H``, so the
    search is a breadth-first walk over blocks: level k holds every block
    reachable with k representatives, each block kept once, and only
    representatives outside the current block extend it.
    """
    if a.degree > max_degree:
        raise DegreeTooLargeError(f"degree {a.degree} exceeds the search bound {max_degree}")
    if not a.is_transitive():
        raise NotTransitiveError("coset generator search needs a transitive action")
    if a.degree == 1:
        return CosetGenerators(count=0, words=(), suborbits=1)
    transversal = _transversal(a)
    stabilizer = _stabilizer_generators(a, transversal)
    suborbits = _orbit_partition(a.degree, stabilizer)
    reps = [orbit[0] for orbit in suborbits if orbit[0] != 0]
    _LOGGER.debug("Coset space of degree %d: %d stabilizer generators, %d suborbits", a.degree, len(stabilizer),
                  len(suborbits))
    frontier: dict[frozenset[int], tuple[int, ...]] = {_orbit_of_basepoint(stabilizer): ()}
    seen = set(frontier)
    for k in range(1, len(reps) + 1):
        reached: dict[frozenset[int], tuple[int, ...]] = {}
        for block, chosen in frontier.items():
            for x in reps:
                if x in block:
                    continue
                candidate = chosen + (x,)
                grown = _orbit_of_basepoint(stabilizer + [transversal[y][1] for y in candidate])
                if len(grown) == a.degree:
                    return CosetGenerators(count=k, words=tuple(transversal[y][0] for y in candidate),
                                           suborbits=len(suborbits))
                if grown not in seen:
                    seen.add(grown)
                    reached[grown] = candidate
        _LOGGER.debug("Level %d of the block search: %d new blocks", k, len(reached))
        frontier = reached
    raise NotTransitiveError("no generating set found for a transitive action")


def min_generators_coset(a: CosetAction, max_degree: int = DEFAULT_MAX_COSET_DEGREE) -> int:
    return coset_generators(a, max_degree).count


@dataclass(frozen=True)
class OrbitBound:
    """Orbit count of a subgroup against its generator deficit."""

    k: int
    ell: int
    orbits: int

    @property
    def required(self) -> int:
        return self.k - self.ell + 1

    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "l": self.ell, "orbits": self.orbits, "required": self.required,
                "tight": self.orbits == self.required}


def orbit_lower_bound_check(
    a: CosetAction, gens: SubgroupWordSet, max_degree: int = DEFAULT_MAX_COSET_DEGREE
) -> OrbitBound:
    """A subgroup with l generators has at least k - l + 1 orbits."""
    record = OrbitBound(k=min_generators_coset(a, max_degree), ell=len(gens), orbits=len(orbits(a, gens)))
    if record.orbits < record.required:
        raise BoundViolationError(
            f"{record.orbits} orbits below the bound k - l + 1 = {record.required}",
            claimed=record.required,
            observed=record.orbits,
        )
    return record


def abelian_mu(inv: AbelianInvariants) -> int:
    """Minimal number of generators of a finite abelian group."""
    if inv.rank:
        raise InfiniteGroupError(f"group has free rank {inv.rank}")
    best = 0
    for p in sorted({p for k in inv.torsion for p in primefactors(k)}):
        best = max(best, sum(1 for k in inv.torsion if k % p == 0))
    return best


def _frattini_rank(a: CosetAction) -> int:
    """Largest dimension of G/G^p over the primes p for a group acting regularly."""
    elements = [perm for _, perm in _transversal(a).values()]
    best = 0
    for p in primefactors(a.degree):
        powers = set()
        for perm in elements:
            y = 0
            for _ in range(p):
                y = perm[y]
            powers.add(y)
        best = max(best, multiplicity(p, a.degree // len(powers)))
    return best


def brute_force_abelian_mu(factors: tuple[int, ...] | list[int], max_order: int = MAX_ABELIAN_ORDER) -> int:
    """Generator count of Z/k1 x ... x Z/kn computed on its regular action.

    Orders up to EXHAUSTIVE_ABELIAN_ORDER run the exhaustive block search. Larger
    orders count the quotient by p-th powers for every prime p instead, whose
    largest dimension is the generator count.
    """
    factors = tuple(k for k in factors if k > 1)
    if not factors:
        return 0
    order = prod(factors)
    if order > max_order:
        raise DegreeTooLargeError(f"order {order} exceeds the cross-check bound {max_order}")
    action = CosetAction.regular_abelian(factors)
    if order <= EXHAUSTIVE_ABELIAN_ORDER:
        return min_generators_coset(action, max_degree=order)
    return _frattini_rank(action)


# -- presentations ---------------------------------------------------------


def complex_presentation(c: SurfaceComplex, tree: SpanningTree | None = None) -> Presentation:
    """Fundamental group presentation: non-tree edges generate, faces relate."""
    tree = tree or spanning_tree(c)
    generators = [eid for eid in range(c.num_edges) if eid not in tree.edges]
    letter = {eid: i + 1 for i, eid in enumerate(generators)}
    relators = []
    for face in c.faces:
        word = tuple(letter[dart_edge(d)] * (1 if d >= 0 else -1) for d in face if dart_edge(d) in letter)
        if word:
            relators.append(word)
    return Presentation(rank=len(generators), relators=tuple(relators))


# -- low-index enumeration -------------------------------------------------


def hall_subgroup_counts(rank: int, n_max: int) -> list[int]:
    """Number of index-n subgroups of the free group of the given rank, n = 1..n_max."""
    if rank < 1 or n_max < 1:
        raise InvalidParamsError("rank and n_max must be positive")
    counts: list[int] = []
    for n in range(1, n_max + 1):
        total = n * factorial(n) ** (rank - 1)
        total -= sum(factorial(n - k) ** (rank - 1) * counts[k - 1] for k in range(1, n))
        counts.append(total)
    return counts


def _check_bound(p: Presentation, n: int, max_free: int, max_relator: int) -> None:
    if n < 1:
        raise InvalidParamsError("subgroup index must be positive")
    bound = max_relator if p.relators else max_free
    if n > bound:
        raise BoundExceededError(f"index {n} above the enumeration bound {bound}")


@dataclass
class _CosetTable:
    """Partial coset table; column 2i is generator i + 1, column 2i + 1 its inverse."""

    rank: int
    size: int
    rows: list[list[int | None]] = field(default_factory=list)

    def copy(self) -> _CosetTable:
        return _CosetTable(self.rank, self.size, [list(r) for r in self.rows])

    @staticmethod
    def column(letter: int) -> int:
        return 2 * (letter - 1) if letter > 0 else 2 * (-letter - 1) + 1

    def define(self, x: int, col: int, y: int) -> bool:
        inv = col ^ 1
        if self.rows[x][col] is not None or self.rows[y][inv] is not None:
            return self.rows[x][col] == y and self.rows[y][inv] == x
        self.rows[x][col] = y
        self.rows[y][inv] = x
        return True

    def first_gap(self) -> tuple[int, int] | None:
        for x, row in enumerate(self.rows):
            for col, val in enumerate(row):
                if val is None:
                    return x, col
        return None


def _scan(table: _CosetTable, relators: tuple[Word, ...]) -> bool:
    """Scan every relator at every point, filling single gaps; False on conflict."""
    changed = True
    while changed:
        changed = False
        for x in range(len(table.rows)):
            for rel in relators:
                cols = [table.column(letter) for letter in rel]
                # forward as far as defined
                f, i = x, 0
                while i < len(cols) and table.rows[f][cols[i]] is not None:
                    f = table.rows[f][cols[i]]  # type: ignore[assignment]
                    i += 1
                if i == len(cols):
                    if f != x:
                        return False
                    continue
                # backward from x through inverse letters
                b, j = x, len(cols)
                while j > i and table.rows[b][cols[j - 1] ^ 1] is not None:
                    b = table.rows[b][cols[j - 1] ^ 1]  # type: ignore[assignment]
                    j -= 1
                if j == i:
                    if f != b:
                        return False
                elif j == i + 1:
                    if not table.define(f, cols[i], b):
                        return False
                    changed = True
    return True


def _complete_tables(p: Presentation, n: int) -> Iterator[_CosetTable]:
    start = _CosetTable(rank=p.rank, size=1, rows=[[None] * (2 * p.rank)])
    stack = [start]
    while stack:
        table = stack.pop()
        gap = table.first_gap()
        if gap is None:
            if table.size == n:
                yield table
            continue
        x, col = gap
        options: list[_CosetTable] = []
        for y in range(table.size):
            if table.rows[y][col ^ 1] is None:
                candidate = table.copy()
                if candidate.define(x, col, y) and _scan(candidate, p.relators):
                    options.append(candidate)
        if table.size < n:
            candidate = table.copy()
            candidate.rows.append([None] * (2 * p.rank))
            candidate.size += 1
            if candidate.define(x, col, table.size) and _scan(candidate, p.relators):
                options.append(candidate)
        # reversed so the smallest choice is explored first
        stack.extend(reversed(options))


def enumerate_index_n(
    p: Presentation,
    n: int,
    max_index_free: int = DEFAULT_MAX_INDEX_FREE,
    max_index_relator: int = DEFAULT_MAX_INDEX_RELATOR,
) -> list[CosetAction]:
    """All index-n subgroups as pointed transitive actions, in standard-table order."""
    _check_bound(p, n, max_index_free, max_index_relator)
    if p.rank == 0:
        return [CosetAction(perms=(), degree=1)] if n == 1 else []
    actions = []
    for table in _complete_tables(p, n):
        perms = tuple(tuple(int(table.rows[x][2 * i] or 0) for x in range(n)) for i in range(p.rank))
        actions.append(CosetAction(perms=perms, degree=n))
    _LOGGER.debug("Index %d subgroups of a rank-%d group with %d relators: %d", n, p.rank, len(p.relators),
                  len(actions))
    return actions


def labeled_action_count(p: Presentation, n: int, **bounds: int) -> int:
    """Transitive actions on {0..n-1} with the basepoint fixed as 0."""
    return factorial(n - 1) * len(enumerate_index_n(p, n, **bounds))


def is_contained(small: CosetAction, large: CosetAction) -> bool:
    """Subgroup containment: the fiber map x -> f(x) is equivariant and well defined."""
    if small.rank != large.rank:
        raise InvalidParamsError("actions of different generator counts")
    image = {0: 0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for gs, gl in zip(small.perms + small.inverses, large.perms + large.inverses):
            y, fy = gs[x], gl[image[x]]
            if y in image:
                if image[y] != fy:
                    return False
            else:
                image[y] = fy
                queue.append(y)
    return True


@dataclass(frozen=True)
class ContainmentReport:
    """Intermediate subgroups between index 2n and index n."""

    n: int
    count_n: int
    count_2n: int
    containments: tuple[int, ...]
    bound: int

    @property
    def max_containment(self) -> int:
        return max(self.containments, default=0)

    @property
    def implied_lower_bound(self) -> float:
        return self.count_n / self.bound

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "a_n": self.count_n,
            "a_2n": self.count_2n,
            "max_containment": self.max_containment,
            "bound": self.bound,
            "u_2n_lower_bound": self.implied_lower_bound,
            "u_2n_lower_bound_int": ceil(self.implied_lower_bound),
        }


def intermediate_count_check(
    p: Presentation,
    n: int,
    max_index_free: int = DEFAULT_MAX_INDEX_FREE,
    max_index_relator: int = DEFAULT_MAX_INDEX_RELATOR,
) -> ContainmentReport:
    """Each index-2n subgroup lies in at most 2n - 1 subgroups of index n."""
    _check_bound(p, 2 * n, max_index_free, max_index_relator)
    index_n = enumerate_index_n(p, n, max_index_free, max_index_relator)
    index_2n = enumerate_index_n(p, 2 * n, max_index_free, max_index_relator)
    containments = tuple(sum(1 for big in index_n if is_contained(small, big)) for small in index_2n)
    report = ContainmentReport(n=n, count_n=len(index_n), count_2n=len(index_2n), containments=containments,
                               bound=2 * n - 1)
    if report.max_containment > report.bound:
        raise BoundViolationError(
            f"an index-{2 * n} subgroup lies in {report.max_containment} index-{n} subgroups",
            claimed=report.bound,
            observed=report.max_containment,
        )
    return report
