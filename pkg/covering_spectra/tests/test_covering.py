"""Tests for cover construction, subdomain groups and towers."""
import numpy as np
import pytest

from covering_spectra.covering import (
    abelian_cover_spec,
    abelian_tower,
    build_cover,
    build_tower,
    cocycle_to_voltage,
    cyclic_cover_spec,
    fiber_diameter,
    preimage_components,
    subdomain_group,
)
from covering_spectra.exceptions import BasepointOutsideError, FaceVoltageError, InvalidParamsError
from covering_spectra.groups import orbits
from covering_spectra.helpers import make_rng
from covering_spectra.homology import cohomology_basis
from covering_spectra.models import CoverSpec, SurfaceComplex
from covering_spectra.surface import cycle, grid_torus, spanning_tree

from .conftest import MOCK_CYCLE_LENGTH


def _make_double_cycle():
    base = cycle(MOCK_CYCLE_LENGTH)
    (omega,) = cohomology_basis(base)
    return build_cover(base, cyclic_cover_spec(base, omega, 2))


class TestBuildCover:
    """Tests for build_cover."""

    def test_double_cover_of_cycle(self):
        """The connected double cover of C12 is C24."""
        cov = _make_double_cycle()

        assert cov.degree == 2
        assert cov.connected
        assert cov.total.num_vertices == 2 * MOCK_CYCLE_LENGTH
        assert cov.total.is_connected()
        assert cov.spec.voltages == {6: (1, 0)}

    def test_projection_is_sheet_major(self):
        """Vertex v on sheet s is s * |V| + v."""
        cov = _make_double_cycle()

        assert cov.fiber(3) == [3, MOCK_CYCLE_LENGTH + 3]
        assert cov.vertex_projection[MOCK_CYCLE_LENGTH + 3] == 3
        assert cov.vertex_sheet[MOCK_CYCLE_LENGTH + 3] == 1

    def test_trivial_cover_disconnected(self):
        """Identity voltages give disjoint copies."""
        cov = build_cover(cycle(5), CoverSpec(degree=3))

        assert not cov.connected
        assert not cov.total.is_connected()

    def test_tree_edge_voltage_rejected(self):
        """Edges of the spanning tree must carry the identity."""
        with pytest.raises(InvalidParamsError, match="tree edge"):
            build_cover(cycle(MOCK_CYCLE_LENGTH), CoverSpec(degree=2, voltages={0: (1, 0)}))

    def test_unknown_edge_rejected(self):
        """Voltages must sit on existing edges."""
        with pytest.raises(InvalidParamsError, match="unknown edge"):
            build_cover(cycle(4), CoverSpec(degree=2, voltages={9: (1, 0)}))

    def test_face_voltage_must_vanish(self):
        """A lone nontrivial voltage around a square face does not lift the face."""
        c = grid_torus(3, 3)
        tree = spanning_tree(c)
        eid = next(e for e in range(c.num_edges) if e not in tree.edges)

        with pytest.raises(FaceVoltageError):
            build_cover(c, CoverSpec(degree=2, voltages={eid: (1, 0)}))

    def test_explicit_tree_must_span(self):
        """A user tree needs |V| - 1 edges."""
        with pytest.raises(InvalidParamsError):
            build_cover(cycle(4), CoverSpec(degree=2, tree=(0, 1)))

    def test_abelian_cover_of_torus(self):
        """The Z/2 x Z/2 cover of the 3 x 3 torus is a connected torus."""
        c = grid_torus(3, 3)
        spec = abelian_cover_spec(c, cohomology_basis(c), [2, 2])
        cov = build_cover(c, spec)

        assert cov.degree == 4
        assert cov.connected
        assert cov.total.euler_characteristic() == 0

    def test_cyclic_spec_degree_one(self):
        """A one-sheeted cover is the base."""
        c = cycle(5)
        (omega,) = cohomology_basis(c)
        spec = cyclic_cover_spec(c, omega, 1)

        assert spec.degree == 1
        assert spec.voltages == {}


class TestPreimages:
    """Tests for preimages and subdomain groups."""

    def test_contractible_preimage_splits(self):
        """A path lifts to one copy per sheet."""
        comps = preimage_components(_make_double_cycle(), range(6))

        assert len(comps) == 2
        assert all(len(comp) == 6 for comp in comps)

    def test_whole_cycle_preimage_connected(self):
        """The full base lifts to the connected cover."""
        assert len(preimage_components(_make_double_cycle(), range(MOCK_CYCLE_LENGTH))) == 1

    def test_subdomain_group_of_path(self):
        """A contractible subset has trivial group."""
        assert len(subdomain_group(cycle(MOCK_CYCLE_LENGTH), range(6))) == 0

    def test_subdomain_group_of_cycle(self):
        """The whole cycle carries its generating loop."""
        gens = subdomain_group(cycle(MOCK_CYCLE_LENGTH), range(MOCK_CYCLE_LENGTH))

        assert len(gens) == 1
        assert gens.words[0] in {(1,), (-1,)}

    def test_filled_square_group_trivial(self):
        """Face relators kill the loops of a filled region."""
        c = grid_torus(4, 4)

        assert len(subdomain_group(c, [0, 1, 4, 5])) == 0

    def test_basepoint_outside(self):
        """The basepoint must lie in the subset."""
        with pytest.raises(BasepointOutsideError):
            subdomain_group(cycle(MOCK_CYCLE_LENGTH), [0, 1], basepoint=5)


class TestTowers:
    """Tests for towers of covers."""

    def test_build_tower_degrees(self):
        """Degrees multiply up the tower."""
        base = cycle(3)
        first = build_cover(base, cyclic_cover_spec(base, cohomology_basis(base)[0], 2)).total
        spec = cyclic_cover_spec(first, cohomology_basis(first)[0], 2)
        tower = build_tower(base, [cyclic_cover_spec(base, cohomology_basis(base)[0], 2), spec])

        assert tower.height == 2
        assert tower.degree(2) == 4
        assert tower.complex(2).num_vertices == 12

    def test_abelian_tower_is_cycle(self):
        """Doubling the generator twice over C3 gives C12."""
        base = cycle(3)
        tower = abelian_tower(base, cohomology_basis(base), [0, 0])

        assert tower.degree(2) == 4
        assert tower.complex(2).num_vertices == 12
        assert tower.complex(2).is_connected()
        assert tower.labels == ("Z/2", "Z/4")

    def test_fiber_diameters_grow(self):
        """Fibers over a vertex of C3 spread out around C6 and C12."""
        tower = abelian_tower(cycle(3), cohomology_basis(cycle(3)), [0, 0])

        assert tuple(fiber_diameter(tower, k, 0) for k in range(3)) == (0.0, 3.0, 6.0)

    def test_composite_action_transitive(self):
        """The composite monodromy acts transitively on the fiber."""
        tower = abelian_tower(cycle(3), cohomology_basis(cycle(3)), [0, 0])
        action = tower.composite_action(2)

        assert action.degree == 4
        assert action.is_transitive()
        assert np.array_equal(np.bincount(tower.composite_projection(2)), [4, 4, 4])

    def test_level_out_of_range(self):
        """Levels beyond the height are rejected."""
        tower = abelian_tower(cycle(3), cohomology_basis(cycle(3)), [0])

        with pytest.raises(InvalidParamsError):
            tower.complex(2)

    def test_unknown_schedule_entry(self):
        """The schedule indexes the cocycle list."""
        with pytest.raises(InvalidParamsError):
            abelian_tower(cycle(3), cohomology_basis(cycle(3)), [1])


class TestCocycleToVoltage:
    """Tests for cocycle_to_voltage."""

    def test_tree_edges_zero(self):
        """After the shift, tree edges carry zero and the potential accounts for the rest."""
        c = grid_torus(3, 3)
        tree = spanning_tree(c)
        omega = np.arange(c.num_edges) % 3
        shifted, f = cocycle_to_voltage(c, omega, None, tree)
        ea = c.edge_array

        assert all(shifted[e] == 0 for e in tree.edges)
        assert np.array_equal(shifted + f[ea[:, 1]] - f[ea[:, 0]], omega)


def _make_k4():
    return SurfaceComplex.from_dict(
        {"name": "k4", "vertices": 4, "edges": [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]}
    )


def _make_random_cover(rng, base):
    """Random permutation voltages on the non-tree edges of a graph."""
    n = int(rng.integers(2, 7))
    tree = spanning_tree(base)
    voltages = {
        eid: tuple(int(x) for x in rng.permutation(n)) for eid in range(base.num_edges) if eid not in tree.edges
    }
    return build_cover(base, CoverSpec(degree=n, voltages=voltages))


def _make_random_torus_cover(rng):
    base = grid_torus(3, 3)
    w0, w1 = cohomology_basis(base)
    a, b = (int(x) for x in rng.integers(0, 4, size=2))
    return build_cover(base, cyclic_cover_spec(base, a * w0 + b * w1, int(rng.integers(2, 7))))


def _make_random_subset(c, rng):
    """A connected vertex set grown one random neighbour at a time."""
    size = int(rng.integers(1, c.num_vertices + 1))
    sub = {int(rng.integers(c.num_vertices))}
    while len(sub) < size:
        frontier = sorted({w for u, v in c.edges for x, w in ((u, v), (v, u)) if x in sub and w not in sub})
        sub.add(int(rng.choice(frontier)))
    return sorted(sub)


def _make_triple(seed):
    """Base, cover and connected subset for one seed."""
    rng = make_rng(seed)
    kind = seed % 3
    if kind == 0:
        cov = _make_random_cover(rng, _make_k4())
    elif kind == 1:
        cov = _make_random_cover(rng, cycle(5))
    else:
        cov = _make_random_torus_cover(rng)
    return cov, _make_random_subset(cov.base, rng)


class TestComponentOrbitDuality:
    """Preimage components match subdomain-group orbits on the fiber."""

    @pytest.mark.parametrize("seed", range(200))
    def test_random_triples(self, seed):
        """Components of the preimage equal orbits of the subdomain group."""
        cov, sub = _make_triple(seed)
        gens = subdomain_group(cov.base, sub, tree=cov.tree)

        assert len(preimage_components(cov, sub)) == len(orbits(cov.monodromy, gens))
