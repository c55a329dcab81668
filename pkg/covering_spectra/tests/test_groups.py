"""Tests for coset actions and low-index enumeration."""
from math import prod

import pytest

from covering_spectra.exceptions import (
    BoundExceededError,
    DegreeTooLargeError,
    InfiniteGroupError,
    InvalidParamsError,
    NotTransitiveError,
)
from covering_spectra.groups import (
    abelian_mu,
    brute_force_abelian_mu,
    complex_presentation,
    coset_generators,
    enumerate_index_n,
    fixed_identity_coset,
    fixes_all_points,
    hall_subgroup_counts,
    intermediate_count_check,
    is_contained,
    labeled_action_count,
    min_generators_coset,
    orbit_lower_bound_check,
    orbits,
)
from covering_spectra.models import AbelianInvariants, CosetAction, Presentation, SubgroupWordSet
from covering_spectra.surface import cycle, grid_torus

from .conftest import MOCK_GENUS2_INDEX_COUNTS, MOCK_HALL_F2


def _make_gens(*words):
    return SubgroupWordSet.from_words([list(w) for w in words])


def _invariant_factor_lists(max_order, smallest=2):
    """Every chain d1 | d2 | ... with d1 >= smallest and product at most max_order."""
    out = [()]
    for d in range(smallest, max_order + 1):
        for rest in _invariant_factor_lists(max_order // d, d):
            if all(k % d == 0 for k in rest):
                out.append((d, *rest))
    return out


ALL_SMALL_ABELIAN = _invariant_factor_lists(256)


class TestOrbits:
    """Tests for subgroup orbits on cosets."""

    def test_orbits_of_square(self):
        """The square of the generator of Z/4 has two orbits."""
        a = CosetAction.regular_abelian((4,))

        assert orbits(a, _make_gens((1, 1))) == [[0, 2], [1, 3]]

    def test_fixed_identity_coset(self):
        """Only words in the stabilizer fix the basepoint."""
        a = CosetAction.regular_abelian((4,))

        assert fixed_identity_coset(a, _make_gens((1, 1, 1, 1)))
        assert not fixed_identity_coset(a, _make_gens((1, 1)))

    def test_fixes_all_points(self):
        """A word acting trivially fixes every coset."""
        a = CosetAction(perms=((1, 0, 2), (0, 2, 1)))

        assert fixes_all_points(a, _make_gens((1, 1)))
        assert not fixes_all_points(a, _make_gens((2,)))


class TestCosetGenerators:
    """Tests for generator counts of coset spaces."""

    @pytest.mark.parametrize(
        ("factors", "expected"),
        [((2, 2), 2), ((6,), 1), ((2, 3), 1), ((2, 2, 2), 3)],
    )
    def test_regular_abelian(self, factors, expected):
        """Regular actions need as many elements as the group needs generators."""
        assert min_generators_coset(CosetAction.regular_abelian(factors)) == expected

    @pytest.mark.parametrize("factors", [f for f in ALL_SMALL_ABELIAN if 1 < prod(f) <= 24], ids=str)
    def test_regular_actions_up_to_degree_24(self, factors):
        """The block search finds the generator count of every regular abelian action of degree <= 24."""
        action = CosetAction.regular_abelian(factors)

        assert min_generators_coset(action) == abelian_mu(AbelianInvariants.from_factors(factors))

    def test_witness_words_generate(self):
        """The witness words with the stabilizer are transitive."""
        a = CosetAction.regular_abelian((2, 2))
        witness = coset_generators(a)

        assert witness.count == len(witness.words) == 2
        assert witness.suborbits == 4

    def test_trivial_action(self):
        """A one-point space needs nothing."""
        assert min_generators_coset(CosetAction(perms=((0,),))) == 0

    def test_not_transitive(self):
        """Intransitive actions are rejected."""
        with pytest.raises(NotTransitiveError):
            min_generators_coset(CosetAction(perms=((1, 0, 2),)))

    def test_degree_limit(self):
        """Large degrees hit the search bound."""
        with pytest.raises(DegreeTooLargeError):
            min_generators_coset(CosetAction.regular_abelian((8,)), max_degree=4)

    def test_orbit_bound_is_tight(self):
        """One generator of Z/2 x Z/2 leaves exactly k - l + 1 = 2 orbits."""
        record = orbit_lower_bound_check(CosetAction.regular_abelian((2, 2)), _make_gens((1,)))

        assert record.required == 2
        assert record.orbits == 2
        assert record.to_dict()["tight"]


class TestAbelianMu:
    """Tests for the generator count of finite abelian groups."""

    def test_formula(self):
        """Z/2 x Z/4 needs two generators."""
        assert abelian_mu(AbelianInvariants(rank=0, torsion=(2, 4))) == 2

    def test_trivial(self):
        """The trivial group needs none."""
        assert abelian_mu(AbelianInvariants()) == 0

    def test_infinite(self):
        """Free rank is rejected."""
        with pytest.raises(InfiniteGroupError):
            abelian_mu(AbelianInvariants(rank=1))

    @pytest.mark.parametrize("factors", [(2, 3), (2, 4), (3, 3), (2, 2, 2)])
    def test_brute_force_agrees(self, factors):
        """Exhaustive search matches the invariant-factor formula."""
        inv = AbelianInvariants.from_factors(factors)

        assert brute_force_abelian_mu(factors) == abelian_mu(inv)

    @pytest.mark.parametrize("factors", ALL_SMALL_ABELIAN, ids=str)
    def test_every_group_up_to_order_256(self, factors):
        """The regular-action cross-check matches the formula for every abelian group of order <= 256."""
        assert brute_force_abelian_mu(factors) == abelian_mu(AbelianInvariants.from_factors(factors))

    def test_elementary_abelian_order_256(self):
        """(Z/2)^8 needs eight generators."""
        assert brute_force_abelian_mu((2,) * 8) == 8

    def test_order_bound(self):
        """Orders above the cross-check bound are refused."""
        with pytest.raises(DegreeTooLargeError):
            brute_force_abelian_mu((2, 2), max_order=3)


class TestEnumeration:
    """Tests for low-index subgroup enumeration."""

    def test_hall_counts(self):
        """Hall's recursion for the free group of rank two."""
        assert hall_subgroup_counts(2, len(MOCK_HALL_F2)) == MOCK_HALL_F2

    def test_hall_rejects_rank_zero(self):
        """Rank must be positive."""
        with pytest.raises(InvalidParamsError):
            hall_subgroup_counts(0, 3)

    def test_free_group_matches_hall(self):
        """Enumeration of the rank-two free group agrees with Hall's counts."""
        p = Presentation.free(2)

        assert [len(enumerate_index_n(p, n)) for n in range(1, 5)] == MOCK_HALL_F2[:4]

    def test_actions_are_transitive_and_distinct(self):
        """Every enumerated action is transitive and appears once."""
        actions = enumerate_index_n(Presentation.free(2), 3)

        assert all(a.is_transitive() for a in actions)
        assert len(set(actions)) == len(actions)

    @pytest.mark.parametrize(("n", "expected"), sorted(MOCK_GENUS2_INDEX_COUNTS.items()))
    def test_surface_group(self, n, expected):
        """Index-n subgroups of the genus-2 surface group."""
        actions = enumerate_index_n(Presentation.surface(2), n)

        assert len(actions) == expected
        assert all(a.satisfies(Presentation.surface(2)) for a in actions)

    def test_torus_group(self):
        """Z^2 has sigma(n) subgroups of index n."""
        assert len(enumerate_index_n(Presentation.surface(1), 4)) == 7

    def test_bound_exceeded(self):
        """Indices above the bound are refused."""
        with pytest.raises(BoundExceededError):
            enumerate_index_n(Presentation.free(2), 7)

    def test_labeled_count(self):
        """Labeled transitive actions carry the (n-1)! relabelings."""
        assert labeled_action_count(Presentation.free(2), 2) == 3
        assert labeled_action_count(Presentation.free(2), 3) == 2 * 13

    def test_complex_presentation(self):
        """The torus complex has a presentation with its non-tree edges."""
        c = grid_torus(3, 3)
        p = complex_presentation(c)

        assert p.rank == 10
        assert len(p.relators) <= 9
        assert len(enumerate_index_n(complex_presentation(cycle(5)), 2)) == 1


class TestContainment:
    """Tests for containment of subgroups."""

    def test_everything_lies_in_whole_group(self):
        """The index-1 subgroup contains every subgroup."""
        (whole,) = enumerate_index_n(Presentation.free(2), 1)

        assert all(is_contained(a, whole) for a in enumerate_index_n(Presentation.free(2), 2))

    def test_distinct_index_two_not_nested(self):
        """Distinct subgroups of the same index are not nested."""
        first, second, _ = enumerate_index_n(Presentation.free(2), 2)

        assert is_contained(first, first)
        assert not is_contained(first, second)

    def test_intermediate_count_check(self):
        """Index-4 subgroups of F2 lie in at most three index-2 subgroups."""
        report = intermediate_count_check(Presentation.free(2), 2)

        assert report.count_n == 3
        assert report.count_2n == 71
        assert report.bound == 3
        assert report.max_containment <= 3
        assert report.implied_lower_bound == 1.0

    def test_intermediate_count_check_index_three(self):
        """Index-6 subgroups of F2 lie in at most five index-3 subgroups."""
        report = intermediate_count_check(Presentation.free(2), 3)

        assert report.count_n == MOCK_HALL_F2[2]
        assert report.count_2n == MOCK_HALL_F2[5]
        assert report.bound == 5
        assert report.max_containment <= 5
        assert report.implied_lower_bound == pytest.approx(2.6)
