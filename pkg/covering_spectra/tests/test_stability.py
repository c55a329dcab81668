"""Tests for stability verdicts and bound ledgers."""
from math import cos, pi

import numpy as np
import pytest

from covering_spectra.const import VERDICT_AMBIGUOUS, VERDICT_STABLE, VERDICT_STRICT
from covering_spectra.covering import abelian_tower, build_cover, cyclic_cover_spec
from covering_spectra.exceptions import BoundViolationError, InvalidParamsError, RangeExceededError
from covering_spectra.homology import cohomology_basis
from covering_spectra.models import Presentation
from covering_spectra.nodal import nodal_decomposition, unstable_cover_plan
from covering_spectra.spectra import assemble, lowest_eigenpairs
from covering_spectra.stability import (
    BoundEntry,
    count_experiment,
    lifting_check,
    monotone_instability_check,
    nonana_check,
    numberd_check,
    numberg_check,
    sigma_upper_bounds,
    spectrum_past,
    stability_verdict,
    tower_experiment,
    weyl_ratio,
)
from covering_spectra.surface import cycle, grid_torus

from .conftest import MOCK_COVER_LAMBDA_1, MOCK_CYCLE_LENGTH, MOCK_LAMBDA_1


def _make_double_cycle():
    """C12, its double cover C24 and both complete spectra."""
    base = cycle(MOCK_CYCLE_LENGTH)
    cov = build_cover(base, cyclic_cover_spec(base, cohomology_basis(base)[0], 2))
    s_base = lowest_eigenpairs(assemble(base), MOCK_CYCLE_LENGTH)
    s_cover = lowest_eigenpairs(assemble(cov.total), 2 * MOCK_CYCLE_LENGTH)
    return cov, s_base, s_cover


def _make_arc_vector():
    """lambda_1 eigenvector of C12 with no zeros: two arcs of six vertices."""
    return np.array([cos(pi * (2 * j + 1) / MOCK_CYCLE_LENGTH) for j in range(MOCK_CYCLE_LENGTH)])


class TestBoundEntry:
    """Tests for BoundEntry."""

    def test_tight(self):
        """Equality holds and is tight."""
        entry = BoundEntry("x", 3, 3)

        assert entry.holds
        assert entry.tight
        assert entry.require() is entry

    def test_violation(self):
        """An observation below the claim raises."""
        with pytest.raises(BoundViolationError) as err:
            BoundEntry("x", 3, 2).require()
        assert (err.value.claimed, err.value.observed) == (3, 2)


class TestVerdict:
    """Tests for stability_verdict."""

    def test_lambda_1_strictly_unstable(self):
        """The double cover of C12 gains a pair below lambda_1."""
        _, s_base, s_cover = _make_double_cycle()
        report = stability_verdict(s_base, s_cover, 1)

        assert report.verdict == VERDICT_STRICT
        assert report.counts["base_open"] == 1
        assert report.counts["cover_open"] == 3
        assert report.target["lambda"] == pytest.approx(MOCK_LAMBDA_1)
        assert report.unstable

    def test_lambda_0_stable(self):
        """A connected cover has a simple zero eigenvalue."""
        _, s_base, s_cover = _make_double_cycle()

        assert stability_verdict(s_base, s_cover, 0).verdict == VERDICT_STABLE

    def test_interval_verdicts(self):
        """[0.05, 0.1] holds the new pair, [0.1, 0.2] holds nothing."""
        _, s_base, s_cover = _make_double_cycle()

        assert stability_verdict(s_base, s_cover, (0.1, 0.2)).verdict == VERDICT_STABLE
        report = stability_verdict(s_base, s_cover, (0.05, 0.1))
        assert report.verdict == VERDICT_STRICT
        assert report.counts == {"base": 0, "cover": 2}

    def test_ambiguous_interval(self):
        """An interval end one margin from an eigenvalue is ambiguous."""
        _, s_base, s_cover = _make_double_cycle()
        report = stability_verdict(s_base, s_cover, (0.0, MOCK_COVER_LAMBDA_1 - 1e-8))

        assert report.verdict == VERDICT_AMBIGUOUS

    def test_index_out_of_range(self):
        """k must index a computed base eigenvalue."""
        _, s_base, s_cover = _make_double_cycle()

        with pytest.raises(RangeExceededError):
            stability_verdict(s_base, s_cover, MOCK_CYCLE_LENGTH)

    def test_bad_interval(self):
        """Intervals must be ordered and non-negative."""
        _, s_base, s_cover = _make_double_cycle()

        with pytest.raises(InvalidParamsError):
            stability_verdict(s_base, s_cover, (0.2, 0.1))

    def test_monotone(self):
        """Instability persists for every later index."""
        _, s_base, s_cover = _make_double_cycle()
        reports = monotone_instability_check(s_base, s_cover, 5)

        assert len(reports) == 5
        assert all(r.verdict == VERDICT_STRICT for r in reports)

    def test_lifting(self):
        """Cover eigenvalues never exceed base eigenvalues of the same index."""
        _, s_base, s_cover = _make_double_cycle()
        report = lifting_check(s_base, s_cover)

        assert report.indices == MOCK_CYCLE_LENGTH
        assert report.max_excess <= 1e-9
        assert all(entry.holds for entry in report.entries)

    def test_spectrum_past_grows(self):
        """The block doubles until the target is certified."""
        s = spectrum_past(assemble(cycle(MOCK_CYCLE_LENGTH)), 1.5, 2)

        assert s.certifies(1.5)
        assert s.count == 8


class TestNodalBounds:
    """Tests for the nodal lifting checks."""

    def test_numberg_two_arcs(self):
        """Each arc lifts to two components: gain 2, tight against the cover count."""
        cov, s_base, s_cover = _make_double_cycle()
        report = numberg_check(cov, s_base, s_cover, _make_arc_vector())

        assert report.value == pytest.approx(MOCK_LAMBDA_1)
        assert report.components == (2, 2)
        assert report.sheets == ((1, 1), (1, 1))
        assert report.gain == 2
        assert report.dim_x == report.dim_x_expected == 3
        assert report.counts == {"base_open": 1, "cover_open": 3}
        assert report.entries[0].tight
        assert report.integral_residual < 1e-9

    def test_numberg_propagates(self):
        """The gain persists above lambda."""
        cov, s_base, s_cover = _make_double_cycle()
        report = numberg_check(cov, s_base, s_cover, _make_arc_vector())

        assert report.propagation
        assert all(g >= report.gain for _, g in report.propagation)

    def test_nonana_applicable(self):
        """One coset generator against contractible nodal domains."""
        cov, s_base, s_cover = _make_double_cycle()
        report = nonana_check(cov, s_base, s_cover)

        assert report.coset_generators == 1
        assert report.domain_generators == 0
        assert report.applicable
        assert report.verdict == VERDICT_STRICT


class TestDirichletBounds:
    """Tests for sigma estimates and the generator-count check."""

    def test_sigma_zero_is_long_path(self):
        """Contractible regions of C12 grow to a path of 11 vertices."""
        sigma = sigma_upper_bounds(cycle(MOCK_CYCLE_LENGTH), 0)

        assert sigma.value == pytest.approx(MOCK_COVER_LAMBDA_1)
        assert len(sigma.witness) == MOCK_CYCLE_LENGTH - 1
        assert sigma.generators == 0

    def test_sigma_rejects_negative_budget(self):
        """The loop budget is non-negative."""
        with pytest.raises(InvalidParamsError):
            sigma_upper_bounds(cycle(MOCK_CYCLE_LENGTH), -1)

    def test_numberd(self):
        """k - l + 1 = 2 claimed, three cover eigenvalues observed."""
        cov, _, s_cover = _make_double_cycle()
        sigma = sigma_upper_bounds(cov.base, 0)
        report = numberd_check(cov, s_cover, sigma)

        assert report.k == 1
        assert report.observed == 3
        assert report.entries[0].claimed == 2
        assert report.entries[1].claimed == 2


class TestTowerAndCounts:
    """Tests for tower trajectories, subgroup counts and Weyl ratios."""

    def test_tower_trajectory(self):
        """lambda_1 falls from 3 to 1 to 2 - sqrt(3) along C3, C6, C12."""
        tower = abelian_tower(cycle(3), cohomology_basis(cycle(3)), [0, 0])
        traj = tower_experiment(tower, 1, 0.27)

        assert traj.values == pytest.approx((3.0, 1.0, 2 - 3 ** 0.5))
        assert traj.open_counts == (1, 3, 7)
        assert traj.composite_unstable == (False, True, True)
        assert traj.diameters == (0.0, 3.0, 6.0)

    def test_tower_roof_violated(self):
        """A roof below the final value fails."""
        tower = abelian_tower(cycle(3), cohomology_basis(cycle(3)), [0, 0])

        with pytest.raises(BoundViolationError):
            tower_experiment(tower, 1, 0.2)

    def test_cycle_tower_acceptance(self):
        """Eight doublings of C3 push lambda_1 towards zero while fiber diameters grow."""
        tower = abelian_tower(cycle(3), cohomology_basis(cycle(3)), [0] * 8)
        traj = tower_experiment(tower, 1)
        expected = [2 - 2 * cos(2 * pi / (3 * 2**k)) for k in range(9)]

        assert traj.values == pytest.approx(expected, abs=1e-9)
        assert all(b < a for a, b in zip(traj.values, traj.values[1:]))
        assert all(v < 0.01 for v in traj.values[6:])
        assert traj.diameters == tuple([0.0] + [3.0 * 2 ** (k - 1) for k in range(1, 9)])
        assert traj.to_dict()["roof"] is None

    @pytest.mark.parametrize("index", [1, 2])
    def test_torus_tower_acceptance(self, index):
        """Six double covers unwrapping one direction of a 4 x 4 torus bring lambda_1 and lambda_2 below 1e-3."""
        base = grid_torus(4, 4)
        horizontal = np.zeros(base.num_edges, dtype=np.int64)
        horizontal[[i * 4 + 3 for i in range(4)]] = 1
        tower = abelian_tower(base, [horizontal], [0] * 6)
        traj = tower_experiment(tower, index)
        expected = [2 - 2 * cos(2 * pi / (4 * 2**k)) for k in range(7)]

        assert traj.values == pytest.approx(expected, abs=1e-9)
        assert traj.values[-1] < 1e-3
        assert traj.diameters == tuple([0.0] + [float(2 ** (k + 1)) for k in range(1, 7)])
        assert all(traj.composite_unstable[1:])

    def test_tower_roof_tolerance(self):
        """A zero roof passes once the tolerance covers the final value."""
        tower = abelian_tower(cycle(3), cohomology_basis(cycle(3)), [0] * 5)
        traj = tower_experiment(tower, 1, 0.0, roof_tol=0.01)

        assert traj.values[-1] < 0.01
        assert traj.to_dict()["roof_tol"] == 0.01
        with pytest.raises(BoundViolationError):
            tower_experiment(tower, 1, 0.0)

    def test_tower_diameter_entries(self):
        """Every level records a fiber diameter entry that holds."""
        tower = abelian_tower(cycle(3), cohomology_basis(cycle(3)), [0, 0])
        entries = [e for e in tower_experiment(tower, 1).entries if "fiber diameter" in e.name]

        assert len(entries) == 2
        assert all(e.holds for e in entries)

    def test_count_experiment(self):
        """Labeled counts of F2 at indices 2 and 4."""
        ledger = count_experiment(Presentation.free(2), 2)
        data = ledger.to_dict()

        assert ledger.labeled_n == 3
        assert ledger.labeled_2n == 426
        assert data["a_n"] == 3
        assert data["u_2n_lower_bound_int"] == 1
        assert ledger.assumptions

    def test_weyl_ratio(self):
        """The ratio is three below the old lambda_1 and two at the top."""
        _, s_base, s_cover = _make_double_cycle()
        curve = weyl_ratio(s_base, s_cover, [0.1, 4.0], degree=2)

        assert curve.ratios == [3.0, 2.0]
        assert curve.first_above_one == 0.1

    def test_weyl_uncertified_point(self):
        """Points past a partial spectrum stay empty."""
        _, s_base, _ = _make_double_cycle()
        partial = lowest_eigenpairs(assemble(cycle(2 * MOCK_CYCLE_LENGTH)), 3)
        curve = weyl_ratio(s_base, partial, [1.0])

        assert curve.points == ((1.0, None, None),)
        assert curve.first_above_one is None


class TestUnstableCoverEndToEnd:
    """Nodal domains to planned cover to verdict on a 12 x 12 torus."""

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_band_cover_is_strictly_unstable(self, n):
        """Unwrapping across the nodal bands adds 2n - 2 eigenvalues below lambda_1."""
        c = grid_torus(12, 12)
        phi = np.array([cos(2 * pi * (v % 12 + 0.5) / 12) for v in range(c.num_vertices)])
        d = nodal_decomposition(c, phi)
        plan = unstable_cover_plan(c, d, 0, n)
        cov = build_cover(c, plan.spec)
        s_base = lowest_eigenpairs(assemble(c), c.num_vertices)
        s_cover = lowest_eigenpairs(assemble(cov.total), cov.total.num_vertices)

        report = stability_verdict(s_base, s_cover, 1)

        assert d.nu == 2
        assert cov.connected
        assert report.target["lambda"] == pytest.approx(2 - 2 * cos(pi / 6))
        assert report.verdict == VERDICT_STRICT
        assert report.counts["base_open"] == 1
        assert report.counts["cover_open"] == 2 * n - 1
        assert report.counts["cover_open"] >= plan.predicted_bound(report.counts["base_open"])["single"]
