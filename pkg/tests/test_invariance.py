import pytest

from core.exceptions import ConfigurationError, InvarianceError
from core.group import lattice
from services.invariance import (
    DEFAULT_EVENTS,
    CylinderEvent,
    bernoulli_percolation_sampler,
    default_translates,
    evaluate_sample,
    invariance_test,
    law_for,
    run_campaign,
    sample_rng,
    two_proportion_z,
)


@pytest.fixture
def horizontal():
    return CylinderEvent.of([[[0, 0], [1, 0]]])


class TestCylinderEvent:

    def test_edges_are_normalised(self):
        event = CylinderEvent.of([[[1, 0], [0, 0]]])
        assert event.edges == ((lattice(0, 0), lattice(1, 0)),)

    def test_translate(self, horizontal):
        assert horizontal.translate(lattice(2, -2)).edges == ((lattice(2, -2), lattice(3, -2)),)

    def test_empty_event(self):
        with pytest.raises(ConfigurationError):
            CylinderEvent.of([])


class TestTwoProportionZ:

    def test_equal_counts(self):
        assert two_proportion_z(40, 40, 100) == 0.0

    def test_antisymmetric(self):
        assert two_proportion_z(30, 45, 100) == pytest.approx(-two_proportion_z(45, 30, 100))
        assert two_proportion_z(30, 45, 100) > 0

    def test_degenerate_pool(self):
        assert two_proportion_z(0, 0, 50) == 0.0
        assert two_proportion_z(50, 50, 50) == 0.0


class TestSampleRng:

    def test_streams_do_not_depend_on_call_order(self):
        later = sample_rng(7, 3).random()
        sample_rng(7, 0).random()
        assert sample_rng(7, 3).random() == later

    def test_indices_differ(self):
        assert sample_rng(7, 0).random() != sample_rng(7, 1).random()


class TestInvarianceTest:

    def test_percolation_is_not_rejected(self, horizontal):
        sampler = bernoulli_percolation_sampler(4)
        report = invariance_test(sampler, horizontal, default_translates(), 400, 0.01, seed=3, law="percolation")
        assert not report.rejected
        assert len(report.translates) == 7
        assert report.corrected_alpha == pytest.approx(0.01 / 7)
        assert 0.35 < report.baseline_frequency < 0.65

    def test_same_seed_same_report(self, horizontal):
        sampler = bernoulli_percolation_sampler(5)
        first = invariance_test(sampler, horizontal, default_translates(), 50, 0.05, seed=11)
        second = invariance_test(sampler, horizontal, default_translates(), 50, 0.05, seed=11)
        assert first.model_dump() == second.model_dump()

    def test_constant_law(self):
        sampler = bernoulli_percolation_sampler(4, p=1.0)
        shifted = CylinderEvent.of([[[0, 0], [0, 1]]])
        # every edge present: all frequencies agree
        report = invariance_test(sampler, shifted, default_translates(), 20, 0.05)
        assert not report.rejected
        assert report.baseline_frequency == 1.0

    def test_untrusted_event(self):
        sampler = bernoulli_percolation_sampler(4)
        far = CylinderEvent.of([[[30, 0], [31, 0]]])
        with pytest.raises(InvarianceError):
            evaluate_sample(sampler, 0, [far], 0)

    @pytest.mark.parametrize("N, alpha", [(0, 0.01), (10, 0.0), (10, 1.0)])
    def test_bad_parameters(self, horizontal, N, alpha):
        with pytest.raises(ConfigurationError):
            invariance_test(bernoulli_percolation_sampler(5), horizontal, default_translates(), N, alpha)

    def test_identity_only(self, horizontal):
        with pytest.raises(ConfigurationError):
            invariance_test(bernoulli_percolation_sampler(5), horizontal, [lattice(0, 0)], 10, 0.01)


class TestLaws:

    def test_unknown_law(self):
        with pytest.raises(ConfigurationError):
            law_for("ising", 10, 2)

    def test_bad_probability(self):
        with pytest.raises(ConfigurationError):
            bernoulli_percolation_sampler(4, p=1.5)

    def test_small_tiling_campaign(self, horizontal):
        reports = run_campaign("tiling", 14, 2, 6, 0.01, seed=5, events=[horizontal])
        assert len(reports) == 1
        assert reports[0].samples == 6
        assert reports[0].law == "tiling"


class TestTilingCampaigns:
    """Both tiling laws at a sample count where the raw law's bias shows."""

    RADIUS, MARGIN, N, ALPHA, SEED = 12, 2, 400, 0.01, 17

    def test_unaveraged_law_is_rejected(self):
        reports = run_campaign("tiling-unaveraged", self.RADIUS, self.MARGIN, self.N, self.ALPHA, seed=self.SEED)
        assert len(reports) == len(DEFAULT_EVENTS)
        assert any(r.rejected for r in reports)

    def test_averaged_law_is_not_rejected(self):
        reports = run_campaign("tiling", self.RADIUS, self.MARGIN, self.N, self.ALPHA, seed=self.SEED)
        assert len(reports) == len(DEFAULT_EVENTS)
        assert not any(r.rejected for r in reports)
        assert all(r.corrected_alpha == pytest.approx(self.ALPHA / 7) for r in reports)
