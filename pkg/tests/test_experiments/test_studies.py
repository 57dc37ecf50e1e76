"""Tests for the standalone studies."""

import math

import numpy as np
import pytest

from commuting_pairs.exceptions import ConfigurationError, RoundingError
from commuting_pairs.experiments.generators import make_rng
from commuting_pairs.experiments.studies import (
    gapped_values,
    rotated_event_instance,
    rotated_event_study,
    rounding_study,
    warmup_study,
)


class TestRoundingStudy:
    """Test the projection-rounding study."""

    def test_factor_two_always_holds(self):
        """Test that no rounding moves further than twice the defect."""
        study = rounding_study(count=50, dim=4, seed=1)
        assert study.factor_two_violations == 0
        assert study.idempotent
        assert study.passed
        assert study.max_distance_ratio <= 2.0 + 1e-12

    def test_strict_bound_fails_near_the_threshold(self):
        """Test that defects close to 1/4 push the distance past delta = 1/4."""
        study = rounding_study(count=50, dim=4, seed=1)
        assert study.strict_violations > 0
        assert all(eta >= 0.25 - 1e-9 for eta in study.worst_eigenvalues)

    def test_small_defects_meet_the_strict_bound(self):
        """Test that defects up to 0.1 stay within delta = 0.25."""
        study = rounding_study(count=50, dim=4, seed=2, max_defect=0.1)
        assert study.strict_violations == 0

    def test_summary(self):
        """Test the summary keys."""
        summary = rounding_study(count=5, dim=3).summary()
        assert summary["count"] == 5
        assert summary["passed"] is True

    def test_rejects_bad_settings(self):
        """Test the admissible ranges of max_defect and delta."""
        with pytest.raises(ConfigurationError):
            rounding_study(count=1, max_defect=0.3)
        with pytest.raises(ConfigurationError):
            rounding_study(count=1, max_defect=0.2, delta=0.1)

    @pytest.mark.slow
    def test_thousand_operators(self):
        """Test the default study size."""
        assert rounding_study().passed


class TestRotatedEventStudy:
    """Test the rotated-event study."""

    def test_instance_dimension(self):
        """Test that the dimension must be a multiple of 3."""
        with pytest.raises(ConfigurationError):
            rotated_event_instance(0.1, dim=4)

    def test_instance_at_zero_commutes(self):
        """Test that theta = 0 gives commuting state and observable."""
        instance = rotated_event_instance(0.0, dim=6)
        omega, x = instance.omega.matrix, instance.x.matrix
        assert np.allclose(omega @ x, x @ omega)

    def test_error_scales_linearly_with_theta(self):
        """Test the log-log slope of ||X''' - X|| against theta."""
        study = rotated_event_study()
        assert len(study.rows) == 3
        assert abs(study.slope() - 1.0) <= 0.2
        assert study.structural_items_pass
        summary = study.summary()
        assert summary["exact_all_pass"] is True
        assert summary["rows"] == 3
        assert summary["eps"] == 0.25

    def test_rows_record_n0(self):
        """Test that each row keeps N0 and its report."""
        study = rotated_event_study(thetas=(0.01,), include_exact=False)
        assert study.exact is None
        assert study.rows[0].n0 == 3
        assert study.rows[0].report.all_pass
        assert math.isnan(study.slope())
        assert study.summary()["exact_all_pass"] is None

    def test_pipeline_failure_becomes_error_row(self, mocker):
        """Test that a rounding failure is recorded on its row instead of raised."""
        mocker.patch(
            "commuting_pairs.experiments.studies.build_measurement_chain",
            side_effect=RoundingError("cannot round", operation="build_measurement_chain"),
        )
        study = rotated_event_study(thetas=(0.1, 0.01), include_exact=False)
        assert all(row.report is None for row in study.rows)
        assert "cannot round" in study.rows[0].error
        assert math.isnan(study.rows[0].approximation_error)
        assert not study.structural_items_pass


class TestWarmupStudy:
    """Test the finite-dimensional pinching study."""

    def test_gapped_values(self):
        """Test that values keep their gap and sum to the total."""
        values = gapped_values(make_rng(0), 4, 0.05, 0.0, 1.0)
        assert values.sum() == pytest.approx(1.0)
        assert values[0] >= 0.05 - 1e-15
        assert np.all(np.diff(values) >= 0.05 - 1e-15)

    def test_gap_too_large(self):
        """Test that an impossible gap is rejected."""
        with pytest.raises(ConfigurationError):
            gapped_values(make_rng(0), 4, 0.2, 0.0, 1.0)

    def test_bounds_hold(self):
        """Test both pinching bounds and Born preservation on small instances."""
        study = warmup_study(count=30, seed=4)
        assert study.observable_violations == 0
        assert study.state_violations == 0
        assert study.max_born_discrepancy <= 1e-12
        assert study.passed
        assert study.summary()["count"] == 30

    @pytest.mark.slow
    def test_default_size(self):
        """Test the default study size."""
        assert warmup_study().passed
