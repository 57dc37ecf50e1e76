"""Tests for the spectral data model."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats, integers

from commuting_pairs.core.linalg import OrthoProjection
from commuting_pairs.core.spectral import (
    DensityMatrix,
    IntervalCover,
    ObservableSpec,
    born_distribution,
    build_cover,
    decompose,
    min_gap,
    tail_weight,
)
from commuting_pairs.exceptions import ValidationError
from commuting_pairs.experiments.generators import make_rng, random_unitary


class TestDensityMatrix:
    """Test DensityMatrix validation and constructors."""

    def test_rejects_negative_eigenvalue(self):
        """Test that a non-positive matrix is rejected."""
        with pytest.raises(ValidationError, match="negative eigenvalue"):
            DensityMatrix(np.diag([1.1, -0.1]))

    def test_rejects_wrong_trace(self):
        """Test that the trace must be one."""
        with pytest.raises(ValidationError, match="unit trace"):
            DensityMatrix(np.diag([0.5, 0.4]))

    def test_constructors(self):
        """Test maximally mixed, pure and from_spectrum states."""
        assert np.allclose(DensityMatrix.maximally_mixed(4).matrix, np.eye(4) / 4)
        pure = DensityMatrix.pure([1.0, 1.0])
        assert np.allclose(pure.matrix, 0.5 * np.ones((2, 2)))
        basis = random_unitary(make_rng(3), 3)
        state = DensityMatrix.from_spectrum([0.5, 0.3, 0.2], basis)
        assert np.trace(state.matrix).real == pytest.approx(1.0)


class TestDecompose:
    """Test degeneracy grouping."""

    def test_kernel_split(self):
        """Test diag(0.5, 0.5, 0): one distinct value and a kernel."""
        decomposition = decompose(np.diag([0.5, 0.5, 0.0]))
        assert decomposition.distinct_values == pytest.approx((0.5,))
        assert decomposition.groups == ((0, 1),)
        assert decomposition.kernel_group == (2,)
        assert decomposition.group_weights == pytest.approx((1.0,))
        assert decomposition.kernel_weight == 0.0

    def test_merge_within_tolerance(self):
        """Test that eigenvalues closer than the tolerance share a group."""
        decomposition = decompose(np.diag([0.5 + 1e-12, 0.5, 0.3]), tol_degeneracy=1e-9)
        assert decomposition.groups == ((0, 1), (2,))
        assert len(decomposition.distinct_values) == 2

    def test_weights_of_rotated_state(self):
        """Test group weights of U diag(0.4, 0.4, 0.2) U^H."""
        basis = random_unitary(make_rng(11), 3)
        state = DensityMatrix.from_spectrum([0.4, 0.4, 0.2], basis)
        decomposition = decompose(state)
        assert decomposition.group_weights == pytest.approx((0.8, 0.2), abs=1e-12)
        assert np.allclose(decomposition.reconstruct(), state.matrix, atol=1e-12)

    def test_without_kernel_split(self):
        """Test that zero is an ordinary value when the kernel is not split."""
        decomposition = decompose(np.diag([1.0, 0.0, -1.0]), split_kernel=False)
        assert decomposition.distinct_values == pytest.approx((1.0, 0.0, -1.0))
        assert decomposition.kernel_group == ()

    def test_projections_sum_to_identity(self):
        """Test that eigenprojections and the kernel projection partition the space."""
        decomposition = decompose(np.diag([0.6, 0.4, 0.0, 0.0]))
        total = sum(p.matrix for p in decomposition.projections())
        total = total + decomposition.kernel_projection().matrix
        assert np.allclose(total, np.eye(4))
        assert decomposition.kernel_projection().rank == 2


class TestTailWeight:
    """Test the tail weight below eps^(1/4)."""

    def test_direct_summation(self):
        """Test Omega = diag(0.9, 0.06, 0.04) at eps = 1e-4 (threshold 0.1)."""
        decomposition = decompose(np.diag([0.9, 0.06, 0.04]))
        assert tail_weight(decomposition, 1e-4) == pytest.approx(0.10)

    def test_no_tail(self):
        """Test a threshold below the smallest eigenvalue."""
        decomposition = decompose(np.diag([0.6, 0.4]))
        assert tail_weight(decomposition, 1e-8) == 0.0

    def test_all_tail(self):
        """Test I / M with eps^(1/4) >= 1 / M."""
        decomposition = decompose(DensityMatrix.maximally_mixed(4))
        assert tail_weight(decomposition, 0.3**4) == pytest.approx(1.0)

    def test_negative_eps(self):
        """Test that a negative eps is rejected."""
        with pytest.raises(ValidationError):
            tail_weight(decompose(np.diag([1.0, 0.0])), -1e-3)

    @settings(max_examples=40, deadline=None)
    @given(
        integers(min_value=0, max_value=2**32 - 1),
        floats(min_value=0.0, max_value=1.0),
        floats(min_value=0.0, max_value=1.0),
    )
    def test_monotone_in_eps(self, seed, first, second):
        """Test that a larger eps never lowers the tail weight."""
        decomposition = decompose(np.diag(make_rng(seed).dirichlet(np.ones(6))))
        small, large = sorted((first, second))
        assert tail_weight(decomposition, small) <= tail_weight(decomposition, large)


class TestMinGap:
    """Test the smallest spectral gap."""

    def test_with_zero(self):
        """Test (0.75, 0.25) with an appended zero."""
        assert min_gap([0.75, 0.25], append_zero=True) == pytest.approx(0.25)

    def test_without_zero(self):
        """Test (1, -1)."""
        assert min_gap([1.0, -1.0]) == pytest.approx(2.0)

    def test_single_value(self):
        """Test a single value with and without the appended zero."""
        assert min_gap([1.0], append_zero=True) == pytest.approx(1.0)
        assert math.isinf(min_gap([1.0]))

    def test_rejects_unsorted_and_empty(self):
        """Test input validation."""
        with pytest.raises(ValidationError):
            min_gap([0.25, 0.75])
        with pytest.raises(ValidationError):
            min_gap([])


class TestObservableAndBorn:
    """Test ObservableSpec and the Born distribution."""

    def test_born_coordinates(self):
        """Test Omega = diag(0.5, 0.3, 0.2) against diag(1, 1, 0), diag(0, 0, 1)."""
        omega = DensityMatrix(np.diag([0.5, 0.3, 0.2]))
        observable = ObservableSpec(
            (1.0, -1.0),
            (
                OrthoProjection(np.diag([1.0, 1.0, 0.0])),
                OrthoProjection(np.diag([0.0, 0.0, 1.0])),
            ),
        )
        assert born_distribution(omega, observable) == pytest.approx([0.8, 0.2])

    def test_born_pure_aligned(self):
        """Test a pure state inside the first eigenspace."""
        omega = DensityMatrix.pure([1.0, 0.0, 0.0])
        observable = ObservableSpec.from_operator(np.diag([2.0, 1.0, 0.0]))
        assert born_distribution(omega, observable) == pytest.approx([1.0, 0.0, 0.0])

    def test_born_against_basis_sum(self):
        """Test a random 6x6 pair against sum_i <e_i| U^H Omega U |e_i> over each group."""
        rng = make_rng(5)
        weights = rng.dirichlet(np.ones(6))
        omega = DensityMatrix.from_spectrum(weights, random_unitary(rng, 6))
        basis = random_unitary(rng, 6)
        x_values = np.array([2.0, 2.0, 1.0, 0.0, 0.0, -1.0])
        observable = ObservableSpec.from_operator((basis * x_values) @ basis.conj().T)
        rotated = np.diag(basis.conj().T @ omega.matrix @ basis).real
        expected = [rotated[:2].sum(), rotated[2], rotated[3:5].sum(), rotated[5]]
        assert born_distribution(omega, observable) == pytest.approx(expected, abs=1e-10)

    def test_observable_validation(self):
        """Test that projections must sum to the identity and values must decrease."""
        p = OrthoProjection(np.diag([1.0, 0.0]))
        q = OrthoProjection(np.diag([0.0, 1.0]))
        with pytest.raises(ValidationError, match="sum to the identity"):
            ObservableSpec((1.0,), (p,))
        with pytest.raises(ValidationError, match="strictly decreasing"):
            ObservableSpec((-1.0, 1.0), (p, q))
        with pytest.raises(ValidationError, match="pairwise orthogonal"):
            ObservableSpec((1.0, 0.0), (p, p))

    def test_observable_matrix(self):
        """Test that the observable reassembles its operator."""
        x = np.diag([0.3, -0.2, 0.3])
        observable = ObservableSpec.from_operator(x)
        assert observable.values == pytest.approx((0.3, -0.2))
        assert np.allclose(observable.matrix(), x)

    def test_dimension_mismatch(self):
        """Test that the Born distribution needs matching dimensions."""
        with pytest.raises(ValidationError):
            born_distribution(
                DensityMatrix.maximally_mixed(2), ObservableSpec.from_operator(np.eye(3))
            )


class TestBuildCover:
    """Test the greedy interval cover."""

    def test_close_points_share_an_interval(self):
        """Test spectrum {0, 0.1} at eps = 0.06."""
        cover = build_cover([0.0, 0.1], 0.06)
        assert len(cover.intervals) == 1
        assert cover.intervals[0] == pytest.approx((-0.01, 0.11))
        assert cover.midpoints[0] == pytest.approx(0.05)

    def test_far_points(self):
        """Test spectrum {0, 1} at eps = 0.1."""
        cover = build_cover([0.0, 1.0], 0.1)
        assert [v for interval in cover.intervals for v in interval] == pytest.approx(
            [-0.1, 0.1, 0.9, 1.1]
        )
        assert cover.index_of(1.0) == 1

    def test_single_point(self):
        """Test spectrum {0}."""
        cover = build_cover([0.0], 0.3)
        assert cover.intervals[0] == pytest.approx((-0.3, 0.3))
        assert cover.midpoints == pytest.approx((0.0,))

    def test_overlap_cut_at_gap_midpoint(self):
        """Test that overlapping intervals meet between their clusters."""
        cover = build_cover([0.0, 0.15, 0.25], 0.1)
        assert len(cover.intervals) == 2
        assert cover.intervals[0][1] == pytest.approx(0.1625)
        assert cover.intervals[1][0] == pytest.approx(0.1625)
        assert cover.index_of(0.15) == 0
        assert cover.index_of(0.25) == 1
        for lo, hi in cover.intervals:
            assert hi - lo <= 0.2 + 1e-12

    def test_rejects_bad_input(self):
        """Test non-positive eps, empty spectra and uncovered values."""
        with pytest.raises(ValidationError):
            build_cover([0.0], 0.0)
        with pytest.raises(ValidationError):
            build_cover([], 0.1)
        with pytest.raises(ValidationError):
            build_cover([0.0], 0.1).index_of(0.5)

    @settings(max_examples=60, deadline=None)
    @given(integers(min_value=0, max_value=2**32 - 1), floats(min_value=1e-3, max_value=0.5))
    def test_every_point_in_exactly_one_interval(self, seed, eps):
        """Test that no spectrum point sits on a shared endpoint and intervals stay short."""
        rng = make_rng(seed)
        points = rng.uniform(-1.0, 1.0, size=int(rng.integers(1, 12)))
        cover = build_cover(points, eps)
        for point in points:
            assert sum(lo <= point <= hi for lo, hi in cover.intervals) == 1
        for (lo, hi), midpoint in zip(cover.intervals, cover.midpoints):
            assert hi - lo <= 2 * eps * (1 + 1e-12)
            assert midpoint == pytest.approx((lo + hi) / 2)
        for (_, hi), (lo, _) in zip(cover.intervals, cover.intervals[1:]):
            assert hi <= lo

    def test_interval_cover_validation(self):
        """Test that overlapping intervals are rejected."""
        with pytest.raises(ValidationError):
            IntervalCover(intervals=((0.0, 0.2), (0.1, 0.3)), midpoints=(0.1, 0.2), half_width=0.1)
