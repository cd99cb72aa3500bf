import math

import pytest

from oracle_thrift.schedule import build_grid, default_M


def closed_form_tolerances(grid):
    """Per-boundary tolerance: ceil rounding (< 1) propagated through the recursion."""
    tol = [0.0, 1.0]
    for tau in range(2, grid.M + 1):
        prev_t = grid.closed_form(tau - 1)
        tol.append(1.0 + tol[-1] * grid.eta / (2.0 * math.sqrt(prev_t)))
    return tol


class TestBuildGrid:
    def test_reference_case_t10000_m4(self):
        grid = build_grid(10_000, 4)
        assert grid.eta == pytest.approx(10_000 ** (1 / 1.875))
        assert grid.boundaries[0] == 1
        assert grid.boundaries[1] == math.ceil(grid.eta) == 136
        assert grid.boundaries[-1] == 10_001
        # recursion on rounded boundaries, checked independently
        b = 136
        for tau in range(2, 4):
            b = math.ceil(grid.eta * math.sqrt(b))
            assert grid.boundaries[tau] == b

    def test_two_epoch_closed_form(self):
        for T in (100, 5000, 99_999):
            grid = build_grid(T, 2)
            assert grid.boundaries == (1, math.ceil(T ** (2 / 3)), T + 1)

    def test_small_horizon_collapse(self):
        grid = build_grid(16, 4)
        assert grid.boundaries[0] == 1 and grid.boundaries[-1] == 17
        assert all(a < b for a, b in zip(grid.boundaries, grid.boundaries[1:]))

    @pytest.mark.parametrize("T", [1000, 10_000, 100_000])
    @pytest.mark.parametrize("M", [2, 3, 4, 5, 6])
    def test_partition_and_rounding(self, T, M):
        grid = build_grid(T, M)
        b = grid.boundaries
        assert b[0] == 1 and b[-1] == T + 1
        assert all(x < y for x, y in zip(b, b[1:]))
        # epochs partition [1, T]
        covered = sum(end - start for start, end in grid.epochs())
        assert covered == T
        # each un-clamped boundary is the ceiling of the recursion step
        for tau in range(2, len(b) - 1):
            step = grid.eta * math.sqrt(b[tau - 1])
            if step < T + 1:
                assert 0.0 <= b[tau] - step < 1.0

    def test_unrounded_recursion_closes_at_horizon(self):
        for T in (1000, 10_000, 100_000):
            for M in (2, 4, 6):
                grid = build_grid(T, M)
                assert grid.closed_form(1) == pytest.approx(grid.eta)
                assert grid.closed_form(M) == pytest.approx(T, rel=1e-9)

    def test_boundaries_track_closed_form(self):
        grid = build_grid(10_000, 4)
        tol = closed_form_tolerances(grid)
        for tau in range(1, grid.M):
            assert abs(grid.boundaries[tau] - grid.closed_form(tau)) <= tol[tau] + 1e-9

    def test_epoch_lengths_nondecreasing_at_scale(self):
        # only true up to M=4 at these horizons: the closed form's own tail
        # epochs shrink once the exponent increment 2^-tau saturates
        for T in (10_000, 100_000):
            for M in (2, 3, 4):
                lengths = [end - start for start, end in build_grid(T, M).epochs()]
                assert lengths == sorted(lengths)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            build_grid(3, 2)
        with pytest.raises(ValueError):
            build_grid(100, 1)
        with pytest.raises(ValueError):
            build_grid(16, 5)  # M > log2(T)


class TestDefaultM:
    def test_reference_values(self):
        assert default_M(16) == 3
        assert default_M(10 ** 5) == 6
        assert default_M(10 ** 6) == 6
        assert default_M(10 ** 4) == 5

    def test_floor(self):
        assert default_M(4) == 2
        with pytest.raises(ValueError):
            default_M(3)
