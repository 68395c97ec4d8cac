import itertools
import os
import sys

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.grids.constructions import mirror_reverse, torus_grid, unknot_grid
from src.homology.complex import (
    GridStates,
    Gradings,
    TooLargeError,
    arrow_dump,
    build_differential,
    check_size,
    gradings,
    grid_states,
    halve,
    rectangles,
)
from src.utils.config_loader import RunConfig

SAMPLE_GRIDS = [unknot_grid(2), unknot_grid(3), torus_grid(2, 3), mirror_reverse(torus_grid(2, 3))[0]]


class TestStates:
    """State enumeration tests."""

    def test_lexicographic_order(self):
        """Test states are numbered in lexicographic order."""
        states = GridStates(3)
        assert len(states) == 6
        assert states.state_of(0) == (0, 1, 2)
        assert states.state_of(4) == (2, 0, 1)
        assert states.index_of((2, 0, 1)) == 4

    def test_unknown_state(self):
        """Test a non-permutation has no index."""
        with pytest.raises(ValueError):
            GridStates(3).index_of((0, 0, 1))

    def test_size_guard(self):
        """Test the configured and hard index limits."""
        with pytest.raises(TooLargeError):
            grid_states(unknot_grid(9))
        check_size(unknot_grid(9), RunConfig(allow_large=True))
        with pytest.raises(TooLargeError):
            check_size(unknot_grid(11), RunConfig(allow_large=True))
        with pytest.raises(TooLargeError):
            check_size(unknot_grid(5), RunConfig(max_grid_index=4))


class TestGradings:
    """Maslov and Alexander grading tests."""

    def test_unknot_gradings(self):
        """Test both states of the 2x2 unknot."""
        grid = unknot_grid(2)
        assert gradings(grid, (0, 1)) == Gradings(maslov_O=-1, maslov_X=0, alexander2=-2)
        assert gradings(grid, (1, 0)) == Gradings(maslov_O=0, maslov_X=-1, alexander2=0)
        assert gradings(grid, (1, 0)).alexander == 0
        assert gradings(grid, (0, 1)).maslov == -1

    def test_halve(self):
        """Test doubled gradings are reported as integers or half-integers."""
        assert halve(-2) == -1
        assert isinstance(halve(4), int)
        assert halve(-1) == -0.5


class TestRectangles:
    """Rectangle enumeration tests."""

    def test_two_rectangles_per_transposition(self):
        """Test every transposition gives two rectangles with complementary spans."""
        grid = torus_grid(2, 3)
        for x in itertools.permutations(range(5)):
            for a, b in itertools.combinations(range(5), 2):
                y = list(x)
                y[a], y[b] = y[b], y[a]
                found = rectangles(grid, x, y)
                assert len(found) == 2
                assert found[0].width + found[1].width == 5
                assert found[0].height + found[1].height == 5

    def test_no_rectangle_between_distant_states(self):
        """Test states differing in three points have no rectangle."""
        assert rectangles(unknot_grid(3), (0, 1, 2), (1, 2, 0)) == []
        assert rectangles(unknot_grid(3), (0, 1, 2), (0, 1, 2)) == []

    def test_unknot_rectangles(self):
        """Test both rectangles of the 2x2 unknot contain one marking each."""
        found = rectangles(unknot_grid(2), (0, 1), (1, 0))
        assert [(r.o_mult, r.x_mult, r.empty) for r in found] == [(1, 0, True), (1, 0, True)]


class TestDifferentials:
    """Differential assembly tests."""

    @pytest.mark.parametrize("grid", SAMPLE_GRIDS, ids=str)
    @pytest.mark.parametrize("flavor", ["tilde", "minus", "filtered", "horizontal"])
    def test_square_is_zero(self, grid, flavor):
        """Test the differential squares to zero."""
        assert build_differential(grid, flavor).square_is_zero()

    @pytest.mark.parametrize("grid", SAMPLE_GRIDS, ids=str)
    def test_minus_grading_law(self, grid):
        """Test arrows x -> U^k y have M(y) = M(x) - 1 + 2k and A(y) = A(x) + k."""
        d = build_differential(grid, "minus")
        assert (d.maslov[d.targets] == d.maslov[d.sources] - 1 + 2 * d.powers).all()
        assert (d.alexander2[d.targets] == d.alexander2[d.sources] + 2 * d.powers).all()

    @pytest.mark.parametrize("grid", SAMPLE_GRIDS, ids=str)
    def test_tilde_grading_law(self, grid):
        """Test tilde arrows lower Maslov by one and keep Alexander."""
        d = build_differential(grid, "tilde")
        assert (d.powers == 0).all()
        assert (d.maslov[d.targets] == d.maslov[d.sources] - 1).all()
        assert (d.alexander2[d.targets] == d.alexander2[d.sources]).all()

    def test_filtered_maslov_law(self):
        """Test filtered arrows are Maslov homogeneous."""
        d = build_differential(torus_grid(2, 3), "filtered")
        assert (d.maslov[d.targets] == d.maslov[d.sources] - 1 + 2 * d.powers).all()

    @pytest.mark.parametrize("grid", SAMPLE_GRIDS, ids=str)
    def test_filtered_alexander_drop(self, grid):
        """Test filtered arrows x -> U^k y put A(y) - k below A(x) by the X count of an empty rectangle."""
        d = build_differential(grid, "filtered")
        for source, target, power in d.arrows():
            drop = int(d.alexander2[source]) + 2 * power - int(d.alexander2[target])
            assert drop >= 0
            found = rectangles(grid, d.states.state_of(source), d.states.state_of(target))
            assert any(r.empty and r.o_mult == power and 2 * r.x_mult == drop for r in found)

    def test_filtered_has_alexander_dropping_arrows(self):
        """Test the trefoil has filtered arrows crossing X markings."""
        d = build_differential(torus_grid(2, 3), "filtered")
        drops = d.alexander2[d.sources] + 2 * d.powers - d.alexander2[d.targets]
        assert (drops > 0).any()
        assert (drops % 2 == 0).all()

    @pytest.mark.parametrize("grid", SAMPLE_GRIDS, ids=str)
    def test_horizontal_arrows_are_minus_arrows(self, grid):
        """Test the horizontal flavor keeps every X-free arrow, with or without U."""
        horizontal = build_differential(grid, "horizontal")
        minus = build_differential(grid, "minus")
        assert list(horizontal.arrows()) == list(minus.arrows())

    def test_horizontal_trefoil_has_both_kinds(self):
        """Test the trefoil's horizontal arrows include some with and some without U."""
        powers = build_differential(torus_grid(2, 3), "horizontal").powers
        assert (powers == 0).any()
        assert (powers >= 1).any()

    def test_unknot_arrows_cancel(self):
        """Test the two rectangles of the 2x2 unknot cancel in pairs."""
        d = build_differential(unknot_grid(2), "minus")
        assert len(d) == 0
        assert arrow_dump(d) == ""

    def test_thread_count_does_not_change_arrows(self):
        """Test one and four workers assemble identical arrays."""
        grid = torus_grid(2, 3)
        single = build_differential(grid, "minus", RunConfig(threads=1))
        several = build_differential(grid, "minus", RunConfig(threads=4))
        assert np.array_equal(single.sources, several.sources)
        assert np.array_equal(single.targets, several.targets)
        assert np.array_equal(single.powers, several.powers)
        assert arrow_dump(single) == arrow_dump(several)

    def test_arrows_sorted(self):
        """Test arrows are sorted by (source, target, power)."""
        d = build_differential(torus_grid(2, 3), "minus")
        arrows = list(d.arrows())
        assert arrows == sorted(arrows)
        assert len(set(arrows)) == len(arrows)

    def test_restricted(self):
        """Test restricting to no arrows."""
        d = build_differential(torus_grid(2, 3), "minus")
        assert len(d.restricted(np.zeros(len(d), dtype=bool))) == 0

    def test_unknown_flavor(self):
        """Test an unknown flavor name."""
        with pytest.raises(ValueError):
            build_differential(unknot_grid(2), "hat")
