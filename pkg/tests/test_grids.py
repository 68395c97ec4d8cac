import json
import os
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.grids.constructions import mirror_reverse, torus_grid, unknot_grid
from src.grids.diagram import (
    GridDiagram,
    component_count,
    corner_census,
    crossings,
    parse_any,
    parse_compact,
    parse_grid,
    serialize_compact,
    serialize_grid,
    thurston_bennequin,
    transpose,
    validate_grid,
    writhe,
)
from src.grids.errors import (
    DoubleMarkingError,
    GridError,
    GridFormatError,
    NotAPermutationError,
    TooSmallError,
)
from src.grids.moves import cyclic_translate


class TestValidation:
    """Grid validation tests."""

    def test_valid_grid(self):
        """Test a valid 2x2 grid keeps its 1-indexed permutations."""
        grid = validate_grid([1, 2], [2, 1])
        assert grid == GridDiagram(2, (1, 2), (2, 1))
        assert grid.o == (0, 1)
        assert grid.x == (1, 0)

    def test_too_small(self):
        """Test index 1 and mismatched lengths are rejected."""
        with pytest.raises(TooSmallError):
            validate_grid([1], [1])
        with pytest.raises(TooSmallError):
            validate_grid([1, 2], [2, 1, 3])

    def test_not_a_permutation(self):
        """Test repeated and out-of-range rows are rejected."""
        with pytest.raises(NotAPermutationError):
            validate_grid([1, 1], [2, 1])
        with pytest.raises(NotAPermutationError):
            validate_grid([1, 3], [2, 1])

    def test_double_marking(self):
        """Test an O and an X in one cell is rejected."""
        with pytest.raises(DoubleMarkingError):
            validate_grid([1, 2], [1, 2])

    def test_permutation_checked_before_double_marking(self):
        """Test the first failing check is the one raised."""
        with pytest.raises(NotAPermutationError):
            validate_grid([1, 1], [1, 1])

    def test_error_carries_grid(self):
        """Test GridError renders the grid it concerns."""
        error = GridError("broken", "2;1,2;2,1")
        assert str(error) == "broken (grid 2;1,2;2,1)"
        assert error.grid == "2;1,2;2,1"


class TestSerialization:
    """JSON and compact text format tests."""

    def test_json_format(self):
        """Test the JSON form of the 2x2 unknot."""
        data = json.loads(serialize_grid(unknot_grid(2)))
        assert data == {"n": 2, "sigma_O": [1, 2], "sigma_X": [2, 1]}

    def test_parse_json(self):
        """Test parsing JSON with and without n."""
        assert parse_grid('{"n": 2, "sigma_O": [1, 2], "sigma_X": [2, 1]}') == unknot_grid(2)
        assert parse_grid('{"sigma_O": [1, 2], "sigma_X": [2, 1]}') == unknot_grid(2)

    def test_parse_json_errors(self):
        """Test malformed JSON, missing keys and a wrong n."""
        with pytest.raises(GridFormatError):
            parse_grid("{not json")
        with pytest.raises(GridFormatError):
            parse_grid('{"sigma_O": [1, 2]}')
        with pytest.raises(GridFormatError):
            parse_grid('{"n": 3, "sigma_O": [1, 2], "sigma_X": [2, 1]}')

    def test_compact_form(self):
        """Test the compact text form of the trefoil diagram."""
        trefoil = torus_grid(2, 3)
        assert serialize_compact(trefoil) == "5;1,2,3,4,5;3,4,5,1,2"
        assert parse_compact("5;1,2,3,4,5;3,4,5,1,2") == trefoil
        assert str(trefoil) == trefoil.compact()

    def test_compact_errors(self):
        """Test malformed compact text."""
        with pytest.raises(GridFormatError):
            parse_compact("2;1,2")
        with pytest.raises(GridFormatError):
            parse_compact("2;a,b;2,1")
        with pytest.raises(GridFormatError):
            parse_compact("3;1,2;2,1")

    def test_parse_any(self):
        """Test format detection."""
        grid = torus_grid(2, 3)
        assert parse_any(grid.to_json()) == grid
        assert parse_any("  " + grid.compact() + "\n") == grid
        assert GridDiagram.from_json(grid.to_json()) == grid


class TestStatistics:
    """Component count, writhe and corner census tests."""

    def test_component_count(self):
        """Test knots have one component and split unions two."""
        assert component_count(unknot_grid(2)) == 1
        assert component_count(torus_grid(2, 3)) == 1
        assert component_count(validate_grid([1, 2, 3, 4], [2, 1, 4, 3])) == 2

    def test_trefoil_writhe(self):
        """Test the (-2, 3) torus diagram has three negative crossings."""
        trefoil = torus_grid(2, 3)
        assert len(crossings(trefoil)) == 3
        assert writhe(trefoil) == -3

    def test_unknot_writhe(self):
        """Test the standard unknots have no crossings."""
        for n in (2, 3, 4):
            assert writhe(unknot_grid(n)) == 0

    def test_mirror_negates_writhe(self):
        """Test writhe(mirror) = -writhe for several diagrams."""
        for grid in (unknot_grid(3), torus_grid(2, 3), torus_grid(2, 5), torus_grid(3, 4)):
            assert writhe(mirror_reverse(grid)[0]) == -writhe(grid)

    def test_corner_census_of_unknot(self):
        """Test each marking of the 2x2 unknot has its own corner type."""
        census = corner_census(unknot_grid(2))
        assert census.to_dict() == {"o_NE": 1, "o_SW": 1, "x_NW": 1, "x_SE": 1}
        assert census.total("O") == 2
        assert census.total("X") == 2
        assert census.get("O", "NW") == 0

    def test_census_addition(self):
        """Test censuses add entrywise."""
        census = corner_census(unknot_grid(2))
        assert (census + census).get("X", "SE") == 2

    def test_thurston_bennequin(self):
        """Test tb of the 2x2 unknot is -1."""
        assert thurston_bennequin(unknot_grid(2)) == -1

    def test_thurston_bennequin_translation_invariant(self):
        """Test tb is unchanged by every cyclic translation of the trefoil."""
        trefoil = torus_grid(2, 3)
        expected = thurston_bennequin(trefoil)
        for dx in range(5):
            for dy in range(5):
                assert thurston_bennequin(cyclic_translate(trefoil, dx, dy)[0]) == expected

    def test_transpose(self):
        """Test transposing twice is the identity."""
        trefoil = torus_grid(2, 3)
        assert transpose(transpose(trefoil)) == trefoil
        assert transpose(unknot_grid(2)) == unknot_grid(2)
