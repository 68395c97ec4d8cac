import json
import os
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.grids.constructions import torus_grid, unknot_grid
from src.grids.diagram import GridDiagram, component_count, validate_grid
from src.grids.errors import (
    GridFormatError,
    IllegalCommutationError,
    NoSuchMarkingError,
    NotAStabilizationBlockError,
)
from src.grids.moves import (
    StabilizationKind,
    StateBijection,
    apply_move,
    apply_script,
    columns_interleave,
    commute_columns,
    commute_rows,
    cyclic_translate,
    destabilize,
    stabilize,
)


class TestStateBijection:
    """State map tests."""

    def test_identity(self):
        """Test the identity fixes every state."""
        identity = StateBijection.identity(3)
        assert identity.apply((2, 0, 1)) == (2, 0, 1)
        assert identity.is_bijective

    def test_then_and_inverse(self):
        """Test a translation followed by its inverse is the identity on states."""
        _, forward = cyclic_translate(torus_grid(2, 3), 2, 3)
        state = (4, 2, 0, 3, 1)
        assert forward.then(forward.inverse()).apply(state) == state
        assert forward.inverse().apply(forward.apply(state)) == state

    def test_injection_has_no_inverse(self):
        """Test a stabilization map cannot be inverted."""
        _, injection = stabilize(unknot_grid(2), 1, StabilizationKind("X", "SW"))
        assert not injection.is_bijective
        with pytest.raises(ValueError):
            injection.inverse()

    def test_composition_checks_indices(self):
        """Test maps of mismatched indices do not compose."""
        with pytest.raises(ValueError):
            StateBijection.identity(2).then(StateBijection.identity(3))


class TestCyclicTranslate:
    """Cyclic translation tests."""

    def test_full_turn_is_identity(self):
        """Test translating by (n, n) returns the same diagram."""
        trefoil = torus_grid(2, 3)
        assert cyclic_translate(trefoil, 5, 5)[0] == trefoil

    def test_translate_unknot(self):
        """Test translating the 2x2 unknot by one column."""
        moved, _ = cyclic_translate(unknot_grid(2), 1, 0)
        assert moved == GridDiagram(2, (2, 1), (1, 2))

    def test_translation_preserves_components(self):
        """Test translations keep the link type's component count."""
        trefoil = torus_grid(2, 3)
        for dx, dy in ((1, 0), (0, 1), (3, 4)):
            assert component_count(cyclic_translate(trefoil, dx, dy)[0]) == 1


class TestCommutation:
    """Column and row commutation tests."""

    def test_interleaving_columns(self):
        """Test adjacent torus columns interleave and cannot commute."""
        trefoil = torus_grid(2, 3)
        assert columns_interleave(trefoil, 0, 1)
        with pytest.raises(IllegalCommutationError):
            commute_columns(trefoil, 1)

    def test_shared_endpoint_commutes(self):
        """Test spans sharing a row are commutable."""
        unknot = unknot_grid(3)
        assert not columns_interleave(unknot, 0, 1)
        commuted = commute_columns(unknot, 1)
        assert commuted == validate_grid([2, 1, 3], [1, 3, 2])
        assert component_count(commuted) == 1

    def test_column_out_of_range(self):
        """Test a column outside 1..n."""
        with pytest.raises(NoSuchMarkingError):
            commute_columns(unknot_grid(3), 4)

    def test_commute_rows(self):
        """Test row commutation equals column commutation of the transpose."""
        unknot = unknot_grid(3)
        commuted = commute_rows(unknot, 1)
        assert commuted.n == 3
        assert component_count(commuted) == 1


class TestStabilization:
    """Stabilization and destabilization tests."""

    def test_kind_parsing(self):
        """Test stabilization kinds parse from 'X:SW' text."""
        assert StabilizationKind.parse("x:sw") == StabilizationKind("X", "SW")
        assert str(StabilizationKind("O", "NE")) == "O:NE"
        assert len(StabilizationKind.all()) == 8
        with pytest.raises(GridFormatError):
            StabilizationKind.parse("Y:SW")

    def test_known_stabilization(self):
        """Test the X:SW stabilization of the 2x2 unknot."""
        stabilized, injection = stabilize(unknot_grid(2), 1, StabilizationKind("X", "SW"))
        assert stabilized == validate_grid([2, 1, 3], [3, 2, 1])
        assert injection.apply((0, 1)) == (0, 2, 1)

    @pytest.mark.parametrize("kind", StabilizationKind.all(), ids=str)
    def test_stabilization_keeps_knot(self, kind):
        """Test every stabilization kind adds one to the index and keeps one component."""
        for grid in (unknot_grid(2), torus_grid(2, 3)):
            stabilized, _ = stabilize(grid, 1, kind)
            assert stabilized.n == grid.n + 1
            assert component_count(stabilized) == 1

    @pytest.mark.parametrize("kind", StabilizationKind.all(), ids=str)
    def test_destabilize_inverts_stabilize(self, kind):
        """Test removing the inserted block recovers the diagram."""
        grid = unknot_grid(2)
        stabilized, _ = stabilize(grid, 1, kind)
        row = (grid.o if kind.marking == "O" else grid.x)[0] + 1
        assert destabilize(stabilized, 1, row) == grid

    def test_destabilize_rejects_non_block(self):
        """Test a block that is not a stabilization."""
        with pytest.raises(NotAStabilizationBlockError):
            destabilize(torus_grid(2, 3), 1, 1)
        with pytest.raises(NotAStabilizationBlockError):
            destabilize(unknot_grid(2), 1, 1)


class TestMoveScripts:
    """JSON move record tests."""

    def test_apply_move_records(self):
        """Test each record kind dispatches to its move."""
        unknot = unknot_grid(2)
        assert apply_move(unknot, {"move": "translate", "dx": 1, "dy": 0}) == cyclic_translate(unknot, 1, 0)[0]
        assert apply_move(unknot, {"move": "stabilize", "column": 1, "kind": "X:SW"}).n == 3
        assert apply_move(unknot_grid(3), {"move": "commute", "column": 1}) == commute_columns(unknot_grid(3), 1)

    def test_script_round_trip(self):
        """Test a stabilization followed by the matching destabilization."""
        script = json.dumps(
            [
                {"move": "stabilize", "column": 1, "kind": "X:SW"},
                {"move": "destabilize", "column": 1, "row": 2},
            ]
        )
        assert apply_script(unknot_grid(2), script) == unknot_grid(2)

    def test_malformed_records(self):
        """Test unknown moves, missing fields and non-array scripts."""
        with pytest.raises(GridFormatError):
            apply_move(unknot_grid(2), {"move": "rotate"})
        with pytest.raises(GridFormatError):
            apply_move(unknot_grid(2), {"move": "commute"})
        with pytest.raises(GridFormatError):
            apply_script(unknot_grid(2), '{"move": "translate"}')
        with pytest.raises(GridFormatError):
            apply_script(unknot_grid(2), "[")
