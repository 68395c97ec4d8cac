from fractions import Fraction
import os
import random
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.grids.constructions import BraidWord, braid_to_grid, mirror_reverse, random_grid, torus_grid, unknot_grid
from src.grids.diagram import validate_grid
from src.grids.errors import InputIsLinkError
from src.grids.moves import StabilizationKind, stabilize
from src.homology.complex import TooLargeError
from src.invariants.oracle import (
    LaurentPoly,
    alexander_polynomial,
    brute_force_check,
    graded_euler_characteristic,
    split_unknot_relation,
    stabilization_relation,
)

TREFOIL = "t - 1 + t^-1"


class TestLaurentPoly:
    """Laurent polynomial tests."""

    def test_formatting(self):
        """Test the text form drops zero terms and orders by degree."""
        assert str(LaurentPoly.from_dict({1: 1, 0: -1, -1: 1, 2: 0})) == TREFOIL
        assert str(LaurentPoly.from_dict({0: 1})) == "1"
        assert str(LaurentPoly.from_dict({})) == "0"
        assert str(LaurentPoly.from_dict({2: -3, 0: 2})) == "-3*t^2 + 2"

    def test_symmetry_and_value(self):
        """Test reflection, symmetry and the value at 1."""
        poly = LaurentPoly.from_dict({1: 1, 0: -1, -1: 1})
        assert poly.is_symmetric()
        assert poly.evaluate_at_one() == 1
        assert not LaurentPoly.from_dict({1: 1, 0: 1}).is_symmetric()
        assert LaurentPoly.from_dict({1: 2}).reflected().coefficient(-1) == 2

    def test_to_dict(self):
        """Test exponents are serialised as strings."""
        assert LaurentPoly.from_dict({Fraction(1, 2): 1}).to_dict() == {"1/2": 1}


class TestEulerCharacteristic:
    """Graded Euler characteristic and Alexander polynomial tests."""

    def test_unknot2_euler_characteristic(self):
        """Test chi of the 2x2 unknot is 1 - t^-1."""
        assert graded_euler_characteristic(unknot_grid(2)) == LaurentPoly.from_dict({0: 1, -1: -1})

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_unknot_alexander(self, n):
        """Test every unknot diagram has Alexander polynomial 1."""
        assert str(alexander_polynomial(unknot_grid(n))) == "1"

    def test_trefoil_presentations(self):
        """Test three presentations of trefoils give t - 1 + t^-1."""
        grids = [
            torus_grid(2, 3),
            stabilize(torus_grid(2, 3), 2, StabilizationKind("O", "SW"))[0],
            braid_to_grid(BraidWord(2, (1, 1, 1))),
        ]
        for grid in grids:
            assert str(alexander_polynomial(grid)) == TREFOIL

    def test_mirror_has_same_polynomial(self):
        """Test the mirror of the trefoil diagram."""
        assert str(alexander_polynomial(mirror_reverse(torus_grid(2, 3))[0])) == TREFOIL

    def test_alexander_is_symmetric(self):
        """Test normalisation for the (-2, 5) torus knot."""
        delta = alexander_polynomial(torus_grid(2, 5))
        assert delta.is_symmetric()
        assert delta.evaluate_at_one() == 1
        assert str(delta) == "t^2 - t + 1 - t^-1 + t^-2"

    def test_link_rejected(self):
        """Test links have no single-variable normalisation here."""
        with pytest.raises(InputIsLinkError):
            alexander_polynomial(validate_grid([1, 2, 3, 4], [2, 1, 4, 3]))


class TestBruteForce:
    """Naive tilde homology cross-check tests."""

    @pytest.mark.parametrize("grid", [unknot_grid(2), unknot_grid(3), torus_grid(2, 3)], ids=str)
    def test_known_grids(self, grid):
        """Test the pipeline agrees with naive homology."""
        report = brute_force_check(grid)
        assert report.matches
        assert report.mismatches == []
        assert sum(report.expected.values()) == sum(report.to_dict()["expected"].values())

    def test_random_grids(self):
        """Test seeded random diagrams of index 4, links included."""
        rng = random.Random(42)
        for _ in range(10):
            assert brute_force_check(random_grid(4, rng)).matches

    def test_size_limit(self):
        """Test brute force refuses index 6."""
        with pytest.raises(TooLargeError):
            brute_force_check(unknot_grid(6))


class TestPoincareRelations:
    """Tilde Poincare polynomial relations."""

    @pytest.mark.parametrize("grid", [unknot_grid(2), unknot_grid(3)], ids=str)
    def test_split_unknot(self, grid):
        """Test adding a split unknot multiplies by a fixed factor."""
        assert split_unknot_relation(grid).holds

    @pytest.mark.parametrize("kind", [StabilizationKind("X", "SW"), StabilizationKind("O", "NE")], ids=str)
    def test_stabilization(self, kind):
        """Test a stabilization multiplies by 1 + q^-1 t^-1."""
        relation = stabilization_relation(unknot_grid(2), 1, kind)
        assert relation.holds
        assert relation.left == relation.right
