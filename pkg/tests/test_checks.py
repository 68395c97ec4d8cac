from itertools import permutations
import json
from math import factorial
import os
import random
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.grids.constructions import mirror_reverse, random_knot_grid, torus_grid, unknot_grid
from src.grids.diagram import component_count, validate_grid
from src.invariants.checks import (
    SELECTOR_ALIASES,
    SELECTORS,
    CheckCase,
    CheckOutcome,
    VerificationReport,
    additivity_census,
    build_cases,
    resolve_selector,
    run_case,
    select_cases,
    verify_theorems,
)
from src.utils.config_loader import RunConfig


def _raise(config):
    raise ZeroDivisionError("no grid")


def _sweep_diagrams(n):
    """Every knot diagram of index 3 or less, a fixed sample above."""
    if n <= 3:
        rows = list(permutations(range(1, n + 1)))
        grids = [validate_grid(o, x) for o in rows for x in rows if all(a != b for a, b in zip(o, x))]
        return [grid for grid in grids if component_count(grid) == 1]
    rng = random.Random(n)
    sample = {
        4: [unknot_grid(4), torus_grid(3, 1), torus_grid(1, 3)],
        5: [unknot_grid(5), torus_grid(2, 3), torus_grid(3, 2), mirror_reverse(torus_grid(2, 3))[0]],
    }[n]
    return sample + [random_knot_grid(n, rng) for _ in range(2)]


SWEEP_SIZES = [(n, m) for n in range(2, 6) for m in range(2, 6) if n + m <= 7]


class TestCaseRegistry:
    """Case registry tests."""

    def test_names_are_unique(self):
        """Test every case has a distinct name."""
        names = [case.name for case in build_cases()]
        assert len(names) == len(set(names))

    def test_every_selector_has_cases(self):
        """Test each selector matches at least one case."""
        for selector in SELECTORS:
            cases = select_cases(selector)
            assert cases
            assert all(case.selector == selector for case in cases)

    def test_all_selects_everything(self):
        """Test 'all' selects the whole registry."""
        assert len(select_cases("all")) == len(build_cases())

    def test_unknown_selector(self):
        """Test an unknown selector is rejected."""
        with pytest.raises(ValueError, match="Unknown selector"):
            select_cases("braids")

    def test_numbered_aliases(self):
        """Test numbered names select the same cases as the property names."""
        assert set(SELECTOR_ALIASES.values()) <= set(SELECTORS)
        assert resolve_selector("1.2") == "torus"
        assert resolve_selector("lemma3.1") == "additivity"
        assert resolve_selector("mirror") == "mirror"
        assert [case.name for case in select_cases("1.2")] == [case.name for case in select_cases("torus")]
        assert [case.name for case in select_cases("1.1b")] == [case.name for case in select_cases("mirror")]


class TestRunCase:
    """Single case execution tests."""

    def test_pass_and_fail(self):
        """Test equal and unequal (expected, actual) pairs."""
        assert run_case(CheckCase("same", "torus", 2, lambda c: (1, 1)), RunConfig()).status == "pass"
        outcome = run_case(CheckCase("differ", "torus", 2, lambda c: ((1, 2), (1, 3))), RunConfig())
        assert outcome.status == "fail"
        assert (outcome.expected, outcome.actual) == ([1, 2], [1, 3])
        assert not outcome.passed

    def test_skipped_above_budget(self):
        """Test cases above verify_max_n are skipped without running."""
        outcome = run_case(CheckCase("big", "torus", 9, _raise), RunConfig(verify_max_n=6))
        assert outcome.status == "skipped"
        assert outcome.passed
        assert outcome.detail == "needs index 9"

    def test_allow_large_raises_budget(self):
        """Test allow_large lifts max_grid_index but not verify_max_n."""
        case = CheckCase("index-9", "torus", 9, lambda c: (0, 0))
        assert run_case(case, RunConfig(verify_max_n=10)).status == "skipped"
        assert run_case(case, RunConfig(verify_max_n=10, allow_large=True)).status == "pass"

    def test_exception_becomes_error(self):
        """Test a raising case is reported as an error."""
        outcome = run_case(CheckCase("broken", "torus", 2, _raise), RunConfig())
        assert outcome.status == "error"
        assert outcome.detail == "ZeroDivisionError: no grid"
        assert not outcome.passed

    def test_timings_only_when_enabled(self):
        """Test seconds are recorded only with timings on."""
        case = CheckCase("same", "torus", 2, lambda c: (1, 1))
        assert "seconds" not in run_case(case, RunConfig()).to_dict()
        assert run_case(case, RunConfig(timings=True)).seconds is not None


class TestAdditivity:
    """Alexander grading additivity census tests."""

    def test_unknot_pair(self):
        """Test the corrected and disjoint counts cover every pair of states."""
        census = additivity_census(unknot_grid(2), unknot_grid(2))
        assert census.pairs == 4
        assert census.corrected_additive == census.pairs
        assert census.disjoint_additive == census.pairs

    def test_disjoint_union_is_additive(self):
        """Test gradings add on the disjoint union for unequal summands."""
        census = additivity_census(unknot_grid(3), unknot_grid(2))
        assert census.pairs == 12
        assert census.disjoint_additive == 12
        assert set(census.to_dict()) == {"pairs", "corrected_additive", "plain_additive", "disjoint_additive"}

    @pytest.mark.parametrize("n,m", SWEEP_SIZES)
    def test_additivity_sweep(self, n, m):
        """Test additivity on every pair of states of diagram pairs with n + m <= 7."""
        for first in _sweep_diagrams(n):
            for second in _sweep_diagrams(m):
                census = additivity_census(first, second)
                assert census.pairs == factorial(n) * factorial(m)
                assert census.corrected_additive == census.pairs
                assert census.disjoint_additive == census.pairs


class TestVerifyTheorems:
    """Whole-selector verification tests."""

    def test_alexander_selector(self):
        """Test the Alexander cases within index 5 pass and the rest are skipped."""
        report = verify_theorems("alexander", RunConfig(verify_max_n=5))
        assert report.passed
        assert report.counts() == {"pass": 5, "fail": 0, "error": 0, "skipped": 1}

    def test_torus_selector(self):
        """Test torus knot cases within index 5."""
        report = verify_theorems("torus", RunConfig(verify_max_n=5))
        assert report.passed
        passed = {outcome.name for outcome in report.outcomes if outcome.status == "pass"}
        assert {"epsilon-unknot-2", "epsilon-torus(-2,3)", "epsilon-torus(2,3)", "tau-torus(-2,3)"} <= passed

    def test_cable_writhe_cases(self):
        """Test the diagram-only cable cases run under any budget."""
        report = verify_theorems("cable", RunConfig(verify_max_n=2))
        statuses = {outcome.name: outcome.status for outcome in report.outcomes}
        assert statuses["cable-writhe-torus(-2,3)-r3"] == "pass"
        assert statuses["cable-writhe-kinked-unknot-r2"] == "pass"
        assert statuses["cable-epsilon-kinked-unknot-r2"] == "skipped"
        assert statuses["cable-epsilon-torus(-2,3)-r2"] == "skipped"

    def test_alias_keeps_selector_name(self):
        """Test a numbered selector runs its group and is echoed in the report."""
        report = verify_theorems("1.2", RunConfig(verify_max_n=3))
        assert report.selector == "1.2"
        assert report.passed
        assert {outcome.selector for outcome in report.outcomes} == {"torus"}

    def test_report_dict(self):
        """Test the JSON form of a report."""
        report = VerificationReport("torus", 5, [CheckOutcome("a", "torus", 2, "pass", 0, 0)])
        data = json.loads(json.dumps(report.to_dict()))
        assert data["passed"] is True
        assert data["counts"]["pass"] == 1
        assert data["checks"] == [
            {"name": "a", "selector": "torus", "grid_index": 2, "status": "pass", "expected": 0, "actual": 0}
        ]
