"""Registry of verification cases for the concordance properties.

Each case computes an (expected, actual) pair; it passes when they are
equal. Cases needing homology of a grid larger than the configured budget
are reported as skipped.
"""

from dataclasses import dataclass, field
import logging
import random
import time
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.grids.constructions import (
    BraidWord,
    braid_to_grid,
    cable_grid,
    connected_sum,
    connected_sum_parts,
    disjoint_union,
    kinked_unknot_grid,
    mirror_reverse,
    random_grid,
    random_knot_grid,
    torus_grid,
    unknot_grid,
)
from src.grids.diagram import GridDiagram, writhe
from src.grids.moves import StabilizationKind, columns_interleave, commute_columns, cyclic_translate, stabilize
from src.homology.complex import HARD_GRID_LIMIT, GridStates, grading_arrays
from src.invariants.concordance import epsilon, tau
from src.invariants.oracle import alexander_polynomial, brute_force_check, split_unknot_relation, stabilization_relation
from src.utils.config_loader import RunConfig

logger = logging.getLogger(__name__)

SELECTORS = (
    "mirror",
    "equal-sum",
    "unknot-sum",
    "sum-with-mirror",
    "torus",
    "cable",
    "braid",
    "additivity",
    "split-unknot",
    "moves",
    "alexander",
    "brute-force",
)

# numbered names for the property groups, accepted wherever a selector is
SELECTOR_ALIASES = {
    "1.1a": "sum-with-mirror",
    "1.1b": "mirror",
    "1.1c": "equal-sum",
    "1.1d": "unknot-sum",
    "1.2": "torus",
    "1.3": "cable",
    "1.5": "braid",
    "lemma3.1": "additivity",
    "lemma3.3": "split-unknot",
}


@dataclass(frozen=True)
class CheckCase:
    """One verification case.

    Attributes:
        name: Unique case name
        selector: Property group the case belongs to
        grid_index: Largest grid index the case computes on; 0 for pure diagram arithmetic
        run: Computes (expected, actual) under a configuration
    """

    name: str
    selector: str
    grid_index: int
    run: Callable[[RunConfig], Tuple[Any, Any]]


@dataclass
class CheckOutcome:
    name: str
    selector: str
    grid_index: int
    status: str
    expected: Any = None
    actual: Any = None
    detail: str = ""
    seconds: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "skipped")

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "selector": self.selector,
            "grid_index": self.grid_index,
            "status": self.status,
            "expected": self.expected,
            "actual": self.actual,
        }
        if self.detail:
            data["detail"] = self.detail
        if self.seconds is not None:
            data["seconds"] = round(self.seconds, 3)
        return data


@dataclass
class VerificationReport:
    selector: str
    max_n: int
    outcomes: List[CheckOutcome] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(outcome.passed for outcome in self.outcomes)

    def counts(self) -> Dict[str, int]:
        counts = {"pass": 0, "fail": 0, "error": 0, "skipped": 0}
        for outcome in self.outcomes:
            counts[outcome.status] += 1
        return counts

    def to_dict(self) -> Dict[str, Any]:
        return {
            "selector": self.selector,
            "max_n": self.max_n,
            "passed": self.passed,
            "counts": self.counts(),
            "checks": [outcome.to_dict() for outcome in self.outcomes],
        }


def _eps(grid: GridDiagram, config: RunConfig) -> int:
    return epsilon(grid, config=config).value


def _mirror(grid: GridDiagram) -> GridDiagram:
    return mirror_reverse(grid)[0]


def _strict_commutation(grid: GridDiagram) -> Optional[GridDiagram]:
    """Commute the first adjacent pair of columns whose spans are disjoint or nested without sharing a row."""
    for column in range(1, grid.n + 1):
        left, right = column - 1, column % grid.n
        if {grid.o[left], grid.x[left]} & {grid.o[right], grid.x[right]}:
            continue
        if not columns_interleave(grid, left, right):
            return commute_columns(grid, column)
    return None


def _commutable_knot(rng: random.Random, n: int) -> Tuple[GridDiagram, GridDiagram]:
    while True:
        grid = random_knot_grid(n, rng)
        commuted = _strict_commutation(grid)
        if commuted is not None:
            return grid, commuted


@dataclass(frozen=True)
class AdditivityCensus:
    """Alexander gradings of union states against those of their parts, over all state pairs."""

    pairs: int
    corrected_additive: int
    plain_additive: int
    disjoint_additive: int

    def to_dict(self) -> Dict[str, int]:
        return {
            "pairs": self.pairs,
            "corrected_additive": self.corrected_additive,
            "plain_additive": self.plain_additive,
            "disjoint_additive": self.disjoint_additive,
        }


def additivity_census(first: GridDiagram, second: GridDiagram) -> AdditivityCensus:
    """Compare A(x1 u x2) with A(x1) + A(x2) on the connected sum and the disjoint union.

    On the connected sum the union state loses one unit exactly when the
    point of x1 on the first column of the translated first summand lies
    above that column's O marking; on the disjoint union the gradings add.
    """
    first_placed, second_placed, summed = connected_sum_parts(first, second)
    union = disjoint_union(first_placed, second_placed)
    first_states, second_states = GridStates(first.n), GridStates(second.n)
    first_a2 = grading_arrays(first_placed, first_states.perms)[2]
    second_a2 = grading_arrays(second_placed, second_states.perms)[2]

    count_first, count_second = len(first_states), len(second_states)
    upper = np.repeat(first_states.perms, count_second, axis=0) + second.n
    lower = np.tile(second_states.perms, (count_first, 1))
    combined = np.hstack([lower, upper])
    plain = np.repeat(first_a2, count_second) + np.tile(second_a2, count_first)
    correction = 2 * (np.repeat(first_states.perms[:, 0], count_second) > first_placed.o[0])

    summed_a2 = grading_arrays(summed, combined)[2]
    union_a2 = grading_arrays(union, combined)[2]
    return AdditivityCensus(
        pairs=len(combined),
        corrected_additive=int((summed_a2 == plain - correction).sum()),
        plain_additive=int((summed_a2 == plain).sum()),
        disjoint_additive=int((union_a2 == plain).sum()),
    )


def _torus_cases() -> List[CheckCase]:
    cases = [CheckCase("epsilon-unknot-2", "torus", 2, lambda c: (0, _eps(unknot_grid(2), c)))]
    for p in (2, 3, 4):
        cases.append(CheckCase(f"epsilon-torus(-{p},1)", "torus", p + 1, lambda c, p=p: (0, _eps(torus_grid(p, 1), c))))
    for p, q in ((2, 3), (2, 5), (3, 4)):
        cases.append(CheckCase(f"epsilon-torus(-{p},{q})", "torus", p + q, lambda c, p=p, q=q: (-1, _eps(torus_grid(p, q), c))))
        cases.append(
            CheckCase(
                f"epsilon-torus({p},{q})", "torus", p + q, lambda c, p=p, q=q: (1, _eps(_mirror(torus_grid(p, q)), c))
            )
        )
    cases.append(CheckCase("tau-torus(-2,3)", "torus", 5, lambda c: (-1, tau(torus_grid(2, 3), c))))
    cases.append(CheckCase("tau-torus(2,3)", "torus", 5, lambda c: (1, tau(_mirror(torus_grid(2, 3)), c))))
    return cases


def _mirror_cases() -> List[CheckCase]:
    cases = []
    for p, q in ((2, 1), (3, 1), (4, 1), (2, 3), (2, 5), (3, 4)):
        cases.append(
            CheckCase(
                f"mirror-torus(-{p},{q})",
                "mirror",
                p + q,
                lambda c, p=p, q=q: (-_eps(torus_grid(p, q), c), _eps(_mirror(torus_grid(p, q)), c)),
            )
        )
    return cases


def _sum_cases() -> List[CheckCase]:
    def equal_sum(first: GridDiagram, second: GridDiagram, config: RunConfig) -> Tuple[Any, Any]:
        value = _eps(first, config)
        if _eps(second, config) != value:
            return "equal summands", "different summands"
        return value, _eps(connected_sum(first, second), config)

    cases = []
    for a, b in ((2, 2), (2, 3), (3, 3), (4, 2)):
        cases.append(
            CheckCase(
                f"equal-sum-unknot{a}#unknot{b}",
                "equal-sum",
                a + b,
                lambda c, a=a, b=b: equal_sum(unknot_grid(a), unknot_grid(b), c),
            )
        )

    trefoil = torus_grid(2, 3)
    cases.append(CheckCase("unknot-sum-torus(-2,3)", "unknot-sum", 7, lambda c: (-1, _eps(connected_sum(unknot_grid(2), trefoil), c))))
    cases.append(
        CheckCase("unknot-sum-torus(2,3)", "unknot-sum", 7, lambda c: (1, _eps(connected_sum(unknot_grid(2), _mirror(trefoil)), c)))
    )

    for name, grid in (("unknot2", unknot_grid(2)), ("unknot3", unknot_grid(3)), ("torus(-2,3)", trefoil)):
        cases.append(
            CheckCase(
                f"sum-with-mirror-{name}",
                "sum-with-mirror",
                2 * grid.n,
                lambda c, grid=grid: (0, _eps(connected_sum(grid, _mirror(grid)), c)),
            )
        )
    return cases


def _cable_cases() -> List[CheckCase]:
    cases = []
    for p, q in ((2, 1), (2, 3)):
        for r in (2, 3):
            cases.append(
                CheckCase(
                    f"cable-writhe-torus(-{p},{q})-r{r}",
                    "cable",
                    0,
                    lambda c, p=p, q=q, r=r: (
                        r * r * writhe(torus_grid(p, q)) - (r - 1),
                        writhe(cable_grid(torus_grid(p, q), r)),
                    ),
                )
            )
    cases.append(
        CheckCase(
            "cable-writhe-kinked-unknot-r2", "cable", 0, lambda c: (-5, writhe(cable_grid(kinked_unknot_grid(-1), 2)))
        )
    )
    # the writhe-framed 2-cable of this unknot diagram is again an unknot
    cases.append(
        CheckCase(
            "cable-epsilon-torus(-2,1)-r2",
            "cable",
            6,
            lambda c: (_eps(torus_grid(2, 1), c), _eps(cable_grid(torus_grid(2, 1), 2), c)),
        )
    )
    # a negative kink frames the 2-cable as the (2, -3) torus knot
    cases.append(
        CheckCase(
            "cable-epsilon-kinked-unknot-r2",
            "cable",
            6,
            lambda c: (_eps(torus_grid(2, 3), c), _eps(cable_grid(kinked_unknot_grid(-1), 2), c)),
        )
    )
    cases.append(
        CheckCase(
            "cable-epsilon-torus(-2,3)-r2",
            "cable",
            10,
            lambda c: (_eps(torus_grid(2, 3), c), _eps(cable_grid(torus_grid(2, 3), 2), c)),
        )
    )
    return cases


def _braid_cases() -> List[CheckCase]:
    positive = BraidWord(2, (1, 1, 1))
    return [
        CheckCase("epsilon-positive-braid-[1,1,1]", "braid", 5, lambda c: (1, _eps(braid_to_grid(positive), c))),
        CheckCase(
            "epsilon-mirror-positive-braid-[1,1,1]", "braid", 5, lambda c: (-1, _eps(_mirror(braid_to_grid(positive)), c))
        ),
        CheckCase(
            "epsilon-positive-braid-[1,2,1,1,2,2]",
            "braid",
            10,
            lambda c: (1, _eps(braid_to_grid(BraidWord(3, (1, 2, 1, 1, 2, 2))), c)),
        ),
    ]


def _additivity_cases() -> List[CheckCase]:
    def run(first: GridDiagram, second: GridDiagram) -> Tuple[Any, Any]:
        census = additivity_census(first, second)
        logger.info(f"Additivity {first.compact()} # {second.compact()}: {census.to_dict()}")
        return (census.pairs, census.pairs), (census.corrected_additive, census.disjoint_additive)

    pairs = (
        ("unknot2", unknot_grid(2), "unknot2", unknot_grid(2)),
        ("unknot2", unknot_grid(2), "unknot3", unknot_grid(3)),
        ("unknot3", unknot_grid(3), "unknot3", unknot_grid(3)),
        ("torus(-2,3)", torus_grid(2, 3), "unknot2", unknot_grid(2)),
        ("unknot2", unknot_grid(2), "torus(2,3)", _mirror(torus_grid(2, 3))),
    )
    return [
        CheckCase(
            f"additivity-{a}#{b}", "additivity", first.n + second.n, lambda c, first=first, second=second: run(first, second)
        )
        for a, first, b, second in pairs
    ]


def _split_unknot_cases() -> List[CheckCase]:
    return [
        CheckCase(
            f"split-unknot-{name}",
            "split-unknot",
            grid.n + 2,
            lambda c, grid=grid: (True, split_unknot_relation(grid, c).holds),
        )
        for name, grid in (("unknot2", unknot_grid(2)), ("unknot3", unknot_grid(3)), ("torus(-2,3)", torus_grid(2, 3)))
    ]


def _move_cases() -> List[CheckCase]:
    def invariants(grid: GridDiagram, config: RunConfig) -> Tuple[int, int]:
        return tau(grid, config), _eps(grid, config)

    def compare(grid: GridDiagram, moved: GridDiagram, config: RunConfig) -> Tuple[Any, Any]:
        return invariants(grid, config), invariants(moved, config)

    trefoil = torus_grid(2, 3)
    cases = []
    for kind in StabilizationKind.all():
        cases.append(
            CheckCase(
                f"stabilize-unknot2-{kind}",
                "moves",
                3,
                lambda c, kind=kind: compare(unknot_grid(2), stabilize(unknot_grid(2), 1, kind)[0], c),
            )
        )
    for kind in (StabilizationKind("O", "NW"), StabilizationKind("X", "SE")):
        cases.append(
            CheckCase(
                f"stabilize-torus(-2,3)-{kind}",
                "moves",
                6,
                lambda c, kind=kind: compare(trefoil, stabilize(trefoil, 1, kind)[0], c),
            )
        )
    cases.append(CheckCase("translate-torus(-2,3)", "moves", 5, lambda c: compare(trefoil, cyclic_translate(trefoil, 1, 2)[0], c)))
    cases.append(
        CheckCase("commute-random-5", "moves", 5, lambda c: compare(*_commutable_knot(random.Random(c.seed), 5), c))
    )
    for name, grid in (("unknot2", unknot_grid(2)), ("torus(-2,3)", trefoil)):
        cases.append(
            CheckCase(
                f"stabilization-poincare-{name}",
                "moves",
                grid.n + 1,
                lambda c, grid=grid: (True, stabilization_relation(grid, 1, StabilizationKind("X", "SW"), c).holds),
            )
        )
    return cases


def _alexander_cases() -> List[CheckCase]:
    trefoil = "t - 1 + t^-1"
    presentations = (
        ("torus(-2,3)", 5, lambda: torus_grid(2, 3)),
        ("stabilized-torus(-2,3)", 6, lambda: stabilize(torus_grid(2, 3), 2, StabilizationKind("O", "SW"))[0]),
        ("braid-[1,1,1]", 5, lambda: braid_to_grid(BraidWord(2, (1, 1, 1)))),
    )
    cases = [
        CheckCase(f"alexander-{name}", "alexander", n, lambda c, build=build: (trefoil, str(alexander_polynomial(build(), c))))
        for name, n, build in presentations
    ]
    cases.extend(
        CheckCase(f"alexander-unknot{n}", "alexander", n, lambda c, n=n: ("1", str(alexander_polynomial(unknot_grid(n), c))))
        for n in (2, 3, 4)
    )
    return cases


def _brute_force_cases() -> List[CheckCase]:
    def random_batch(config: RunConfig) -> Tuple[Any, Any]:
        rng = random.Random(config.seed)
        grids = [random_grid(4, rng) for _ in range(20)]
        mismatched = [g.compact() for g in grids if not brute_force_check(g, config).matches]
        return [], mismatched

    cases = [
        CheckCase(f"brute-force-{name}", "brute-force", grid.n, lambda c, grid=grid: (True, brute_force_check(grid, c).matches))
        for name, grid in (("unknot2", unknot_grid(2)), ("torus(-2,1)", torus_grid(2, 1)), ("torus(-2,3)", torus_grid(2, 3)))
    ]
    cases.append(CheckCase("brute-force-random-4", "brute-force", 4, random_batch))
    return cases


def build_cases() -> List[CheckCase]:
    """Every registered case, in report order."""
    return (
        _mirror_cases()
        + _sum_cases()
        + _torus_cases()
        + _cable_cases()
        + _braid_cases()
        + _additivity_cases()
        + _split_unknot_cases()
        + _move_cases()
        + _alexander_cases()
        + _brute_force_cases()
    )


def resolve_selector(selector: str) -> str:
    """The property group a selector or one of its aliases names, or "all"."""
    group = SELECTOR_ALIASES.get(selector, selector)
    if group != "all" and group not in SELECTORS:
        raise ValueError(
            f"Unknown selector {selector!r}; expected 'all', one of {', '.join(SELECTORS)} "
            f"or an alias in {', '.join(SELECTOR_ALIASES)}"
        )
    return group


def select_cases(selector: str) -> List[CheckCase]:
    group = resolve_selector(selector)
    return [case for case in build_cases() if group in ("all", case.selector)]


def run_case(case: CheckCase, config: RunConfig) -> CheckOutcome:
    """Run one case, turning exceptions into an error outcome."""
    limit = min(config.verify_max_n, HARD_GRID_LIMIT if config.allow_large else config.max_grid_index)
    if case.grid_index > limit:
        return CheckOutcome(case.name, case.selector, case.grid_index, "skipped", detail=f"needs index {case.grid_index}")

    start = time.perf_counter()
    try:
        expected, actual = case.run(config)
    except Exception as e:
        logger.error(f"Check {case.name} raised {type(e).__name__}: {e}")
        outcome = CheckOutcome(case.name, case.selector, case.grid_index, "error", detail=f"{type(e).__name__}: {e}")
    else:
        status = "pass" if expected == actual else "fail"
        outcome = CheckOutcome(case.name, case.selector, case.grid_index, status, _plain(expected), _plain(actual))
    if config.timings:
        outcome.seconds = time.perf_counter() - start
    logger.debug(f"Check {case.name}: {outcome.status}")
    return outcome


def _plain(value: Any) -> Any:
    """JSON-friendly form of a check value."""
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def verify_theorems(selector: str = "all", config: Optional[RunConfig] = None) -> VerificationReport:
    config = config or RunConfig()
    report = VerificationReport(selector, config.verify_max_n)
    for case in select_cases(selector):
        report.outcomes.append(run_case(case, config))
    counts = report.counts()
    logger.info(
        f"Verification '{selector}' (max n {config.verify_max_n}): {counts['pass']} passed, "
        f"{counts['fail']} failed, {counts['error']} errors, {counts['skipped']} skipped"
    )
    return report
