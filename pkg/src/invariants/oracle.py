"""Cross-checks that share no code path with the homology pipeline.

Euler characteristics and Alexander polynomials depend on gradings alone.
``brute_force_check`` recomputes tilde homology from scratch with float
geometry and dense elimination. The Poincare relations compare tilde
homology of related diagrams.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from src.grids.constructions import disjoint_union, unknot_grid
from src.grids.diagram import GridDiagram, component_count
from src.grids.errors import GridError, InputIsLinkError
from src.grids.moves import StabilizationKind, stabilize
from src.homology.complex import TooLargeError, build_differential, grading_arrays, grid_states
from src.homology.module import Q, T, bigraded_homology, poincare_polynomial
from src.utils.config_loader import RunConfig

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 5


class NonDivisibleError(GridError):
    """The Euler characteristic is not divisible by the expected power of (1 - t)."""


@dataclass(frozen=True)
class LaurentPoly:
    """Integer Laurent polynomial in t, as (exponent, coefficient) pairs with non-zero coefficients."""

    terms: Tuple[Tuple[Fraction, int], ...] = ()

    @classmethod
    def from_dict(cls, coefficients: Dict[Fraction, int]) -> "LaurentPoly":
        return cls(tuple(sorted((Fraction(e), int(c)) for e, c in coefficients.items() if c)))

    def coefficient(self, exponent) -> int:
        return dict(self.terms).get(Fraction(exponent), 0)

    def evaluate_at_one(self) -> int:
        return sum(c for _, c in self.terms)

    def reflected(self) -> "LaurentPoly":
        """The polynomial in t^-1."""
        return LaurentPoly.from_dict({-e: c for e, c in self.terms})

    def is_symmetric(self) -> bool:
        return self == self.reflected()

    def to_dict(self) -> Dict[str, int]:
        return {str(e): c for e, c in self.terms}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exponent, coefficient in sorted(self.terms, reverse=True):
            monomial = "1" if exponent == 0 else ("t" if exponent == 1 else f"t^{exponent}")
            magnitude = abs(coefficient)
            body = monomial if magnitude == 1 else (f"{magnitude}" if exponent == 0 else f"{magnitude}*{monomial}")
            parts.append(("-" if coefficient < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return text + "".join(f" {sign} {body}" for sign, body in parts[1:])


def graded_euler_characteristic(grid: GridDiagram, config: Optional[RunConfig] = None) -> LaurentPoly:
    """Sum over states of (-1)^M t^A."""
    states = grid_states(grid, config)
    maslov, _, alexander2 = grading_arrays(grid, states.perms)
    signs = np.where(maslov % 2 == 0, 1, -1)
    levels, inverse = np.unique(alexander2, return_inverse=True)
    totals = np.zeros(len(levels), dtype=np.int64)
    np.add.at(totals, inverse, signs)
    return LaurentPoly.from_dict({Fraction(int(a2), 2): int(c) for a2, c in zip(levels, totals)})


def alexander_polynomial(grid: GridDiagram, config: Optional[RunConfig] = None) -> LaurentPoly:
    """Euler characteristic divided by (1 - t)^(n-1), made symmetric with value 1 at t = 1.

    Raises:
        InputIsLinkError: The diagram is a link
        NonDivisibleError: The division leaves a remainder
    """
    if component_count(grid) != 1:
        raise InputIsLinkError("Alexander polynomials are computed for knots", grid.compact())
    chi = graded_euler_characteristic(grid, config)
    lowest = min(e for e, _ in chi.terms)
    numerator = sympy.Poly(sum(c * T ** int(e - lowest) for e, c in chi.terms), T)
    quotient, remainder = sympy.div(numerator, sympy.Poly((T - 1) ** (grid.n - 1), T))
    if not remainder.is_zero:
        raise NonDivisibleError(f"Euler characteristic {chi} leaves remainder {remainder.as_expr()}", grid.compact())

    coefficients = quotient.all_coeffs()[::-1]
    while coefficients and coefficients[-1] == 0:
        coefficients.pop()
    start = next(i for i, c in enumerate(coefficients) if c != 0)
    span = len(coefficients) - 1 - start
    sign = 1 if sum(coefficients) > 0 else -1
    delta = LaurentPoly.from_dict(
        {Fraction(i - start) - Fraction(span, 2): sign * int(c) for i, c in enumerate(coefficients) if c}
    )
    logger.debug(f"Alexander polynomial of {grid.compact()}: {delta}")
    return delta


def _naive_counts(first: Sequence[Tuple[float, float]], second: Sequence[Tuple[float, float]]) -> float:
    """Symmetrised count of pairs with one point strictly south-west of the other."""
    below = sum(1 for a in first for b in second if a[0] < b[0] and a[1] < b[1])
    above = sum(1 for a in second for b in first if a[0] < b[0] and a[1] < b[1])
    return (below + above) / 2


def _naive_maslov(points: Sequence[Tuple[float, float]], markings: Sequence[Tuple[float, float]]) -> int:
    value = _naive_counts(points, points) - 2 * _naive_counts(points, markings) + _naive_counts(markings, markings) + 1
    return int(round(value))


def _inside(value: float, start: float, size: int, n: int) -> bool:
    offset = (value - start) % n
    return 0 < offset < size


def _naive_tilde_targets(grid: GridDiagram, state: Tuple[int, ...]) -> List[Tuple[int, ...]]:
    """States reached from ``state`` by rectangles avoiding both markings and state points."""
    n = grid.n
    markings = [(c + 0.5, r + 0.5) for c, r in enumerate(grid.o)] + [(c + 0.5, r + 0.5) for c, r in enumerate(grid.x)]
    targets = []
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            # rectangle with lower-left corner at (a, state[a]) and upper-right at (b, state[b])
            width = (b - a) % n
            height = (state[b] - state[a]) % n
            if height == 0:
                continue
            blocked = any(
                _inside(c, a, width, n) and _inside(r, state[a], height, n) for c, r in enumerate(state)
            ) or any(_inside(c, a, width, n) and _inside(r, state[a], height, n) for c, r in markings)
            if not blocked:
                target = list(state)
                target[a], target[b] = state[b], state[a]
                targets.append(tuple(target))
    return targets


def _dense_rank(matrix: np.ndarray) -> int:
    matrix = matrix.copy() % 2
    rows, cols = matrix.shape
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if matrix[r, col]), None)
        if pivot is None:
            continue
        matrix[[rank, pivot]] = matrix[[pivot, rank]]
        for r in range(rows):
            if r != rank and matrix[r, col]:
                matrix[r] ^= matrix[rank]
        rank += 1
    return rank


@dataclass
class BruteForceReport:
    grid: str
    matches: bool
    expected: Dict[str, int] = field(default_factory=dict)
    mismatches: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"grid": self.grid, "matches": self.matches, "expected": self.expected, "mismatches": self.mismatches}


def brute_force_check(grid: GridDiagram, config: Optional[RunConfig] = None) -> BruteForceReport:
    """Recompute tilde homology naively and compare every slice with the pipeline.

    Raises:
        TooLargeError: For grid index above 5
    """
    n = grid.n
    if n > BRUTE_FORCE_LIMIT:
        raise TooLargeError(f"Brute force is limited to index {BRUTE_FORCE_LIMIT}", grid.compact())

    l = component_count(grid)
    o_points = [(c + 0.5, r + 0.5) for c, r in enumerate(grid.o)]
    x_points = [(c + 0.5, r + 0.5) for c, r in enumerate(grid.x)]
    states = list(permutations(range(n)))
    index = {state: i for i, state in enumerate(states)}
    grades = []
    for state in states:
        points = [(float(c), float(r)) for c, r in enumerate(state)]
        maslov_o, maslov_x = _naive_maslov(points, o_points), _naive_maslov(points, x_points)
        grades.append((maslov_o, maslov_o - maslov_x - (n - l)))

    matrix = np.zeros((len(states), len(states)), dtype=np.uint8)
    for state in states:
        for target in _naive_tilde_targets(grid, state):
            matrix[index[target], index[state]] ^= 1

    expected: Dict[Tuple[int, int], int] = {}
    for key in sorted(set(grades)):
        m, a2 = key
        here = [i for i, g in enumerate(grades) if g == key]
        into = [i for i, g in enumerate(grades) if g == (m + 1, a2)]
        below = [i for i, g in enumerate(grades) if g == (m - 1, a2)]
        out_rank = _dense_rank(matrix[np.ix_(below, here)]) if below else 0
        in_rank = _dense_rank(matrix[np.ix_(here, into)]) if into else 0
        dim = len(here) - out_rank - in_rank
        if dim:
            expected[key] = dim

    actual = bigraded_homology(build_differential(grid, "tilde", config), config).slices
    mismatches = [
        {"m": m, "a2": a2, "expected": expected.get((m, a2), 0), "actual": actual.get((m, a2), 0)}
        for m, a2 in sorted(set(expected) | set(actual))
        if expected.get((m, a2), 0) != actual.get((m, a2), 0)
    ]
    if mismatches:
        logger.warning(f"Brute force disagrees with the pipeline on {grid.compact()}: {mismatches}")
    return BruteForceReport(
        grid.compact(),
        not mismatches,
        {f"{m},{a2}": dim for (m, a2), dim in expected.items()},
        mismatches,
    )


@dataclass(frozen=True)
class RelationCheck:
    holds: bool
    left: str
    right: str


def _tilde_poincare(grid: GridDiagram, config: Optional[RunConfig]) -> sympy.Expr:
    return poincare_polynomial(bigraded_homology(build_differential(grid, "tilde", config), config))


def split_unknot_relation(grid: GridDiagram, config: Optional[RunConfig] = None) -> RelationCheck:
    """Adding a split unknot multiplies the tilde Poincare polynomial by a fixed factor.

    The factor is P(U u U) / P(U) for the two-by-two unknot U, so the check
    compares P(G u U) P(U) with P(G) P(U u U).
    """
    unknot = unknot_grid(2)
    left = sympy.expand(_tilde_poincare(disjoint_union(unknot, grid), config) * _tilde_poincare(unknot, config))
    right = sympy.expand(_tilde_poincare(grid, config) * _tilde_poincare(disjoint_union(unknot, unknot), config))
    return RelationCheck(sympy.expand(left - right) == 0, str(left), str(right))


def stabilization_relation(
    grid: GridDiagram, column: int, kind: StabilizationKind, config: Optional[RunConfig] = None
) -> RelationCheck:
    """A stabilization multiplies the tilde Poincare polynomial by 1 + q^-1 t^-1."""
    stabilized, _ = stabilize(grid, column, kind)
    left = sympy.expand(_tilde_poincare(stabilized, config))
    right = sympy.expand(_tilde_poincare(grid, config) * (1 + 1 / (Q * T)))
    return RelationCheck(sympy.expand(left - right) == 0, str(left), str(right))
