"""Bigraded homology of a grid differential as a module over F[U].

The minus complex splits along diagonals M - 2A, which U preserves. On one
diagonal the chain group at doubled Alexander level a is spanned by the
states with A2 >= a (a state x stands for U^k x with A2(x) - 2k = a), and
U is the inclusion of one level into the next. Homology is therefore the
persistence module of the Alexander filtration: a bar that never dies is a
free tower, a bar of length k is a torsion summand F[U]/U^k.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from src.grids.diagram import GridDiagram
from src.grids.errors import GridError
from src.homology.complex import GradedDifferential, build_differential, halve
from src.homology.linalg import ColumnReduction, indices_from_bits, reduce_columns
from src.utils.config_loader import RunConfig

logger = logging.getLogger(__name__)

Q, T = sympy.symbols("q t")


class UnsupportedFlavorError(GridError):
    """The filtered flavor is not homogeneous and has no bigraded homology."""


class NonNilpotentError(GridError):
    """Homology requested of a differential whose square is not zero."""


class NoFreePartError(GridError):
    """No non-torsion class exists."""


@dataclass(frozen=True)
class Chain:
    """Homogeneous chain: the states, each carrying the U power its grading forces."""

    maslov: int
    alexander2: int
    states: Tuple[int, ...]

    @property
    def alexander(self):
        return halve(self.alexander2)

    def u_powers(self, differential: GradedDifferential) -> Dict[int, int]:
        return {s: (int(differential.alexander2[s]) - self.alexander2) // 2 for s in self.states}

    def to_dict(self) -> Dict[str, Any]:
        return {"m": self.maslov, "a": self.alexander, "states": list(self.states)}


@dataclass(frozen=True)
class Bar:
    """Interval of the Alexander filtration on one diagonal; ``death`` is None for a free tower."""

    birth: int
    death: Optional[int]
    chain: Chain

    @property
    def order(self) -> Optional[int]:
        return None if self.death is None else (self.birth - self.death) // 2

    def alive_at(self, alexander2: int) -> bool:
        return alexander2 <= self.birth and (self.death is None or alexander2 > self.death)


@dataclass
class BigradedModule:
    """Homology as a bigraded F[U]-module.

    Attributes:
        flavor: Flavor of the differential it came from
        bars: One bar per summand; tilde summands all have order 1
        min_alexander2: Lowest doubled Alexander grading of any state;
            slices below it are copies of the ones at it
        boundary_basis: Reduced boundaries per chain group, each with the
            level at which it becomes a boundary
        slices: (Maslov, doubled Alexander) -> dimension, down to min_alexander2
    """

    flavor: str
    bars: List[Bar]
    min_alexander2: int
    boundary_basis: Dict[Tuple[int, int], List[Tuple[int, Tuple[int, ...]]]] = field(default_factory=dict)
    slices: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.slices:
            self.slices = _slice_dimensions(self.bars, self.min_alexander2)

    @property
    def free_generators(self) -> List[Chain]:
        return [bar.chain for bar in self.bars if bar.death is None]

    @property
    def free_rank(self) -> int:
        return len(self.free_generators)

    @property
    def torsion(self) -> List[Tuple[Chain, int]]:
        return [(bar.chain, bar.order) for bar in self.bars if bar.death is not None]

    def dimension(self, maslov: int, alexander2: int) -> int:
        return self.slices.get((maslov, alexander2), 0)

    def u_map(self, maslov: int, alexander2: int) -> np.ndarray:
        """Matrix of U from H_{m,a} to H_{m-2,a-1} in the bar bases of the two slices."""
        if self.flavor == "tilde":
            return np.zeros((self.dimension(maslov - 2, alexander2 - 2), self.dimension(maslov, alexander2)), np.uint8)
        source = self._alive(maslov, alexander2)
        target = self._alive(maslov - 2, alexander2 - 2)
        matrix = np.zeros((len(target), len(source)), dtype=np.uint8)
        for j, index in enumerate(source):
            if index in target:
                matrix[target.index(index), j] = 1
        return matrix

    def boundaries(self, maslov: int, alexander2: int) -> List[Tuple[int, ...]]:
        """A basis of the boundaries in bigrading (m, a), as state sets."""
        key = (alexander2, maslov) if self.flavor == "tilde" else (0, maslov - alexander2)
        return [states for level, states in self.boundary_basis.get(key, []) if level >= alexander2]

    def torsion_cycles(self, maslov: int, alexander2: int) -> List[Tuple[int, ...]]:
        """Representatives of the torsion summands that are non-zero in bigrading (m, a)."""
        return [self.bars[i].chain.states for i in self._alive(maslov, alexander2) if self.bars[i].death is not None]

    def _alive(self, maslov: int, alexander2: int) -> List[int]:
        return [
            i
            for i, bar in enumerate(self.bars)
            if bar.chain.maslov - bar.chain.alexander2 == maslov - alexander2 and bar.alive_at(alexander2)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "flavor": self.flavor,
            "slices": [{"m": m, "a": halve(a2), "dim": dim} for (m, a2), dim in sorted(self.slices.items())],
            "free": [{"m": c.maslov, "a": c.alexander} for c in self.free_generators],
            "torsion": [{"m": c.maslov, "a": c.alexander, "order": order} for c, order in self.torsion],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _slice_dimensions(bars: Sequence[Bar], min_alexander2: int) -> Dict[Tuple[int, int], int]:
    slices: Dict[Tuple[int, int], int] = {}
    for bar in bars:
        diagonal = bar.chain.maslov - bar.chain.alexander2
        floor = min_alexander2 - 2 if bar.death is None else bar.death
        for level in range(bar.birth, floor, -2):
            key = (diagonal + level, level)
            slices[key] = slices.get(key, 0) + 1
    return dict(sorted(slices.items()))


def _group_states(differential: GradedDifferential) -> Tuple[Dict[Tuple[int, int], List[int]], np.ndarray]:
    """Chain groups and each state's position in its group, in filtration order.

    Tilde groups are single bigradings (a2, m); the other flavors group by
    diagonal (0, m - a2). Within a group states run by decreasing Alexander
    grading, then by index.
    """
    maslov, alexander2 = differential.maslov, differential.alexander2
    count = len(maslov)
    if differential.flavor == "tilde":
        first, second = alexander2, maslov
    else:
        first, second = np.zeros(count, dtype=np.int64), maslov - alexander2

    groups: Dict[Tuple[int, int], List[int]] = {}
    position = np.zeros(count, dtype=np.int64)
    for state in np.lexsort((np.arange(count), -alexander2)).tolist():
        key = (int(first[state]), int(second[state]))
        members = groups.setdefault(key, [])
        position[state] = len(members)
        members.append(state)
    return groups, position


def _boundary_columns(
    differential: GradedDifferential, groups: Dict[Tuple[int, int], List[int]], position: np.ndarray
) -> Dict[Tuple[int, int], List[int]]:
    columns = {key: [0] * len(members) for key, members in groups.items()}
    keys = {state: key for key, members in groups.items() for state in members}
    for source, target, _ in differential.arrows():
        columns[keys[source]][position[source]] ^= 1 << int(position[target])
    return columns


def bigraded_homology(differential: GradedDifferential, config: Optional[RunConfig] = None) -> BigradedModule:
    """Homology of a tilde, minus or horizontal differential.

    Raises:
        UnsupportedFlavorError: For the filtered flavor
        NonNilpotentError: For a horizontal differential whose square is not zero
    """
    config = config or RunConfig()
    if differential.flavor == "filtered":
        raise UnsupportedFlavorError(
            "The filtered differential is not Alexander-homogeneous", differential.grid.compact()
        )
    if differential.flavor == "horizontal" and not differential.square_is_zero():
        raise NonNilpotentError("The horizontal differential does not square to zero", differential.grid.compact())

    groups, position = _group_states(differential)
    columns = _boundary_columns(differential, groups, position)
    keys = sorted(groups)
    with ThreadPoolExecutor(max_workers=config.resolved_threads()) as pool:
        reductions = dict(zip(keys, pool.map(lambda key: reduce_columns(columns[key], pivot="highest"), keys)))

    bars, boundary_basis = _collect_bars(differential, groups, reductions)
    module = BigradedModule(differential.flavor, bars, int(differential.alexander2.min()), boundary_basis)
    logger.info(
        f"{differential.flavor} homology of {differential.grid.compact()}: "
        f"free rank {module.free_rank}, {len(module.torsion)} torsion summands"
    )
    return module


def _collect_bars(
    differential: GradedDifferential,
    groups: Dict[Tuple[int, int], List[int]],
    reductions: Dict[Tuple[int, int], ColumnReduction],
) -> Tuple[List[Bar], Dict[Tuple[int, int], List[Tuple[int, Tuple[int, ...]]]]]:
    """Bars of every group, and the reduced boundaries each group receives with the level they enter at."""
    maslov, alexander2 = differential.maslov, differential.alexander2
    tilde = differential.flavor == "tilde"

    def chain(states: Sequence[int], level: int) -> Chain:
        lead = states[0]
        return Chain(int(maslov[lead]) - (int(alexander2[lead]) - level), level, tuple(sorted(states)))

    bars: List[Bar] = []
    boundary_basis: Dict[Tuple[int, int], List[Tuple[int, Tuple[int, ...]]]] = {}
    for key in sorted(groups):
        members = groups[key]
        below = groups.get((key[0], key[1] - 1), [])
        above = reductions.get((key[0], key[1] + 1))
        reduction = reductions[key]

        for low, column in sorted(reduction.pivots.items()):
            birth = int(alexander2[below[low]])
            death = int(alexander2[members[column]])
            states = [below[i] for i in indices_from_bits(reduction.reduced[column])]
            boundary_basis.setdefault((key[0], key[1] - 1), []).append((death, tuple(sorted(states))))
            if birth != death:
                bars.append(Bar(birth, death, chain(states, birth)))

        killed = set(above.pivots) if above else set()
        for column in reduction.zero_columns():
            if column in killed:
                continue
            states = [members[i] for i in indices_from_bits(reduction.transforms[column])]
            birth = int(alexander2[members[column]])
            bars.append(Bar(birth, birth - 2 if tilde else None, chain(states, birth)))

    bars.sort(key=lambda bar: (-bar.birth, bar.chain.maslov, bar.chain.states))
    return bars, boundary_basis


def homology_of(grid: GridDiagram, flavor: str = "minus", config: Optional[RunConfig] = None) -> BigradedModule:
    return bigraded_homology(build_differential(grid, flavor, config), config)


def max_nontorsion_alexander(module: BigradedModule) -> Tuple[Any, Chain]:
    """Largest Alexander grading of a free generator, with its representative.

    Ties go to the generator of lowest Maslov grading, then lowest states.
    """
    generators = module.free_generators
    if not generators:
        raise NoFreePartError(f"The {module.flavor} homology has no free part")
    best = min(generators, key=lambda c: (-c.alexander2, c.maslov, c.states))
    return halve(best.alexander2), best


def boundary_of(differential: GradedDifferential, chain: Chain) -> Tuple[int, ...]:
    """States appearing an odd number of times in the boundary of a chain."""
    mask = np.isin(differential.sources, np.asarray(chain.states, dtype=np.int64))
    targets, counts = np.unique(differential.targets[mask], return_counts=True)
    return tuple(int(t) for t in targets[counts % 2 == 1])


def is_cycle(differential: GradedDifferential, chain: Chain) -> bool:
    return not boundary_of(differential, chain)


def poincare_polynomial(module: BigradedModule) -> sympy.Expr:
    """Sum of dim * q^m * t^a over the slices of tilde homology."""
    if module.flavor != "tilde":
        raise UnsupportedFlavorError(f"Poincare polynomials are taken of tilde homology, not {module.flavor}")
    return sympy.expand(
        sum(
            (dim * Q**m * T ** sympy.Rational(a2, 2) for (m, a2), dim in module.slices.items()),
            sympy.Integer(0),
        )
    )
