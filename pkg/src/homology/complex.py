from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations
import logging
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.grids.diagram import GridDiagram, component_count
from src.grids.errors import GridError
from src.utils.config_loader import RunConfig

logger = logging.getLogger(__name__)

FLAVORS = ("tilde", "minus", "filtered", "horizontal")
HARD_GRID_LIMIT = 10


class TooLargeError(GridError):
    """Grid index above the configured guard."""


@dataclass(frozen=True)
class Gradings:
    """Maslov gradings of a state and its Alexander grading stored doubled."""

    maslov_O: int
    maslov_X: int
    alexander2: int

    @property
    def maslov(self) -> int:
        return self.maslov_O

    @property
    def alexander(self) -> float:
        return halve(self.alexander2)


def halve(doubled: int):
    """Report a doubled grading: an int when even, otherwise a half-integer float."""
    return doubled // 2 if doubled % 2 == 0 else doubled / 2


class GridStates:
    """Lexicographic enumeration of the n! grid states of a diagram.

    State ``i`` is the permutation ``perms[i]``; its points are
    (column, perms[i][column]). Lookup goes through a mixed-radix code that
    increases with the lexicographic order.
    """

    def __init__(self, n: int):
        self.n = n
        self.perms = np.array(list(permutations(range(n))), dtype=np.int64).reshape(-1, n)
        self.weights = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
        self.codes = self.perms @ self.weights

    def __len__(self) -> int:
        return len(self.perms)

    def state_of(self, index: int) -> Tuple[int, ...]:
        return tuple(int(v) for v in self.perms[index])

    def index_of(self, state: Sequence[int]) -> int:
        code = int(np.dot(np.asarray(state, dtype=np.int64), self.weights))
        index = int(np.searchsorted(self.codes, code))
        if index >= len(self.codes) or self.codes[index] != code:
            raise ValueError(f"{tuple(state)} is not a grid state of index {self.n}")
        return index

    def indices_of_codes(self, codes: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.codes, codes)


def check_size(grid: GridDiagram, config: Optional[RunConfig] = None) -> None:
    config = config or RunConfig()
    if grid.n > HARD_GRID_LIMIT:
        raise TooLargeError(f"Grid index {grid.n} exceeds the hard limit {HARD_GRID_LIMIT}", grid.compact())
    if grid.n > config.max_grid_index and not config.allow_large:
        raise TooLargeError(
            f"Grid index {grid.n} exceeds max_grid_index={config.max_grid_index}; pass allow_large to override",
            grid.compact(),
        )


def grid_states(grid: GridDiagram, config: Optional[RunConfig] = None) -> GridStates:
    check_size(grid, config)
    return GridStates(grid.n)


def _incidence_tables(rows: Sequence[int], n: int) -> Tuple[np.ndarray, np.ndarray, int]:
    """Tables giving, for a point on lattice line i at height j, the markings NE of it and SW of it."""
    rows = np.asarray(rows)
    columns = np.arange(n)
    heights = np.arange(n)
    # ne[i, j]: markings in columns >= i and rows >= j
    ne = ((columns[None, None, :] >= heights[:, None, None]) & (rows[None, None, :] >= heights[None, :, None])).sum(2)
    # sw[i, j]: markings in columns < i and rows < j
    sw = ((columns[None, None, :] < heights[:, None, None]) & (rows[None, None, :] < heights[None, :, None])).sum(2)
    among = int(sum(1 for c in range(n) for d in range(c + 1, n) if rows[c] < rows[d]))
    return ne, sw, among


def _maslov(perms: np.ndarray, rows: Sequence[int]) -> np.ndarray:
    n = perms.shape[1]
    ne, sw, among = _incidence_tables(rows, n)
    columns = np.arange(n)
    self_pairs = np.zeros(len(perms), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            self_pairs += perms[:, i] < perms[:, j]
    to_markings = ne[columns, perms].sum(axis=1)
    from_markings = sw[columns, perms].sum(axis=1)
    return self_pairs - to_markings - from_markings + among + 1


def grading_arrays(grid: GridDiagram, perms: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(M_O, M_X, doubled A) for every row of ``perms``."""
    maslov_o = _maslov(perms, grid.o)
    maslov_x = _maslov(perms, grid.x)
    alexander2 = maslov_o - maslov_x - (grid.n - component_count(grid))
    return maslov_o, maslov_x, alexander2


def gradings(grid: GridDiagram, state: Sequence[int]) -> Gradings:
    perms = np.asarray([state], dtype=np.int64)
    maslov_o, maslov_x, alexander2 = grading_arrays(grid, perms)
    return Gradings(int(maslov_o[0]), int(maslov_x[0]), int(alexander2[0]))


def _marking_counts(rows: Sequence[int], n: int) -> np.ndarray:
    """counts[left, width, bottom, height]: markings inside that toroidal rectangle."""
    rows = np.asarray(rows)
    columns = np.arange(n)
    starts = np.arange(n)[:, None, None]
    spans = np.arange(n + 1)[None, :, None]
    in_columns = ((columns[None, None, :] - starts) % n < spans).astype(np.int64)
    in_rows = ((rows[None, None, :] - starts) % n < spans).astype(np.int64)
    return np.einsum("lwc,bhc->lwbh", in_columns, in_rows)


@dataclass(frozen=True)
class Rectangle:
    """Rectangle on the torus with lower-left lattice corner ``sw`` and upper-right ``ne``."""

    sw: Tuple[int, int]
    ne: Tuple[int, int]
    width: int
    height: int
    o_mult: int
    x_mult: int
    empty: bool


def rectangles(grid: GridDiagram, x: Sequence[int], y: Sequence[int]) -> List[Rectangle]:
    """Both rectangles from x to y, or nothing unless they differ in exactly two points."""
    n = grid.n
    moved = [i for i in range(n) if x[i] != y[i]]
    if len(moved) != 2:
        return []
    a, b = moved
    if not (y[a] == x[b] and y[b] == x[a]):
        return []

    o_counts = _marking_counts(grid.o, n)
    x_counts = _marking_counts(grid.x, n)
    found = []
    for left, right in ((a, b), (b, a)):
        width = (right - left) % n
        bottom = x[left]
        height = (x[right] - bottom) % n
        interior = [(left + step) % n for step in range(1, width)]
        empty = not any(0 < (x[i] - bottom) % n < height for i in interior)
        found.append(
            Rectangle(
                sw=(left, bottom),
                ne=(right, x[right]),
                width=width,
                height=height,
                o_mult=int(o_counts[left, width, bottom, height]),
                x_mult=int(x_counts[left, width, bottom, height]),
                empty=empty,
            )
        )
    return found


def _keep(flavor: str, o_mult: np.ndarray, x_mult: np.ndarray) -> np.ndarray:
    if flavor == "tilde":
        return (o_mult == 0) & (x_mult == 0)
    # horizontal keeps the k = 0 arrows too; without them the square is not zero
    if flavor in ("minus", "horizontal"):
        return x_mult == 0
    return np.ones_like(o_mult, dtype=bool)


def _chunk_arrows(
    grid: GridDiagram,
    states: GridStates,
    flavor: str,
    start: int,
    stop: int,
    o_counts: np.ndarray,
    x_counts: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Empty rectangles out of the states in [start, stop), for one flavor."""
    n = grid.n
    perms = states.perms[start:stop]
    codes = states.codes[start:stop]
    sources_index = np.arange(start, stop, dtype=np.int64)
    sources, targets, powers = [], [], []

    for a in range(n):
        for b in range(a + 1, n):
            swapped = codes + (perms[:, b] - perms[:, a]) * (states.weights[a] - states.weights[b])
            target_index = states.indices_of_codes(swapped)
            for left, right in ((a, b), (b, a)):
                width = (right - left) % n
                bottom = perms[:, left]
                height = (perms[:, right] - bottom) % n
                empty = np.ones(len(perms), dtype=bool)
                for step in range(1, width):
                    offset = (perms[:, (left + step) % n] - bottom) % n
                    empty &= ~((offset > 0) & (offset < height))
                o_mult = o_counts[left, width, bottom, height]
                x_mult = x_counts[left, width, bottom, height]
                keep = empty & _keep(flavor, o_mult, x_mult)
                sources.append(sources_index[keep])
                targets.append(target_index[keep])
                powers.append(o_mult[keep] if flavor != "tilde" else np.zeros(int(keep.sum()), dtype=np.int64))

    return np.concatenate(sources), np.concatenate(targets), np.concatenate(powers).astype(np.int64)


def _cancel_pairs(
    sources: np.ndarray, targets: np.ndarray, powers: np.ndarray, count: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Drop arrows occurring an even number of times; result sorted by (source, target, power)."""
    if len(sources) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    span = int(powers.max()) + 1
    keys = (sources * count + targets) * span + powers
    unique, multiplicity = np.unique(keys, return_counts=True)
    odd = unique[multiplicity % 2 == 1]
    return odd // span // count, odd // span % count, odd % span


@dataclass(frozen=True, eq=False)
class GradedDifferential:
    """Arrows x -> U^k y of one flavor over GF(2), sorted by (source, target, k)."""

    flavor: str
    grid: GridDiagram
    states: GridStates
    maslov: np.ndarray
    alexander2: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    powers: np.ndarray

    def __len__(self) -> int:
        return len(self.sources)

    def arrows(self) -> Iterator[Tuple[int, int, int]]:
        for source, target, power in zip(self.sources.tolist(), self.targets.tolist(), self.powers.tolist()):
            yield source, target, power

    @cached_property
    def slice_index(self) -> Dict[Tuple[int, int], np.ndarray]:
        """Arrow positions grouped by the (Maslov, doubled Alexander) bigrading of their source."""
        groups: Dict[Tuple[int, int], List[int]] = {}
        keys = zip(self.maslov[self.sources].tolist(), self.alexander2[self.sources].tolist())
        for position, key in enumerate(keys):
            groups.setdefault(key, []).append(position)
        return {key: np.asarray(value, dtype=np.int64) for key, value in sorted(groups.items())}

    def restricted(self, keep: np.ndarray) -> "GradedDifferential":
        """The same differential with only the arrows selected by a boolean mask."""
        return GradedDifferential(
            self.flavor,
            self.grid,
            self.states,
            self.maslov,
            self.alexander2,
            self.sources[keep],
            self.targets[keep],
            self.powers[keep],
        )

    def square_is_zero(self) -> bool:
        return len(compose_arrows(self, self)[0]) == 0


def compose_arrows(
    first: GradedDifferential, second: GradedDifferential
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Odd-multiplicity arrows of ``second`` after ``first``, as (source, target, k) arrays."""
    count = len(first.states)
    order = np.argsort(second.sources, kind="stable")
    by_source = second.sources[order]
    starts = np.searchsorted(by_source, first.targets, side="left")
    stops = np.searchsorted(by_source, first.targets, side="right")
    lengths = stops - starts

    repeated = np.repeat(np.arange(len(first.sources)), lengths)
    offsets = np.arange(int(lengths.sum())) - np.repeat(np.cumsum(lengths) - lengths, lengths)
    follow = order[np.repeat(starts, lengths) + offsets]
    return _cancel_pairs(
        first.sources[repeated],
        second.targets[follow],
        first.powers[repeated] + second.powers[follow],
        count,
    )


def build_differential(
    grid: GridDiagram, flavor: str, config: Optional[RunConfig] = None
) -> GradedDifferential:
    """Assemble every arrow of a flavor, in parallel over blocks of source states.

    Blocks are merged in order and sorted, so the result does not depend on
    the number of threads.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"Unknown flavor {flavor!r}; expected one of {FLAVORS}")
    config = config or RunConfig()
    states = grid_states(grid, config)
    maslov_o, _, alexander2 = grading_arrays(grid, states.perms)
    o_counts = _marking_counts(grid.o, grid.n)
    x_counts = _marking_counts(grid.x, grid.n)

    threads = config.resolved_threads()
    bounds = np.linspace(0, len(states), threads + 1, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        chunks = list(
            pool.map(
                lambda span: _chunk_arrows(grid, states, flavor, int(span[0]), int(span[1]), o_counts, x_counts),
                zip(bounds[:-1], bounds[1:]),
            )
        )

    sources, targets, powers = _cancel_pairs(
        np.concatenate([c[0] for c in chunks]),
        np.concatenate([c[1] for c in chunks]),
        np.concatenate([c[2] for c in chunks]),
        len(states),
    )
    logger.debug(f"Built {flavor} differential of {grid.compact()}: {len(sources)} arrows on {len(states)} states")
    return GradedDifferential(flavor, grid, states, maslov_o, alexander2, sources, targets, powers)


def arrow_dump(differential: GradedDifferential) -> str:
    """One arrow per line: source index, target index, U exponent."""
    return "".join(f"{s} {t} {k}\n" for s, t, k in differential.arrows())
