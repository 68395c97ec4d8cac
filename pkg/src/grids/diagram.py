from collections import Counter
from dataclasses import asdict, dataclass
import json
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.grids.errors import (
    DoubleMarkingError,
    GridFormatError,
    NotAPermutationError,
    TooSmallError,
)

logger = logging.getLogger(__name__)

MARKING_KINDS = ("O", "X")
CORNER_TYPES = ("NE", "NW", "SE", "SW")


@dataclass(frozen=True)
class GridDiagram:
    """An n x n toroidal grid with one O and one X in every row and column.

    Attributes:
        n: Grid index
        sigma_O: sigma_O[i - 1] is the row (1..n) of the O in column i
        sigma_X: sigma_X[i - 1] is the row (1..n) of the X in column i

    Columns are numbered left to right and rows bottom to top. The
    0-indexed views ``o`` and ``x`` are what the algorithms use.
    """

    n: int
    sigma_O: Tuple[int, ...]
    sigma_X: Tuple[int, ...]

    @property
    def o(self) -> Tuple[int, ...]:
        return tuple(r - 1 for r in self.sigma_O)

    @property
    def x(self) -> Tuple[int, ...]:
        return tuple(r - 1 for r in self.sigma_X)

    def o_column_of_row(self) -> Tuple[int, ...]:
        """0-indexed column of the O in each row."""
        return _inverse(self.o)

    def x_column_of_row(self) -> Tuple[int, ...]:
        """0-indexed column of the X in each row."""
        return _inverse(self.x)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["sigma_O"] = list(self.sigma_O)
        data["sigma_X"] = list(self.sigma_X)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, json_str: str) -> "GridDiagram":
        return parse_grid(json_str)

    def compact(self) -> str:
        return serialize_compact(self)

    def __str__(self) -> str:
        return self.compact()


@dataclass(frozen=True)
class CornerCensus:
    """Counts of markings by kind and corner type.

    The corner type of a marking is the corner of the L formed by its two
    segments: a marking whose segments leave towards north and east sits
    at the south-west corner of that L.
    """

    counts: Tuple[Tuple[str, int], ...]

    @classmethod
    def from_counter(cls, counter: Counter) -> "CornerCensus":
        return cls(tuple(sorted((key, value) for key, value in counter.items() if value)))

    def get(self, kind: str, corner: str) -> int:
        return dict(self.counts).get(f"{kind.lower()}_{corner}", 0)

    def total(self, kind: str) -> int:
        return sum(self.get(kind, corner) for corner in CORNER_TYPES)

    def to_dict(self) -> Dict[str, int]:
        return dict(self.counts)

    def __add__(self, other: "CornerCensus") -> "CornerCensus":
        return CornerCensus.from_counter(Counter(self.to_dict()) + Counter(other.to_dict()))


def validate_grid(sigma_O: Sequence[int], sigma_X: Sequence[int]) -> GridDiagram:
    """Validate two 1-indexed marking permutations and build a diagram.

    Raises:
        TooSmallError: Sequences shorter than 2 or of unequal length
        NotAPermutationError: A repeated or out-of-range row
        DoubleMarkingError: An O and an X share a cell
    """
    n = len(sigma_O)
    if n != len(sigma_X):
        raise TooSmallError(f"Marking sequences differ in length: {n} and {len(sigma_X)}")
    if n < 2:
        raise TooSmallError(f"Grid index must be at least 2, got {n}")

    error = _permutation_error("sigma_O", sigma_O, n) or _permutation_error("sigma_X", sigma_X, n)
    if error:
        raise NotAPermutationError(error)

    for column, (o_row, x_row) in enumerate(zip(sigma_O, sigma_X), start=1):
        if o_row == x_row:
            raise DoubleMarkingError(f"Column {column} carries both markings in row {o_row}")

    return GridDiagram(n=n, sigma_O=tuple(int(r) for r in sigma_O), sigma_X=tuple(int(r) for r in sigma_X))


def _permutation_error(name: str, values: Sequence[int], n: int) -> Optional[str]:
    for value in values:
        if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= n:
            return f"{name} entry {value!r} is outside 1..{n}"
    repeated = sorted(value for value, count in Counter(values).items() if count > 1)
    if repeated:
        return f"{name} repeats {repeated}"
    return None


def from_zero_indexed(o: Sequence[int], x: Sequence[int]) -> GridDiagram:
    return validate_grid([r + 1 for r in o], [r + 1 for r in x])


def serialize_grid(grid: GridDiagram) -> str:
    return grid.to_json()


def parse_grid(text: str) -> GridDiagram:
    """Parse the JSON grid format {"n": ..., "sigma_O": [...], "sigma_X": [...]}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise GridFormatError(f"Malformed grid JSON: {e}") from e

    if not isinstance(data, dict) or not {"sigma_O", "sigma_X"} <= set(data):
        raise GridFormatError("Grid JSON needs the keys 'sigma_O' and 'sigma_X'")
    sigma_O, sigma_X = data["sigma_O"], data["sigma_X"]
    if not isinstance(sigma_O, list) or not isinstance(sigma_X, list):
        raise GridFormatError("sigma_O and sigma_X must be lists")

    grid = validate_grid(sigma_O, sigma_X)
    if "n" in data and data["n"] != grid.n:
        raise GridFormatError(f"Declared n={data['n']} but the permutations have length {grid.n}")
    return grid


def serialize_compact(grid: GridDiagram) -> str:
    """Compact text form "n;sigma_O;sigma_X" with comma-separated rows."""
    return f"{grid.n};{','.join(map(str, grid.sigma_O))};{','.join(map(str, grid.sigma_X))}"


def parse_compact(text: str) -> GridDiagram:
    parts = text.strip().split(";")
    if len(parts) != 3:
        raise GridFormatError(f"Compact grid must have three ';'-separated fields: {text!r}")
    try:
        n = int(parts[0])
        sigma_O = [int(v) for v in parts[1].split(",")]
        sigma_X = [int(v) for v in parts[2].split(",")]
    except ValueError as e:
        raise GridFormatError(f"Non-integer entry in compact grid {text!r}") from e

    grid = validate_grid(sigma_O, sigma_X)
    if grid.n != n:
        raise GridFormatError(f"Declared n={n} but the permutations have length {grid.n}")
    return grid


def parse_any(text: str) -> GridDiagram:
    """Parse either the JSON or the compact text form."""
    stripped = text.strip()
    return parse_grid(stripped) if stripped.startswith("{") else parse_compact(stripped)


def component_count(grid: GridDiagram) -> int:
    """Number of cycles of the column successor map sigma_X^-1 o sigma_O."""
    x_column = grid.x_column_of_row()
    successor = [x_column[row] for row in grid.o]

    seen = [False] * grid.n
    cycles = 0
    for start in range(grid.n):
        if seen[start]:
            continue
        cycles += 1
        column = start
        while not seen[column]:
            seen[column] = True
            column = successor[column]
    return cycles


def transpose(grid: GridDiagram) -> GridDiagram:
    """Reflect across the diagonal: the marking in (column c, row r) moves to (r, c)."""
    return from_zero_indexed(_inverse(grid.o), _inverse(grid.x))


def crossings(grid: GridDiagram) -> List[Tuple[int, int, int]]:
    """Crossings of the planar realization as (column, row, sign).

    Vertical segments run X to O and pass over horizontal segments, which
    run O to X. A crossing needs the vertical segment's column strictly
    inside the horizontal span and the row strictly inside the vertical span.
    """
    o, x = grid.o, grid.x
    o_column, x_column = grid.o_column_of_row(), grid.x_column_of_row()

    found = []
    for row in range(grid.n):
        left, right = sorted((o_column[row], x_column[row]))
        h = 1 if x_column[row] > o_column[row] else -1
        for column in range(left + 1, right):
            low, high = sorted((x[column], o[column]))
            if low < row < high:
                v = 1 if o[column] > x[column] else -1
                found.append((column, row, -v * h))
    return found


def writhe(grid: GridDiagram) -> int:
    return sum(sign for _, _, sign in crossings(grid))


def marking_corners(grid: GridDiagram) -> List[Tuple[str, int, int, str]]:
    """Corner type of every marking as (kind, column, row, corner)."""
    o, x = grid.o, grid.x
    o_column, x_column = grid.o_column_of_row(), grid.x_column_of_row()

    corners = []
    for column in range(grid.n):
        o_row, x_row = o[column], x[column]
        corners.append(("O", column, o_row, _corner(x_row > o_row, x_column[o_row] > column)))
        corners.append(("X", column, x_row, _corner(o_row > x_row, o_column[x_row] > column)))
    return corners


def _corner(goes_north: bool, goes_east: bool) -> str:
    return ("S" if goes_north else "N") + ("W" if goes_east else "E")


def corner_census(grid: GridDiagram) -> CornerCensus:
    counter = Counter(f"{kind.lower()}_{corner}" for kind, _, _, corner in marking_corners(grid))
    return CornerCensus.from_counter(counter)


def thurston_bennequin(grid: GridDiagram) -> int:
    """Writhe minus half the number of NW and SE corners.

    Unlike the writhe and the census, this is unchanged by cyclic
    translation of the diagram.
    """
    census = corner_census(grid)
    cusps = sum(census.get(kind, corner) for kind in MARKING_KINDS for corner in ("NW", "SE"))
    return writhe(grid) - cusps // 2


def _inverse(permutation: Sequence[int]) -> Tuple[int, ...]:
    inverse = [0] * len(permutation)
    for index, value in enumerate(permutation):
        inverse[value] = index
    return tuple(inverse)
