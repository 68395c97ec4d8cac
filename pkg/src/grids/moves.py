from dataclasses import dataclass
import json
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.grids.diagram import GridDiagram, from_zero_indexed, transpose
from src.grids.errors import (
    GridFormatError,
    IllegalCommutationError,
    NoSuchMarkingError,
    NotAStabilizationBlockError,
)

logger = logging.getLogger(__name__)

CORNERS = {"SW": (0, 0), "SE": (1, 0), "NW": (0, 1), "NE": (1, 1)}


@dataclass(frozen=True)
class StateBijection:
    """Map between grid states induced by a geometric correspondence.

    Lattice column ``i`` of the source goes to ``columns[i]`` of the target
    and lattice row ``j`` to ``rows[j]``. Point-inserting maps (from
    stabilization) also add the fixed ``inserted`` points to every state.
    States are 0-indexed permutations: ``state[i]`` is the row of the point
    on vertical line ``i``.
    """

    source_n: int
    target_n: int
    columns: Tuple[int, ...]
    rows: Tuple[int, ...]
    inserted: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def identity(cls, n: int) -> "StateBijection":
        return cls(n, n, tuple(range(n)), tuple(range(n)))

    @property
    def is_bijective(self) -> bool:
        return self.source_n == self.target_n

    def apply(self, state: Sequence[int]) -> Tuple[int, ...]:
        image = [0] * self.target_n
        for column, row in enumerate(state):
            image[self.columns[column]] = self.rows[row]
        for column, row in self.inserted:
            image[column] = row
        return tuple(image)

    def then(self, other: "StateBijection") -> "StateBijection":
        """This map followed by ``other``."""
        if other.source_n != self.target_n:
            raise ValueError(f"Cannot compose maps into index {self.target_n} and from index {other.source_n}")
        inserted = tuple((other.columns[c], other.rows[r]) for c, r in self.inserted) + other.inserted
        return StateBijection(
            source_n=self.source_n,
            target_n=other.target_n,
            columns=tuple(other.columns[c] for c in self.columns),
            rows=tuple(other.rows[r] for r in self.rows),
            inserted=inserted,
        )

    def inverse(self) -> "StateBijection":
        if not self.is_bijective:
            raise ValueError("A point-inserting map has no inverse")
        return StateBijection(self.target_n, self.source_n, _invert(self.columns), _invert(self.rows))


@dataclass(frozen=True)
class StabilizationKind:
    """Stabilization type: the kind of marking split and the corner label.

    The marking of the other kind sits at the labelled corner of the new
    2x2 block; the two markings of the stabilized kind take the corners
    sharing a side with it.
    """

    marking: str
    corner: str

    @classmethod
    def parse(cls, text: str) -> "StabilizationKind":
        marking, _, corner = text.strip().upper().partition(":")
        if marking not in ("O", "X") or corner not in CORNERS:
            raise GridFormatError(f"Stabilization kind must look like 'X:SW', got {text!r}")
        return cls(marking, corner)

    @classmethod
    def all(cls) -> List["StabilizationKind"]:
        return [cls(marking, corner) for marking in ("O", "X") for corner in ("NE", "NW", "SE", "SW")]

    def __str__(self) -> str:
        return f"{self.marking}:{self.corner}"


def cyclic_translate(grid: GridDiagram, dx: int, dy: int) -> Tuple[GridDiagram, StateBijection]:
    """Re-cut the torus so that lattice point (dx, dy) becomes the origin.

    Every marking and every state point moves by (-dx, -dy) mod n, so
    column dx + 1 of the input becomes column 1 of the output.
    """
    n = grid.n
    o = [(grid.o[(c + dx) % n] - dy) % n for c in range(n)]
    x = [(grid.x[(c + dx) % n] - dy) % n for c in range(n)]
    bijection = StateBijection(
        n, n, tuple((i - dx) % n for i in range(n)), tuple((j - dy) % n for j in range(n))
    )
    return from_zero_indexed(o, x), bijection


def columns_interleave(grid: GridDiagram, left: int, right: int) -> bool:
    """Whether the vertical spans of two columns interleave on the row circle.

    Spans sharing an endpoint do not interleave.
    """
    a = sorted((grid.o[left], grid.x[left]))
    ends = {grid.o[right], grid.x[right]}
    if ends & set(a):
        return False
    inside = sum(1 for row in ends if a[0] < row < a[1])
    return inside == 1


def commute_columns(grid: GridDiagram, column: int) -> GridDiagram:
    """Swap columns ``column`` and ``column + 1`` (1-indexed, mod n)."""
    n = grid.n
    if not 1 <= column <= n:
        raise NoSuchMarkingError(f"Column {column} outside 1..{n}", grid.compact())
    left, right = column - 1, column % n
    if columns_interleave(grid, left, right):
        raise IllegalCommutationError(f"Columns {left + 1} and {right + 1} interleave", grid.compact())

    o, x = list(grid.o), list(grid.x)
    o[left], o[right] = o[right], o[left]
    x[left], x[right] = x[right], x[left]
    logger.debug(f"Commuted columns {left + 1} and {right + 1}")
    return from_zero_indexed(o, x)


def commute_rows(grid: GridDiagram, row: int) -> GridDiagram:
    """Swap rows ``row`` and ``row + 1`` by commuting columns of the transpose."""
    return transpose(commute_columns(transpose(grid), row))


def stabilize(
    grid: GridDiagram, column: int, kind: StabilizationKind
) -> Tuple[GridDiagram, StateBijection]:
    """Split the ``kind.marking`` marking of a column into a 2x2 block.

    A new column and row are inserted after the marked cell. The returned
    map adds the lattice point at the centre of the block to every state.
    """
    n = grid.n
    if not 1 <= column <= n:
        raise NoSuchMarkingError(f"Column {column} outside 1..{n}", grid.compact())
    c = column - 1
    same, other = (grid.o, grid.x) if kind.marking == "O" else (grid.x, grid.o)
    r = same[c]
    partner_row = other[c]
    partner_column = (grid.x_column_of_row() if kind.marking == "O" else grid.o_column_of_row())[r]

    def shift_column(i: int) -> int:
        return i + 1 if i > c else i

    def shift_row(j: int) -> int:
        return j + 1 if j > r else j

    dc, dr = CORNERS[kind.corner]
    corner_column, corner_row = c + dc, r + dr
    free_column, free_row = c + 1 - dc, r + 1 - dr

    same_cells = {}  # column -> row of the stabilized kind
    other_cells = {}
    for i in range(n):
        if i == c:
            continue
        same_cells[shift_column(i)] = shift_row(same[i])
        if i != partner_column:
            other_cells[shift_column(i)] = shift_row(other[i])

    same_cells[corner_column] = free_row
    same_cells[free_column] = corner_row
    other_cells[corner_column] = corner_row
    # partner of the split marking along its column and along its row
    other_cells[free_column] = shift_row(partner_row)
    other_cells[shift_column(partner_column)] = free_row

    new_same = [same_cells[i] for i in range(n + 1)]
    new_other = [other_cells[i] for i in range(n + 1)]
    o, x = (new_same, new_other) if kind.marking == "O" else (new_other, new_same)
    result = from_zero_indexed(o, x)

    injection = StateBijection(
        source_n=n,
        target_n=n + 1,
        columns=tuple(i if i <= c else i + 1 for i in range(n)),
        rows=tuple(j if j <= r else j + 1 for j in range(n)),
        inserted=((c + 1, r + 1),),
    )
    logger.debug(f"Stabilized column {column} with {kind}: {grid.compact()} -> {result.compact()}")
    return result, injection


def destabilize(grid: GridDiagram, column: int, row: int) -> GridDiagram:
    """Remove the 2x2 stabilization block whose lower-left cell is (column, row), 1-indexed."""
    n = grid.n
    if n < 3 or not (1 <= column < n and 1 <= row < n):
        raise NotAStabilizationBlockError(f"No 2x2 block at ({column}, {row})", grid.compact())
    c, r = column - 1, row - 1

    cells = {}
    for i in (c, c + 1):
        for kind, rows in (("O", grid.o), ("X", grid.x)):
            if r <= rows[i] <= r + 1:
                cells[(i - c, rows[i] - r)] = kind
    pattern = _stabilization_pattern(cells)
    if pattern is None:
        raise NotAStabilizationBlockError(f"Block at ({column}, {row}) is not a stabilization", grid.compact())
    kind, (dc, dr) = pattern
    corner_column, corner_row = c + dc, r + dr
    free_column, free_row = c + 1 - dc, r + 1 - dr

    same, other = (grid.o, grid.x) if kind == "O" else (grid.x, grid.o)
    other_column = grid.o_column_of_row() if kind == "X" else grid.x_column_of_row()
    row_partner_column = other_column[free_row]

    def merge_column(i: int) -> int:
        return i - 1 if i > c else i

    def merge_row(j: int) -> int:
        return j - 1 if j > r else j

    same_cells = {c: r}
    other_cells = {c: merge_row(other[free_column])}
    for i in range(n):
        if i in (c, c + 1):
            continue
        same_cells[merge_column(i)] = merge_row(same[i])
        other_cells[merge_column(i)] = r if i == row_partner_column else merge_row(other[i])

    new_same = [same_cells[i] for i in range(n - 1)]
    new_other = [other_cells[i] for i in range(n - 1)]
    o, x = (new_same, new_other) if kind == "O" else (new_other, new_same)
    return from_zero_indexed(o, x)


def _stabilization_pattern(cells: Dict[Tuple[int, int], str]) -> Optional[Tuple[str, Tuple[int, int]]]:
    """Return (stabilized kind, corner of the other kind) for a 3-marking block."""
    if len(cells) != 3:
        return None
    for corner, kind in cells.items():
        same_kind = "X" if kind == "O" else "O"
        neighbours = [(1 - corner[0], corner[1]), (corner[0], 1 - corner[1])]
        if all(cells.get(cell) == same_kind for cell in neighbours):
            return same_kind, corner
    return None


def apply_move(grid: GridDiagram, record: Dict[str, Any]) -> GridDiagram:
    """Apply one JSON move record such as {"move": "translate", "dx": 1, "dy": 0}."""
    move = record.get("move")
    try:
        if move == "translate":
            return cyclic_translate(grid, int(record.get("dx", 0)), int(record.get("dy", 0)))[0]
        if move == "commute":
            return commute_columns(grid, int(record["column"]))
        if move == "commute-row":
            return commute_rows(grid, int(record["row"]))
        if move == "stabilize":
            return stabilize(grid, int(record["column"]), StabilizationKind.parse(record["kind"]))[0]
        if move == "destabilize":
            return destabilize(grid, int(record["column"]), int(record["row"]))
    except (KeyError, TypeError, ValueError) as e:
        raise GridFormatError(f"Malformed move record {record}: {e}") from e
    raise GridFormatError(f"Unknown move {move!r}")


def apply_script(grid: GridDiagram, script: str) -> GridDiagram:
    """Apply a JSON array of move records in order."""
    try:
        records = json.loads(script)
    except json.JSONDecodeError as e:
        raise GridFormatError(f"Malformed move script: {e}") from e
    if not isinstance(records, list):
        raise GridFormatError("A move script must be a JSON array")

    for record in records:
        grid = apply_move(grid, record)
    logger.info(f"Applied {len(records)} moves")
    return grid


def _invert(permutation: Sequence[int]) -> Tuple[int, ...]:
    inverse = [0] * len(permutation)
    for index, value in enumerate(permutation):
        inverse[value] = index
    return tuple(inverse)
