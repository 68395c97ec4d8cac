"""Deterministic GF(2) linear algebra on bit-packed columns.

Columns are Python integers used as bitsets (bit i is row i), which keeps
XOR of long sparse columns cheap. All routines run one left-to-right
column reduction: a column is reduced against earlier pivots keyed by its
lowest set row, the earliest column winning a row, so the result depends
only on the matrix, never on the order entries were inserted or on
threading. Persistence over a filtration keys pivots by the highest row
instead.
"""

from dataclasses import dataclass, field
from functools import cached_property
import logging
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.grids.errors import GridError

logger = logging.getLogger(__name__)

PIVOT_RULES = ("lowest", "highest")


class DimensionMismatchError(GridError):
    """A vector's length does not match the matrix."""


def bits_from_array(vector: np.ndarray) -> int:
    """Pack a boolean vector into an integer bitset (bit i = vector[i])."""
    packed = np.packbits(np.asarray(vector, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def array_from_bits(bits: int, length: int) -> np.ndarray:
    raw = bits.to_bytes((length + 7) // 8 or 1, "little")
    unpacked = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return unpacked[:length].astype(bool)


def bits_from_indices(indices: Iterable[int]) -> int:
    bits = 0
    for index in indices:
        bits ^= 1 << index
    return bits


def indices_from_bits(bits: int) -> List[int]:
    indices = []
    while bits:
        low = bits & -bits
        indices.append(low.bit_length() - 1)
        bits ^= low
    return indices


@dataclass
class ColumnReduction:
    """Result of reducing the columns of a matrix left to right.

    Attributes:
        reduced: Reduced columns; non-zero ones have distinct pivot rows
        transforms: transforms[j] is the set of original columns summing to reduced[j]
        pivots: Pivot row of each non-zero reduced column -> its column
        pivot: Which set row keys a column, "lowest" or "highest"
    """

    reduced: List[int]
    transforms: List[int]
    pivots: Dict[int, int]
    pivot: str = "lowest"

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def zero_columns(self) -> List[int]:
        return [j for j, column in enumerate(self.reduced) if not column]

    def reduce_vector(self, vector: int) -> Tuple[int, int]:
        """Reduce a vector against the pivots.

        Returns:
            Tuple of (residue, combination): residue is zero exactly when the
            vector lies in the column span, and then the original columns in
            ``combination`` sum to it.
        """
        combination = 0
        while vector:
            column = self.pivots.get(_pivot_row(vector, self.pivot))
            if column is None:
                break
            vector ^= self.reduced[column]
            combination ^= self.transforms[column]
        return vector, combination


def _pivot_row(column: int, pivot: str) -> int:
    if pivot == "highest":
        return column.bit_length() - 1
    return (column & -column).bit_length() - 1


def reduce_columns(columns: Sequence[int], pivot: str = "lowest") -> ColumnReduction:
    """Left-to-right column reduction over GF(2).

    ``pivot="highest"`` is the persistence reduction of a filtered complex
    whose rows are ordered by filtration level.
    """
    if pivot not in PIVOT_RULES:
        raise ValueError(f"Unknown pivot rule {pivot!r}; expected one of {PIVOT_RULES}")
    reduced: List[int] = []
    transforms: List[int] = []
    pivots: Dict[int, int] = {}
    for j, column in enumerate(columns):
        transform = 1 << j
        while column:
            row = _pivot_row(column, pivot)
            k = pivots.get(row)
            if k is None:
                pivots[row] = j
                break
            column ^= reduced[k]
            transform ^= transforms[k]
        reduced.append(column)
        transforms.append(transform)
    return ColumnReduction(reduced, transforms, pivots, pivot)


@dataclass(frozen=True)
class MembershipResult:
    in_span: bool
    witness: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SparseBitMatrix:
    """Matrix over GF(2) given by the positions of its ones."""

    rows: int
    cols: int
    entries: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        for row, col in self.entries:
            if not (0 <= row < self.rows and 0 <= col < self.cols):
                raise DimensionMismatchError(f"Entry ({row}, {col}) outside {self.rows}x{self.cols}")

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "SparseBitMatrix":
        dense = np.asarray(dense, dtype=bool)
        rows, cols = np.nonzero(dense)
        return cls(dense.shape[0], dense.shape[1], frozenset(zip(rows.tolist(), cols.tolist())))

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[int]) -> "SparseBitMatrix":
        entries = frozenset((row, col) for col, bits in enumerate(columns) for row in indices_from_bits(bits))
        return cls(rows, len(columns), entries)

    @cached_property
    def columns(self) -> Tuple[int, ...]:
        columns = [0] * self.cols
        for row, col in self.entries:
            columns[col] ^= 1 << row
        return tuple(columns)

    @cached_property
    def reduction(self) -> ColumnReduction:
        logger.debug(f"Reducing {self.rows}x{self.cols} matrix with {len(self.entries)} entries")
        return reduce_columns(self.columns)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.rows, self.cols), dtype=bool)
        for row, col in self.entries:
            dense[row, col] = True
        return dense

    def multiply_bits(self, vector: int) -> int:
        result = 0
        for col in indices_from_bits(vector):
            result ^= self.columns[col]
        return result

    def multiply(self, vector: np.ndarray) -> np.ndarray:
        if len(vector) != self.cols:
            raise DimensionMismatchError(f"Vector of length {len(vector)} for {self.cols} columns")
        return array_from_bits(self.multiply_bits(bits_from_array(vector)), self.rows)

    def compose(self, other: "SparseBitMatrix") -> "SparseBitMatrix":
        """The product self @ other."""
        if other.rows != self.cols:
            raise DimensionMismatchError(f"Cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        return SparseBitMatrix.from_columns(self.rows, [self.multiply_bits(c) for c in other.columns])

    def is_zero(self) -> bool:
        return not self.entries


def rank(matrix: SparseBitMatrix) -> int:
    return matrix.reduction.rank


def kernel_basis(matrix: SparseBitMatrix) -> List[np.ndarray]:
    """Null space basis, one vector per column that reduces to zero."""
    reduction = matrix.reduction
    return [array_from_bits(reduction.transforms[j], matrix.cols) for j in reduction.zero_columns()]


def solve_membership(matrix: SparseBitMatrix, vector: np.ndarray) -> MembershipResult:
    """Decide whether ``vector`` is in the column span and give a witness w with M w = vector."""
    if len(vector) != matrix.rows:
        raise DimensionMismatchError(f"Vector of length {len(vector)} for {matrix.rows} rows")
    residue, combination = matrix.reduction.reduce_vector(bits_from_array(vector))
    if residue:
        return MembershipResult(False)
    return MembershipResult(True, array_from_bits(combination, matrix.cols))


def span_contains(columns: Sequence[int], vector: int) -> bool:
    """Whether a bitset lies in the span of bitset columns."""
    residue, _ = reduce_columns(columns).reduce_vector(vector)
    return residue == 0
