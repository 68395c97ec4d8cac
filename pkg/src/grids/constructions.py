from dataclasses import dataclass
from itertools import count
from math import gcd
import logging
import random
from typing import Dict, List, Optional, Sequence, Tuple

from src.grids.diagram import (
    GridDiagram,
    component_count,
    from_zero_indexed,
    marking_corners,
    validate_grid,
)
from src.grids.errors import (
    BadLetterError,
    ClosureIsLinkError,
    GridFormatError,
    InputIsLinkError,
    NoTwistCornerError,
    NotCoprimeError,
    TooSmallError,
)
from src.grids.moves import StateBijection, cyclic_translate

logger = logging.getLogger(__name__)

# corner types tried, in order, for each twist direction
TWIST_CORNERS = {"negative": ("SE", "NW"), "positive": ("SW", "NE")}


@dataclass(frozen=True)
class BraidWord:
    """A braid on ``strands`` strands; letter +i is sigma_i, -i its inverse.

    Strands are numbered top to bottom.
    """

    strands: int
    letters: Tuple[int, ...] = ()

    @classmethod
    def parse(cls, strands: int, text: str) -> "BraidWord":
        """Parse comma-separated signed integers such as "1,2,-1"."""
        text = text.strip()
        try:
            letters = tuple(int(part) for part in text.split(",")) if text else ()
        except ValueError as e:
            raise GridFormatError(f"Braid word must be comma-separated integers: {text!r}") from e
        return cls(strands, letters)

    def permutation(self) -> Tuple[int, ...]:
        """Final position of the strand that starts at each position."""
        at_position = list(range(self.strands))
        for letter in self.letters:
            i = abs(letter) - 1
            at_position[i], at_position[i + 1] = at_position[i + 1], at_position[i]
        final = [0] * self.strands
        for position, strand in enumerate(at_position):
            final[strand] = position
        return tuple(final)


def torus_grid(p: int, q: int) -> GridDiagram:
    """Standard diagram of the (-p, q) torus knot.

    sigma_O is the identity and sigma_X = (p+1, ..., p+q, 1, ..., p).
    Positive torus knots come from mirror_reverse of this diagram.
    """
    if p < 1 or q < 1:
        raise TooSmallError(f"Torus parameters must be positive, got ({p}, {q})")
    if gcd(p, q) != 1:
        raise NotCoprimeError(f"gcd({p}, {q}) = {gcd(p, q)}: the torus diagram is a link")
    n = p + q
    return validate_grid(list(range(1, n + 1)), [(i + p) % n + 1 for i in range(n)])


def unknot_grid(n: int = 2) -> GridDiagram:
    """Unknot of grid index n, the (-(n-1), 1) torus diagram."""
    if n < 2:
        raise TooSmallError(f"Grid index must be at least 2, got {n}")
    return torus_grid(n - 1, 1)


def kinked_unknot_grid(sign: int = -1) -> GridDiagram:
    """Index 3 unknot whose only crossing, in the middle cell, has the given sign."""
    if sign not in (1, -1):
        raise ValueError(f"Kink sign must be 1 or -1, got {sign}")
    if sign < 0:
        return validate_grid([2, 3, 1], [3, 1, 2])
    return validate_grid([2, 1, 3], [1, 3, 2])


def mirror_reverse(grid: GridDiagram) -> Tuple[GridDiagram, StateBijection]:
    """Reflect in a horizontal axis and swap the two kinds of markings.

    Returns the new diagram and the reflection of grid states, which sends
    lattice point (a, b) to (a, -b mod n).
    """
    n = grid.n
    mirrored = validate_grid(
        [n + 1 - row for row in grid.sigma_X],
        [n + 1 - row for row in grid.sigma_O],
    )
    reflection = StateBijection(n, n, tuple(range(n)), tuple((n - b) % n for b in range(n)))
    return mirrored, reflection


def disjoint_union(upper: GridDiagram, lower: GridDiagram) -> GridDiagram:
    """Block diagonal diagram: ``upper`` upper-right, ``lower`` lower-left."""
    m = lower.n
    o = list(lower.o) + [row + m for row in upper.o]
    x = list(lower.x) + [row + m for row in upper.x]
    return from_zero_indexed(o, x)


def connected_sum_parts(first: GridDiagram, second: GridDiagram) -> Tuple[GridDiagram, GridDiagram, GridDiagram]:
    """Translated summands and their connected sum.

    ``first`` is translated so its bottom-row X is in the first column and
    placed upper-right; ``second`` so its top-row X is in the last column and
    placed lower-left. The O markings of the two columns where the blocks
    meet are then swapped.
    """
    for grid in (first, second):
        if component_count(grid) != 1:
            raise InputIsLinkError("Connected sum needs two knots", grid.compact())

    first_shift = first.x.index(0)
    second_shift = second.x.index(second.n - 1) - (second.n - 1)
    first_placed, _ = cyclic_translate(first, first_shift, 0)
    second_placed, _ = cyclic_translate(second, second_shift, 0)

    union = disjoint_union(first_placed, second_placed)
    o, x = list(union.o), list(union.x)
    seam = second.n
    o[seam - 1], o[seam] = o[seam], o[seam - 1]
    result = from_zero_indexed(o, x)
    logger.debug(f"Connected sum of {first.compact()} and {second.compact()}: {result.compact()}")
    return first_placed, second_placed, result


def connected_sum(first: GridDiagram, second: GridDiagram) -> GridDiagram:
    return connected_sum_parts(first, second)[2]


def _twist_marking(grid: GridDiagram, twist: str) -> Tuple[int, str]:
    """Column and corner of the O marking whose block receives the twist."""
    corners = TWIST_CORNERS.get(twist, (twist.upper(),))
    o_corners = {column: corner for kind, column, _, corner in marking_corners(grid) if kind == "O"}
    for wanted in corners:
        columns = sorted(column for column, corner in o_corners.items() if corner == wanted)
        if columns:
            return columns[0], wanted
    raise NoTwistCornerError(f"No O marking with corner type in {corners}", grid.compact())


def cable_grid(grid: GridDiagram, r: int, twist: str = "negative") -> GridDiagram:
    """The r-strand cable built from r x r blocks, with one full twist.

    Every marked cell becomes a block with r markings on its main diagonal
    (NE and SW corners) or anti-diagonal (NW and SE corners), so the
    parallel copies do not cross at corners. In the twist block the O
    placements are shifted down by one cyclically, adding r - 1 crossings:
    negative at SE and NW corners, positive at SW and NE corners.

    Args:
        grid: Knot diagram
        r: Number of strands, at least 2
        twist: "negative", "positive" or an explicit corner type

    Raises:
        InputIsLinkError: The diagram is a link
        NoTwistCornerError: No O marking of the required corner type
    """
    if r < 2:
        raise TooSmallError(f"Cable needs at least 2 strands, got {r}")
    if component_count(grid) != 1:
        raise InputIsLinkError("Cables are built on knot diagrams", grid.compact())

    twist_column, _ = _twist_marking(grid, twist)
    size = grid.n * r
    o = [0] * size
    x = [0] * size
    for kind, column, row, corner in marking_corners(grid):
        for i in range(r):
            offset = i if corner in ("NE", "SW") else r - 1 - i
            if kind == "O" and column == twist_column:
                offset = (offset - 1) % r
            target = o if kind == "O" else x
            target[column * r + i] = row * r + offset

    result = from_zero_indexed(o, x)
    logger.info(f"Built {r}-cable of index {size} with {twist} twist at column {twist_column + 1}")
    return result


@dataclass(frozen=True)
class _ClosurePlan:
    """How the closure of a braid word is laid out.

    Positions ``0 .. above - 1`` close by loops over the top of the braid,
    the rest by loops underneath. ``opening`` and ``closing`` map a letter
    index to the strand pair it crosses, for letters drawn by a closing
    column on the left or on the right instead of a column of their own.
    """

    letters: Tuple[int, ...]
    above: int
    opening: Dict[int, int]
    closing: Dict[int, int]

    @property
    def absorbed(self) -> int:
        return len(self.opening) + len(self.closing)


def _fits_loop(letter: int, pair: int, above: int, left: bool) -> bool:
    """Whether a closing column of the loop beside ``pair`` can draw the letter."""
    if abs(letter) - 1 != pair:
        return False
    # loops over the top come down on the left and go up on the right
    from_top = (letter > 0) == left
    return pair < above if from_top else pair + 1 >= above


def _absorbed_letters(letters: Sequence[int], strands: int, above: int) -> Tuple[Dict[int, int], Dict[int, int]]:
    opening: Dict[int, int] = {}
    closing: Dict[int, int] = {}
    for pair in range(strands - 1):
        # letters moving either strand of the pair; the first and last commute with everything before or after
        touching = [t for t, letter in enumerate(letters) if abs(abs(letter) - 1 - pair) <= 1]
        if not touching:
            continue
        first, last = touching[0], touching[-1]
        if _fits_loop(letters[first], pair, above, left=True):
            opening[first] = pair
        if last not in opening and _fits_loop(letters[last], pair, above, left=False):
            closing[last] = pair
    return opening, closing


def _closure_plan(word: BraidWord) -> _ClosurePlan:
    """The rotation of the word and the loop sides absorbing the most letters."""
    best: Optional[_ClosurePlan] = None
    for shift in range(max(len(word.letters), 1)):
        letters = word.letters[shift:] + word.letters[:shift]
        for above in range(word.strands + 1):
            plan = _ClosurePlan(letters, above, *_absorbed_letters(letters, word.strands, above))
            if best is None or plan.absorbed > best.absorbed:
                best = plan
    assert best is not None
    return best


def braid_to_grid(word: BraidWord) -> GridDiagram:
    """Grid diagram of the closure of a braid.

    Strands run left to right on horizontal segments. Each letter is drawn
    by a column where one strand jumps vertically past its neighbour; the
    vertical segment is the over-strand, so a letter +i moves the strand at
    position i down past position i + 1 and -i moves the strand at i + 1 up.
    Each strand closes by a nested loop over the top or underneath the
    braid, with one column on each side. The first letter moving a pair of
    strands can be drawn by the column that brings its over-strand in from
    its loop, and the last by the column that takes it out, so those letters
    need no column of their own. The word is rotated and the loop sides are
    chosen to absorb as many letters as possible.

    The planar diagram has exactly one crossing per letter and grid index
    len(letters) + 2 * strands minus the absorbed letters, which is at most
    len(letters) + strands + 1 for cyclically reduced words on at most
    three strands.
    """
    k = word.strands
    if k < 1:
        raise TooSmallError(f"A braid needs at least one strand, got {k}")
    for letter in word.letters:
        if letter == 0 or abs(letter) > k - 1:
            raise BadLetterError(f"Letter {letter} invalid for {k} strands")

    closing = word.permutation()
    if _cycle_count(closing) != 1:
        raise ClosureIsLinkError(f"Braid {list(word.letters)} on {k} strands closes to a link")

    plan = _closure_plan(word)
    above = plan.above
    opens = {pair: plan.letters[t] for t, pair in plan.opening.items()}
    closes = {pair: plan.letters[t] for t, pair in plan.closing.items()}
    from_loop = {p for p in range(above) if opens.get(p) == p + 1}
    from_loop |= {p for p in range(above, k) if opens.get(p - 1) == -p}

    next_row = count()
    top = {p: next(next_row) for p in range(above)}
    bottom = {p: next(next_row) for p in range(above, k)}
    current = {p: next(next_row) for p in range(k) if p not in from_loop}  # row id at each position
    order: List[int] = [bottom[p] for p in range(above, k)]  # bottom to top
    order += [current[p] for p in reversed(range(k)) if p in current] + [top[p] for p in range(above)]
    columns: List[Tuple[int, int]] = []  # (X row id, O row id), left to right

    def cross(i: int, down: bool, x_row: int) -> int:
        new = next(next_row)
        if down:
            order.insert(order.index(current[i + 1]), new)
        else:
            order.insert(order.index(current[i]) + 1, new)
        columns.append((x_row, new))
        return new

    over_top = [("top", p) for p in reversed(range(above))]
    underneath = [("bottom", p) for p in range(above, k)]
    # a loop entering across the boundary pair needs the other side's strand already there
    slots = over_top + underneath if opens.get(above - 1) == -above else underneath + over_top
    for side, p in slots:
        if side == "top" and p in from_loop:
            current[p], current[p + 1] = current[p + 1], cross(p, True, top[p])
        elif side == "top":
            columns.append((top[p], current[p]))
        elif p in from_loop:
            current[p - 1], current[p] = cross(p - 1, False, bottom[p]), current[p - 1]
        else:
            columns.append((bottom[p], current[p]))

    for t, letter in enumerate(plan.letters):
        if t in plan.opening or t in plan.closing:
            continue
        i = abs(letter) - 1
        if letter > 0:
            current[i], current[i + 1] = current[i + 1], cross(i, True, current[i])
        else:
            current[i], current[i + 1] = cross(i, False, current[i + 1]), current[i]

    over_top = [("top", p) for p in range(above)]
    underneath = [("bottom", p) for p in reversed(range(above, k))]
    slots = over_top + underneath if closes.get(above - 1) == -above else underneath + over_top
    for side, p in slots:
        if side == "top" and closes.get(p) == -(p + 1):
            columns.append((current[p + 1], top[p]))
            current[p + 1] = current[p]
        elif side == "top":
            columns.append((current[p], top[p]))
        elif closes.get(p - 1) == p:
            columns.append((current[p - 1], bottom[p]))
            current[p - 1] = current[p]
        else:
            columns.append((current[p], bottom[p]))

    row_of = {row_id: index for index, row_id in enumerate(order)}
    result = from_zero_indexed([row_of[o] for _, o in columns], [row_of[x] for x, _ in columns])
    bound = len(word.letters) + k + 1
    if result.n > bound:
        logger.warning(f"Braid {list(word.letters)} on {k} strands needs index {result.n} > {bound}")
    logger.debug(f"Braid {list(word.letters)} on {k} strands -> grid of index {result.n}")
    return result


def random_grid(n: int, rng: Optional[random.Random] = None) -> GridDiagram:
    """A uniformly random valid diagram of index n."""
    rng = rng or random.Random()
    o = list(range(n))
    rng.shuffle(o)
    while True:
        x = list(range(n))
        rng.shuffle(x)
        if all(a != b for a, b in zip(o, x)):
            return from_zero_indexed(o, x)


def random_knot_grid(n: int, rng: random.Random) -> GridDiagram:
    """A random diagram of index n whose link has one component."""
    while True:
        grid = random_grid(n, rng)
        if component_count(grid) == 1:
            return grid


def _cycle_count(permutation: Sequence[int]) -> int:
    seen = set()
    cycles = 0
    for start in range(len(permutation)):
        if start in seen:
            continue
        cycles += 1
        current = start
        while current not in seen:
            seen.add(current)
            current = permutation[current]
    return cycles
