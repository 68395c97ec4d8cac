from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.grids.constructions import mirror_reverse
from src.grids.diagram import GridDiagram, component_count
from src.grids.errors import GridError, InputIsLinkError
from src.grids.moves import StateBijection
from src.homology.complex import GradedDifferential, GridStates, build_differential
from src.homology.linalg import bits_from_indices, indices_from_bits, reduce_columns, span_contains
from src.homology.module import (
    BigradedModule,
    Chain,
    NonNilpotentError,
    bigraded_homology,
    max_nontorsion_alexander,
)
from src.utils.config_loader import EPSILON_MODES, RunConfig

logger = logging.getLogger(__name__)


class NonHomogeneousReflectionError(GridError):
    """The reflected representative is not Alexander-homogeneous on the mirror diagram."""


class InconsistentEpsilonError(GridError):
    """The representative tests as both in the image and outside the kernel of the horizontal differential."""


@dataclass(frozen=True)
class EpsilonResult:
    value: int
    mode: str
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"epsilon": self.value, "mode": self.mode, "diagnostics": self.diagnostics}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _require_knot(grid: GridDiagram) -> None:
    components = component_count(grid)
    if components != 1:
        raise InputIsLinkError(f"Expected a knot diagram, got {components} components", grid.compact())


def tau(grid: GridDiagram, config: Optional[RunConfig] = None) -> int:
    """Minus the largest Alexander grading of a non-torsion class of GH^-."""
    _require_knot(grid)
    module = bigraded_homology(build_differential(grid, "minus", config), config)
    a_max, _ = max_nontorsion_alexander(module)
    return -a_max


def canonical_x_plus(grid: GridDiagram) -> Tuple[int, ...]:
    """State at the upper-right corners of the X markings."""
    n = grid.n
    state = [0] * n
    for column, row in enumerate(grid.x):
        state[(column + 1) % n] = (row + 1) % n
    return tuple(state)


def canonical_o_plus(grid: GridDiagram) -> Tuple[int, ...]:
    """State at the lower-right corners of the O markings."""
    n = grid.n
    state = [0] * n
    for column, row in enumerate(grid.o):
        state[(column + 1) % n] = row
    return tuple(state)


def reflection_indices(states: GridStates, reflection: StateBijection) -> np.ndarray:
    """Index of the reflected state for every state index.

    The diagram and its mirror have the same index, so both enumerate
    states identically; the reflection is an involution and this array is
    its own inverse.
    """
    rows = np.asarray(reflection.rows, dtype=np.int64)
    image = np.empty_like(states.perms)
    image[:, list(reflection.columns)] = rows[states.perms]
    return states.indices_of_codes(image @ states.weights)


@dataclass(frozen=True)
class KnotArrows:
    """Arrows x -> U^k y of the knot complex that either keep the Alexander filtration or keep the U power.

    The first kind is the minus differential of G. The second kind is the
    horizontal differential of the mirror read backwards through the
    reflection: there the U exponent of an arrow counts the X markings of G
    it crosses, so it becomes the drop in Alexander filtration and the
    arrow carries no U. Arrows of both kinds (empty of all markings) come
    from the minus side only.
    """

    sources: np.ndarray
    targets: np.ndarray
    powers: np.ndarray
    maslov: np.ndarray
    alexander2: np.ndarray

    @classmethod
    def assemble(cls, minus: GradedDifferential, horizontal: GradedDifferential, reflected: np.ndarray) -> "KnotArrows":
        crossing = horizontal.powers >= 1
        sources = reflected[horizontal.targets[crossing]]
        targets = reflected[horizontal.sources[crossing]]
        drops = minus.alexander2[sources] - minus.alexander2[targets]
        if not np.array_equal(drops, 2 * horizontal.powers[crossing]):
            raise NonHomogeneousReflectionError(
                "Reflected horizontal arrows do not drop the Alexander grading by their U exponent",
                minus.grid.compact(),
            )
        return cls(
            np.concatenate([minus.sources, sources]),
            np.concatenate([minus.targets, targets]),
            np.concatenate([minus.powers, np.zeros(len(sources), dtype=np.int64)]),
            minus.maslov,
            minus.alexander2,
        )


@dataclass
class PoweredComplex:
    """Subquotient of the U-localized knot complex in which state s stands for U^power[s] s.

    An arrow x -> U^k y survives exactly when power[y] = power[x] + k; the
    others leave the subquotient.
    """

    arrows: KnotArrows
    power: np.ndarray

    @classmethod
    def row(cls, arrows: KnotArrows, alexander2: int) -> "PoweredComplex":
        """Everything at Alexander filtration level ``alexander2``, at any U power."""
        return cls(arrows, (arrows.alexander2 - alexander2) // 2)

    @classmethod
    def hook_above(cls, arrows: KnotArrows, alexander2: int) -> "PoweredComplex":
        """The row at the level for U powers up to 0, joined to the U^0 column above it."""
        return cls(arrows, np.minimum(0, (arrows.alexander2 - alexander2) // 2))

    @classmethod
    def hook_below(cls, arrows: KnotArrows, alexander2: int) -> "PoweredComplex":
        """The row at the level for U powers from 0, joined to the U^0 column below it."""
        return cls(arrows, np.maximum(0, (arrows.alexander2 - alexander2) // 2))

    def degree(self, maslov: int) -> Dict[int, int]:
        """Position of every state of Maslov grading ``maslov`` within that grading."""
        members = np.nonzero(self.arrows.maslov - 2 * self.power == maslov)[0].tolist()
        return {state: i for i, state in enumerate(members)}

    def bits(self, states: Sequence[int], maslov: int) -> int:
        position = self.degree(maslov)
        return bits_from_indices(position[s] for s in states if s in position)

    def boundary_columns(self, maslov: int) -> List[int]:
        """Boundary of each state of grading ``maslov``, in the positions of grading ``maslov - 1``."""
        arrows = self.arrows
        sources, targets = arrows.sources, arrows.targets
        keep = (self.power[targets] == self.power[sources] + arrows.powers) & (
            arrows.maslov[sources] - 2 * self.power[sources] == maslov
        )
        columns_of = self.degree(maslov)
        rows_of = self.degree(maslov - 1)
        columns = [0] * len(columns_of)
        for source, target in zip(sources[keep].tolist(), targets[keep].tolist()):
            columns[columns_of[source]] ^= 1 << rows_of[target]
        return columns

    def cycles(self, maslov: int) -> List[List[int]]:
        """A basis of the cycles of grading ``maslov``, as state lists."""
        members = list(self.degree(maslov))
        reduction = reduce_columns(self.boundary_columns(maslov))
        return [[members[i] for i in indices_from_bits(reduction.transforms[j])] for j in reduction.zero_columns()]


def _reflect(
    differential: GradedDifferential, mirror: GradedDifferential, reflected: np.ndarray, states: Sequence[int]
) -> List[int]:
    """Image of a chain of the original diagram among the mirror's states."""
    image = []
    for state in states:
        target = int(reflected[state])
        if int(mirror.alexander2[target]) != int(differential.alexander2[state]):
            raise NonHomogeneousReflectionError(
                f"State {differential.states.state_of(state)} has doubled Alexander grading "
                f"{int(differential.alexander2[state])} but its reflection has {int(mirror.alexander2[target])}",
                differential.grid.compact(),
            )
        image.append(target)
    return image


def _killed(arrows: KnotArrows, z: Chain, ambiguity: Sequence[Sequence[int]]) -> bool:
    """Whether the U^0 part of z bounds in the hook above its level.

    That is the horizontal differential of the mirror having z' outside
    its kernel; ``ambiguity`` chains are quotiented away.
    """
    hook = PoweredComplex.hook_above(arrows, z.alexander2)
    top = [s for s in z.states if int(arrows.alexander2[s]) == z.alexander2]
    span = hook.boundary_columns(z.maslov + 1)
    for chain in ambiguity:
        span.append(hook.bits([s for s in chain if int(arrows.alexander2[s]) == z.alexander2], z.maslov))
    return span_contains(span, hook.bits(top, z.maslov))


def _reached(arrows: KnotArrows, z: Chain, ambiguity: Sequence[Sequence[int]]) -> bool:
    """Whether the class of z in its row is the image of a cycle of the hook below its level.

    Failing that, z' lies in the image of the horizontal differential of
    the mirror.
    """
    row = PoweredComplex.row(arrows, z.alexander2)
    hook = PoweredComplex.hook_below(arrows, z.alexander2)
    span = row.boundary_columns(z.maslov + 1)
    for cycle in hook.cycles(z.maslov):
        span.append(row.bits([s for s in cycle if int(arrows.alexander2[s]) >= z.alexander2], z.maslov))
    span += [row.bits(chain, z.maslov) for chain in ambiguity]
    return span_contains(span, row.bits(z.states, z.maslov))


def _membership_test(
    arrows: KnotArrows, z: Chain, ambiguity: Sequence[Sequence[int]], grid: GridDiagram
) -> Tuple[int, str]:
    in_image = not _reached(arrows, z, ambiguity)
    not_in_kernel = _killed(arrows, z, ambiguity)
    if in_image and not_in_kernel:
        raise InconsistentEpsilonError(
            "Representative is both in the image and outside the kernel of the horizontal differential",
            grid.compact(),
        )
    if in_image:
        return -1, "in-image"
    if not_in_kernel:
        return 1, "not-in-kernel"
    return 0, "neither"


def _maslov_homogeneous(mirror: GradedDifferential, states: Sequence[int], alexander2: int) -> bool:
    values = {int(mirror.maslov[s]) - (int(mirror.alexander2[s]) - alexander2) for s in states}
    return len(values) <= 1


def epsilon(grid: GridDiagram, mode: Optional[str] = None, config: Optional[RunConfig] = None) -> EpsilonResult:
    """The {-1, 0, 1} invariant read off the horizontal differential of the mirror.

    The representative z of the top free class of GH^-(G) is carried to the
    mirror diagram by the reflection. The horizontal differential D there,
    read back through the reflection, reverses its arrows and trades U
    powers for drops in Alexander filtration, so together with the minus
    differential of G it spans the part of the knot complex that keeps
    one of the two filtrations. ε is -1 when z' is in the image of D (no
    cycle of the hook below z's level reaches the class of z), 1 when z' is
    not in the kernel of D (the U^0 part of z bounds in the hook above its
    level), and 0 otherwise. Both tests depend on z only through its
    class; "robust" mode also quotients the boundaries of G in the
    bigrading of z, and "robust-torsion" the torsion cycles alive there,
    and logs a warning if either changes the answer.

    Raises:
        InputIsLinkError: The diagram is a link
        NonHomogeneousReflectionError: The reflection does not preserve Alexander gradings
        NonNilpotentError: The horizontal differential does not square to zero
    """
    return _epsilon_and_homology(grid, mode, config or RunConfig())[0]


def _epsilon_and_homology(
    grid: GridDiagram, mode: Optional[str], config: RunConfig
) -> Tuple[EpsilonResult, BigradedModule]:
    mode = mode or config.epsilon_mode
    if mode not in EPSILON_MODES:
        raise ValueError(f"Unknown epsilon mode {mode!r}; expected one of {EPSILON_MODES}")
    _require_knot(grid)
    mirrored, reflection = mirror_reverse(grid)

    with ThreadPoolExecutor(max_workers=2) as pool:
        minus_future = pool.submit(build_differential, grid, "minus", config)
        horizontal_future = pool.submit(build_differential, mirrored, "horizontal", config)
        minus = minus_future.result()
        horizontal = horizontal_future.result()

    if not horizontal.square_is_zero():
        raise NonNilpotentError("The horizontal differential does not square to zero", mirrored.compact())

    module = bigraded_homology(minus, config)
    _, representative = max_nontorsion_alexander(module)
    reflected = reflection_indices(minus.states, reflection)
    z_states = _reflect(minus, horizontal, reflected, representative.states)
    arrows = KnotArrows.assemble(minus, horizontal, reflected)

    strict_value, strict_test = _membership_test(arrows, representative, [], grid)
    value, test = strict_value, strict_test
    if mode != "strict":
        value, test = _membership_test(arrows, representative, _ambiguity(module, representative, mode), grid)
        if value != strict_value:
            logger.warning(
                f"Epsilon of {grid.compact()}: strict mode gives {strict_value}, {mode} mode gives {value}"
            )

    diagnostics = {
        "test": test,
        "representative": [list(minus.states.state_of(s)) for s in representative.states],
        "alexander": representative.alexander,
        "maslov": representative.maslov,
        "horizontal_square_zero": True,
        "maslov_homogeneous": _maslov_homogeneous(horizontal, z_states, representative.alexander2),
        "strict_value": strict_value,
    }
    logger.info(f"Epsilon of {grid.compact()} ({mode}): {value}")
    return EpsilonResult(value, mode, diagnostics), module


def _ambiguity(module: BigradedModule, representative: Chain, mode: str) -> List[Tuple[int, ...]]:
    chains = module.boundaries(representative.maslov, representative.alexander2)
    if mode == "robust-torsion":
        chains = chains + module.torsion_cycles(representative.maslov, representative.alexander2)
    return chains


def invariants_report(
    grid: GridDiagram, mode: Optional[str] = None, config: Optional[RunConfig] = None
) -> Dict[str, Any]:
    """tau, epsilon and the minus homology summary of a knot diagram."""
    result, module = _epsilon_and_homology(grid, mode, config or RunConfig())
    a_max, _ = max_nontorsion_alexander(module)
    return {
        "tau": -a_max,
        "epsilon": result.value,
        "mode": result.mode,
        "diagnostics": result.diagnostics,
        "homology": module.to_dict(),
    }
