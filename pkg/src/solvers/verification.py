import json
import logging
from typing import Dict, Optional

from inspect_ai.solver import Generate, TaskState, solver

from src.invariants.checks import CheckCase, CheckOutcome, run_case
from src.utils.config_loader import RunConfig
from src.utils.templates import TemplateManager

logger = logging.getLogger(__name__)


class VerificationSolver:
    """Runs the verification case named in a sample's metadata.

    No model is consulted: the outcome is computed directly and stored as
    JSON under ``check_outcome_json`` for the scorers.
    """

    def __init__(self, cases: Dict[str, CheckCase], config: RunConfig, templates: Optional[TemplateManager] = None):
        self.cases = cases
        self.config = config
        self.templates = templates or TemplateManager()
        logger.debug(f"Initialized VerificationSolver with {len(cases)} cases")

    async def solve(self, state: TaskState, generate: Generate) -> TaskState:
        name = state.metadata.get("case", "")
        try:
            case = self.cases[name]
            outcome = run_case(case, self.config)
        except Exception as e:
            logger.error(f"Error running check {name!r}: {e}")
            outcome = CheckOutcome(
                name=name,
                selector=state.metadata.get("selector", ""),
                grid_index=state.metadata.get("grid_index", 0),
                status="error",
                detail=f"{type(e).__name__}: {e}",
            )

        state.metadata["check_outcome_json"] = json.dumps(outcome.to_dict(), sort_keys=True)
        state.output.completion = self.templates.render(
            "check_result",
            status=outcome.status,
            name=outcome.name,
            selector=outcome.selector,
            grid_index=outcome.grid_index,
            expected=outcome.expected,
            actual=outcome.actual,
        )
        logger.info(f"Check {name}: {outcome.status}")
        return state


@solver
def verification_solver(cases: Dict[str, CheckCase], config: RunConfig):
    async def solve(state: TaskState, generate: Generate) -> TaskState:
        """Async solve function for Inspect AI integration."""
        return await VerificationSolver(cases, config).solve(state, generate)

    return solve
