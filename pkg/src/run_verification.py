import logging
from pathlib import Path
import sys
from typing import Dict, List

from dotenv import load_dotenv
from inspect_ai import Task, task
from inspect_ai.dataset import Sample

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.invariants.checks import SELECTOR_ALIASES, SELECTORS, CheckCase, select_cases
from src.scorers.check_scorers import check_passed_scorer, check_runtime_scorer
from src.solvers.verification import verification_solver
from src.utils.config_loader import RunConfig, load_run_config
from src.utils.templates import TemplateManager

logger = logging.getLogger(__name__)
load_dotenv()


def create_samples(cases: List[CheckCase]) -> List[Sample]:
    """Create one sample per verification case.

    Args:
        cases: Selected verification cases

    Returns:
        List of Sample objects
    """
    samples = [
        Sample(
            input="",  # no prompt; the solver computes the outcome
            id=case.name,
            metadata={"case": case.name, "selector": case.selector, "grid_index": case.grid_index},
        )
        for case in cases
    ]
    logger.info(f"Created {len(samples)} samples")
    return samples


def validate_task_config(config: RunConfig, selector: str, templates: Dict[str, str]) -> None:
    """Validate the selector, the budget and the templates.

    Raises:
        ValueError: If validation fails
    """
    if "check_result" not in templates:
        raise ValueError("Missing required template: check_result")

    if selector != "all" and selector not in SELECTORS and selector not in SELECTOR_ALIASES:
        supported = ", ".join(SELECTORS + tuple(SELECTOR_ALIASES))
        raise ValueError(f"Unsupported selector: {selector}. Supported selectors: all, {supported}")

    if config.verify_max_n > config.max_grid_index and not config.allow_large:
        logger.warning(
            f"verify_max_n={config.verify_max_n} exceeds max_grid_index={config.max_grid_index}; "
            f"larger cases will be skipped"
        )

    logger.info("Task configuration validation passed")


@task
def property_verification(config_path: str = "configs/default.py", selector: str = "all") -> Task:
    """Concordance property verification task.

    Each sample is one verification case (mirror, sums, torus knots, cables,
    braids, additivity, moves, Alexander polynomials, brute force). The
    solver computes the case directly, so the model is never called; the
    eval log collects pass rates and run times per case.

    Example:
        ```bash
        # Run every case with the default config
        inspect eval src/run_verification.py

        # Only the torus knot cases, allowing index 7
        inspect eval src/run_verification.py -T selector=torus -T config_path=configs/default.py
        ```
    """

    logger.debug("Initializing property verification...")

    config = load_run_config(config_path)
    templates = TemplateManager()
    validate_task_config(config, selector, templates.templates)

    cases = select_cases(selector)
    task_obj = Task(
        dataset=create_samples(cases),
        solver=verification_solver({case.name: case for case in cases}, config),
        scorer=[check_passed_scorer(), check_runtime_scorer()],
        model=config.model,
    )

    logger.info(f"Task configuration: selector={selector}, verify_max_n={config.verify_max_n}, cases={len(cases)}")
    return task_obj
