import json

from inspect_ai.scorer import (
    CORRECT,
    INCORRECT,
    Score,
    Scorer,
    Target,
    accuracy,
    mean,
    scorer,
)
from inspect_ai.solver import TaskState


def _outcome(state: TaskState) -> dict:
    return json.loads(state.metadata["check_outcome_json"])


@scorer(metrics=[accuracy()])
def check_passed_scorer() -> Scorer:

    async def score(state: TaskState, target: Target) -> Score:
        outcome = _outcome(state)
        passed = outcome["status"] in ("pass", "skipped")
        return Score(value = CORRECT if passed else INCORRECT, explanation = \
            f"{outcome['name']}: {outcome['status']} (expected {outcome['expected']}, got {outcome['actual']})")

    return score


@scorer(metrics=[mean()])
def check_runtime_scorer() -> Scorer:

    async def score(state: TaskState, target: Target) -> Score:
        outcome = _outcome(state)
        seconds = outcome.get("seconds", 0.0)
        return Score(value = seconds, explanation = f"{outcome['name']} took {seconds} s")

    return score
