"""Scoring of predicted timelines and routed-ensemble accuracy simulation.

Two halves live here. `score` grades raw model responses against a dataset
with exact matching and breaks the results down per cue and per task.
`route_composite` and `simulate_routing` answer a different question: given
one specialist model per task and a (possibly imperfect) instruction router,
what accuracy does the combined system reach on each task?
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import ALL_TASK_KINDS
from .errors import AssemblyError, EvalError, RoutingSpecError
from .generation import Sample
from .prompts import LENIENT, parse_timeline_output

MISMATCH = "mismatch"
PARSE_ERROR = "parse_error"
LENGTH_MISMATCH = "length_mismatch"
FAILURE_REASONS = (MISMATCH, PARSE_ERROR, LENGTH_MISMATCH)

TASK_LABELS = tuple(kind.name for kind in ALL_TASK_KINDS)
TASK_COUNT = len(TASK_LABELS)

BUNDLED_ROUTING_SPEC = "routing_oracle.json"


@dataclass(frozen=True)
class EvalReport:
    """Aggregated grading result.

    `per_task` keys are "op/cue" bucket labels (compositional datasets
    produce labels like "insert+remove/semantic"). `counts` carries the raw
    correct/total tallies behind every fraction, plus how many dataset
    samples had no prediction at all. `failures` lists every scored sample
    that did not match, with a reason from FAILURE_REASONS, ordered by
    sample_id.
    """

    overall: float
    per_cue: dict[str, float]
    per_task: dict[str, float]
    counts: dict[str, object]
    failures: tuple[tuple[str, str], ...]


def exact_match(predicted, gold) -> bool:
    """True when both id sequences agree in length and element-wise."""
    return list(predicted) == list(gold)


def _judge(response: str, gold: list[str], strictness: str) -> str | None:
    try:
        predicted = parse_timeline_output(response, strictness)
    except AssemblyError:
        return PARSE_ERROR
    if len(predicted) != len(gold):
        return LENGTH_MISMATCH
    if not exact_match(predicted, gold):
        return MISMATCH
    return None


def score(
    predictions: dict[str, str],
    samples: list[Sample],
    strictness: str = LENIENT,
) -> EvalReport:
    """Grade raw response texts against their samples.

    Only sample_ids present in `predictions` are scored; the count of
    dataset samples left unscored is reported under counts["missing"].
    A prediction for an unknown sample_id raises EvalError. Parse failures
    count as incorrect rather than being dropped, so a model that answers
    in prose scores zero instead of vanishing from the denominator.
    """
    by_id: dict[str, Sample] = {}
    for sample in samples:
        if sample.sample_id in by_id:
            raise EvalError(f"duplicate sample_id in dataset: {sample.sample_id!r}")
        by_id[sample.sample_id] = sample
    unknown = sorted(set(predictions) - set(by_id))
    if unknown:
        raise EvalError(f"prediction references unknown sample_id {unknown[0]!r}")

    task_tallies: dict[str, list[int]] = {}
    cue_tallies: dict[str, list[int]] = {}
    failures: list[tuple[str, str]] = []
    scored = 0
    correct = 0
    for sample_id in sorted(predictions):
        sample = by_id[sample_id]
        gold = list(sample.output_timeline.entries)
        reason = _judge(predictions[sample_id], gold, strictness)
        bucket = f"{sample.task}/{sample.cue}"
        task_tally = task_tallies.setdefault(bucket, [0, 0])
        cue_tally = cue_tallies.setdefault(sample.cue, [0, 0])
        task_tally[1] += 1
        cue_tally[1] += 1
        scored += 1
        if reason is None:
            task_tally[0] += 1
            cue_tally[0] += 1
            correct += 1
        else:
            failures.append((sample_id, reason))

    ordered = [label for label in TASK_LABELS if label in task_tallies]
    ordered.extend(sorted(label for label in task_tallies if label not in TASK_LABELS))
    per_task = {label: task_tallies[label][0] / task_tallies[label][1] for label in ordered}
    per_cue = {
        cue: cue_tallies[cue][0] / cue_tallies[cue][1]
        for cue in sorted(cue_tallies)
    }
    counts = {
        "total": scored,
        "correct": correct,
        "missing": len(by_id) - scored,
        "per_task": {
            label: {"correct": task_tallies[label][0], "total": task_tallies[label][1]}
            for label in ordered
        },
        "per_cue": {
            cue: {"correct": cue_tallies[cue][0], "total": cue_tallies[cue][1]}
            for cue in sorted(cue_tallies)
        },
    }
    overall = correct / scored if scored else 0.0
    return EvalReport(overall, per_cue, per_task, counts, tuple(failures))


# --- routed-ensemble simulation ----------------------------------------------


def _matrix(values, label: str) -> tuple[tuple[float, ...], ...]:
    try:
        rows = tuple(tuple(float(value) for value in row) for row in values)
    except (TypeError, ValueError) as exc:
        raise RoutingSpecError(f"{label} matrix holds a non-numeric entry: {exc}") from exc
    if len(rows) != TASK_COUNT or any(len(row) != TASK_COUNT for row in rows):
        raise RoutingSpecError(f"{label} matrix must be {TASK_COUNT}x{TASK_COUNT}")
    for row in rows:
        for value in row:
            if not 0.0 <= value <= 1.0:
                raise RoutingSpecError(f"{label} entries must lie in [0, 1], got {value!r}")
    return rows


@dataclass(frozen=True)
class RoutingSpec:
    """One specialist model per task plus a router.

    accuracy[m][t] is model m's accuracy on task t, as a fraction. The
    routing row routing[t] gives the probability of sending task-t
    instructions to each model and must sum to 1 within 1e-9. Task axes
    follow TASK_LABELS order.
    """

    accuracy: tuple[tuple[float, ...], ...]
    routing: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "accuracy", _matrix(self.accuracy, "accuracy"))
        object.__setattr__(self, "routing", _matrix(self.routing, "routing"))
        for index, row in enumerate(self.routing):
            total = math.fsum(row)
            if abs(total - 1.0) > 1e-9:
                raise RoutingSpecError(
                    f"routing row {index} sums to {total!r}, expected 1"
                )


@dataclass(frozen=True)
class RouteResult:
    per_task: tuple[float, ...]
    average: float


def oracle_routing() -> tuple[tuple[float, ...], ...]:
    """Identity routing: every task reaches its own specialist."""
    return tuple(
        tuple(1.0 if row == col else 0.0 for col in range(TASK_COUNT))
        for row in range(TASK_COUNT)
    )


def random_routing() -> tuple[tuple[float, ...], ...]:
    """Uniform routing: each task is sent to a model picked at random."""
    return tuple(tuple(1.0 / TASK_COUNT for _ in range(TASK_COUNT)) for _ in range(TASK_COUNT))


def route_composite(spec: RoutingSpec) -> RouteResult:
    """Closed-form accuracy of the routed ensemble.

    composite[t] = sum over models m of routing[t][m] * accuracy[m][t].
    With identity routing this is exactly the accuracy diagonal.
    """
    accuracy = np.asarray(spec.accuracy)
    routing = np.asarray(spec.routing)
    per_task = tuple(float(v) for v in (routing * accuracy.T).sum(axis=1))
    return RouteResult(per_task, sum(per_task) / TASK_COUNT)


def simulate_routing(spec: RoutingSpec, trials: int, seed: int = 0) -> RouteResult:
    """Monte-Carlo estimate of route_composite.

    Each trial draws a model from the task's routing row, then a Bernoulli
    outcome at that model's accuracy. The per-task standard error is
    sqrt(p*(1-p)/trials), so estimates converge to the closed form.
    """
    if trials < 1:
        raise RoutingSpecError(f"trials must be positive, got {trials}")
    rng = np.random.default_rng(seed)
    accuracy = np.asarray(spec.accuracy)
    per_task = []
    for task in range(TASK_COUNT):
        weights = np.asarray(spec.routing[task])
        models = rng.choice(TASK_COUNT, size=trials, p=weights)
        hits = rng.random(trials) < accuracy[models, task]
        per_task.append(float(hits.mean()))
    return RouteResult(tuple(per_task), sum(per_task) / TASK_COUNT)


def load_routing_spec(path: str | None = None) -> RoutingSpec:
    """Read a routing spec from JSON, or the bundled reference when path is None.

    The file must hold "accuracy" and "routing" matrices; an optional
    "tasks" list documents the column order and is checked against
    TASK_LABELS when present.
    """
    if path is None:
        source = f"bundled {BUNDLED_ROUTING_SPEC}"
        try:
            text = (
                resources.files("assembly_bench.data")
                .joinpath(BUNDLED_ROUTING_SPEC)
                .read_text(encoding="utf-8")
            )
        except OSError as exc:
            raise RoutingSpecError(f"cannot read {source}: {exc}") from exc
    else:
        source = path
        try:
            with open(path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise RoutingSpecError(f"cannot read {source}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RoutingSpecError(f"{source} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise RoutingSpecError(f"{source} must hold a JSON object")
    for key in ("accuracy", "routing"):
        if key not in payload:
            raise RoutingSpecError(f"{source} is missing the {key!r} matrix")
    tasks = payload.get("tasks")
    if tasks is not None and list(tasks) != list(TASK_LABELS):
        raise RoutingSpecError(
            f"{source} lists tasks in an unexpected order; expected {list(TASK_LABELS)}"
        )
    return RoutingSpec(payload["accuracy"], payload["routing"])
