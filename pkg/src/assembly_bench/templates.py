"""Instruction templates: storage, split bookkeeping, and cue rendering.

A template is a pattern string with named placeholders. Placeholder names
describe roles, not word order:

    {element}    the asset being acted on (removed, replaced, inserted)
    {element_b}  the incoming asset for replace, or swap's second asset
    {position}   the primary timeline position
    {position_b} swap's second position

Cue values arrive pre-formatted (see the format_* helpers); render just
substitutes them verbatim.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources

from .core import Cue, Op, TaskKind, normalize_caption
from .errors import TemplateError

SPLITS = ("train", "val", "test")

_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")

# Allowed placeholder sets per task kind. Replace (positional) may name the
# target either by position or by id, so it gets two admissible shapes.
_REQUIRED: dict[tuple[Op, Cue], tuple[frozenset[str], ...]] = {
    (Op.INSERT, Cue.POSITIONAL): (frozenset({"element", "position"}),),
    (Op.INSERT, Cue.SEMANTIC): (frozenset({"element", "position"}),),
    (Op.REMOVE, Cue.POSITIONAL): (frozenset({"position"}),),
    (Op.REMOVE, Cue.SEMANTIC): (frozenset({"element"}),),
    (Op.REPLACE, Cue.POSITIONAL): (
        frozenset({"position", "element_b"}),
        frozenset({"element", "element_b"}),
    ),
    (Op.REPLACE, Cue.SEMANTIC): (frozenset({"element", "element_b"}),),
    (Op.SWAP, Cue.POSITIONAL): (frozenset({"position", "position_b"}),),
    (Op.SWAP, Cue.SEMANTIC): (frozenset({"element", "element_b"}),),
}


@dataclass(frozen=True)
class Template:
    id: str
    task: TaskKind
    split: str
    pattern: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise TemplateError(f"template {self.id}: unknown split {self.split!r}")
        holes = self.placeholders()
        allowed = _REQUIRED[(self.task.op, self.task.cue)]
        if frozenset(holes) not in allowed:
            want = " or ".join("{" + ", ".join(sorted(a)) + "}" for a in allowed)
            raise TemplateError(
                f"template {self.id}: placeholders {sorted(holes)} do not fit "
                f"{self.task.name} (want {want})"
            )

    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER_RE.findall(self.pattern))


@dataclass(frozen=True)
class TemplateSet:
    templates: tuple[Template, ...]
    _buckets: dict[tuple[TaskKind, str], tuple[Template, ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if not isinstance(self.templates, tuple):
            object.__setattr__(self, "templates", tuple(self.templates))
        patterns: dict[str, str] = {}
        buckets: dict[tuple[TaskKind, str], list[Template]] = {}
        for t in self.templates:
            if t.pattern in patterns:
                raise TemplateError(
                    f"pattern of {t.id} duplicates {patterns[t.pattern]}: {t.pattern!r}"
                )
            patterns[t.pattern] = t.id
            buckets.setdefault((t.task, t.split), []).append(t)
        from .core import ALL_TASK_KINDS

        for task in ALL_TASK_KINDS:
            for split in SPLITS:
                if not buckets.get((task, split)):
                    raise TemplateError(f"no templates for {task.name} in split {split!r}")
        object.__setattr__(
            self, "_buckets", {k: tuple(v) for k, v in buckets.items()}
        )

    def bucket(self, task: TaskKind, split: str) -> tuple[Template, ...]:
        try:
            return self._buckets[(task, split)]
        except KeyError:
            raise TemplateError(f"no templates for {task.name} in split {split!r}") from None

    def by_split(self, split: str) -> tuple[Template, ...]:
        return tuple(t for t in self.templates if t.split == split)


def load_templates(path: str | None = None) -> TemplateSet:
    """Load a corpus from a JSON file, or the bundled default when path is None."""
    if path is None:
        text = resources.files("assembly_bench.data").joinpath("templates.json").read_text("utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise TemplateError(f"cannot read template corpus {path}: {exc}") from exc
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TemplateError(f"template corpus is not valid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise TemplateError("template corpus must be a JSON array")
    templates = []
    for rec in records:
        try:
            task = TaskKind(Op(rec["task"]), Cue(rec["cue"]))
            templates.append(
                Template(id=rec["id"], task=task, split=rec["split"], pattern=rec["pattern"])
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise TemplateError(f"bad template record {rec!r}: {exc}") from exc
    return TemplateSet(tuple(templates))


def render(template: Template, cues: dict[str, str]) -> str:
    """Substitute cue text into the pattern. Cues must cover the placeholders
    exactly; anything missing or extra is an error."""
    holes = template.placeholders()
    missing = holes - cues.keys()
    extra = cues.keys() - holes
    if missing:
        raise TemplateError(f"template {template.id}: no value for {sorted(missing)}")
    if extra:
        raise TemplateError(f"template {template.id}: unused cue values {sorted(extra)}")

    def sub(match: re.Match) -> str:
        return cues[match.group(1)]

    return _PLACEHOLDER_RE.sub(sub, template.pattern)


def sample_template(
    template_set: TemplateSet, task: TaskKind, split: str, rng: random.Random
) -> Template:
    """Uniform draw from the (task, split) bucket."""
    bucket = template_set.bucket(task, split)
    return bucket[rng.randrange(len(bucket))]


def join_compositional(first: str, second: str) -> str:
    """Join two rendered single-op surfaces into one two-op instruction."""
    continuation = second[:1].lower() + second[1:]
    return f"{first}. Then, {continuation}"


# --- cue formatting ---------------------------------------------------------

ORDINALS = (
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh",
    "eighth", "ninth", "tenth", "eleventh", "twelfth", "thirteenth",
    "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth",
    "nineteenth", "twentieth",
)


def format_position(position, rng: random.Random) -> str:
    """Surface form for a position cue: 'last', an ordinal word, or 'position N'."""
    from .core import Last

    if isinstance(position, Last):
        return "last"
    if not isinstance(position, int) or position < 1:
        raise TemplateError(f"cannot format position {position!r}")
    if position <= len(ORDINALS) and rng.random() < 0.75:
        return ORDINALS[position - 1]
    return f"position {position}"


def format_id(asset_id: str, rng: random.Random) -> str:
    """Surface form for an id cue: 'shot with ID NNNN' or 'clip with ID NNNN'."""
    noun = "shot" if rng.random() < 0.5 else "clip"
    return f"{noun} with ID {asset_id}"


def format_semantic(caption: str) -> str:
    """Surface form for a semantic cue: the normalized caption in double quotes."""
    normalized = normalize_caption(caption)
    if '"' in normalized:
        raise TemplateError(f"caption contains a double quote, cannot cue it: {caption!r}")
    return f'"{normalized}"'
