"""Benchmark sample generation.

Samples are built corruption-first: the gold output timeline is always a
contiguous window of a source sequence, and the input timeline is a
corrupted variant of it (element deleted, distractor spliced in, element
substituted, or two positions exchanged). The instruction, rendered from a
template, is the edit that reverts the corruption. A round-trip through the
executor is checked for every emitted sample.

Generation is deterministic: each sample gets its own random stream derived
from (root seed, bucket, index), so samples are independent of generation
order and safe to produce in parallel.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator

from .core import (
    ALL_TASK_KINDS,
    Asset,
    Collection,
    Cue,
    LAST,
    Op,
    TaskKind,
    Timeline,
    assign_ids,
    normalize_caption,
)
from .errors import GenerationError, ParseError
from .executor import apply_text, caption_is_safe_cue
from .templates import (
    TemplateSet,
    format_id,
    format_position,
    format_semantic,
    join_compositional,
    render,
    sample_template,
)

# Ordered pairs of distinct ops used for compositional generation.
COMPOSITIONAL_PAIRS: tuple[tuple[Op, Op], ...] = tuple(
    (a, b) for a in Op for b in Op if a != b
)


# --- source data ------------------------------------------------------------


@dataclass(frozen=True)
class SourceItem:
    caption: str
    uri: str | None = None


@dataclass(frozen=True)
class SourceSequence:
    sequence_id: str
    items: tuple[SourceItem, ...]


@dataclass(frozen=True)
class SourceManifest:
    sequences: tuple[SourceSequence, ...]
    warnings: int = 0  # sequences dropped during ingest


def _sequence_from_record(record, line: int | None = None) -> SourceSequence:
    if not isinstance(record, dict):
        raise ParseError(f"sequence record must be an object, got {type(record).__name__}", line=line)
    try:
        seq_id = record["sequence_id"]
        raw_items = record["items"]
    except KeyError as exc:
        raise ParseError(f"sequence record missing key {exc.args[0]!r}", line=line) from None
    if not isinstance(seq_id, str) or not seq_id:
        raise ParseError("sequence_id must be a non-empty string", line=line)
    if not isinstance(raw_items, list):
        raise ParseError(f"sequence {seq_id!r}: items must be an array", line=line)
    items = []
    for item in raw_items:
        if not isinstance(item, dict) or "caption" not in item:
            raise ParseError(f"sequence {seq_id!r}: every item needs a caption", line=line)
        caption = item["caption"]
        uri = item.get("uri")
        if not isinstance(caption, str):
            raise ParseError(f"sequence {seq_id!r}: caption must be a string", line=line)
        if uri is not None and not isinstance(uri, str):
            raise ParseError(f"sequence {seq_id!r}: uri must be a string", line=line)
        items.append(SourceItem(caption=caption, uri=uri))
    return SourceSequence(sequence_id=seq_id, items=tuple(items))


def _assemble_manifest(sequences: list[SourceSequence]) -> SourceManifest:
    seen: set[str] = set()
    kept = []
    warnings = 0
    for seq in sequences:
        if seq.sequence_id in seen:
            raise ParseError(f"duplicate sequence_id {seq.sequence_id!r}")
        seen.add(seq.sequence_id)
        usable = len(seq.items) >= 2 and all(
            normalize_caption(it.caption) for it in seq.items
        )
        if usable:
            kept.append(seq)
        else:
            warnings += 1
    return SourceManifest(sequences=tuple(kept), warnings=warnings)


def ingest_manifest(path: str) -> SourceManifest:
    """Load a source manifest from JSON ({"sequences": [...]} or a bare
    array) or JSONL (one sequence object per line)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    return parse_manifest_text(text)


def parse_manifest_text(text: str) -> SourceManifest:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if doc is not None:
        if isinstance(doc, dict) and "sequences" in doc:
            records = doc["sequences"]
        elif isinstance(doc, dict) and "sequence_id" in doc:
            records = [doc]
        elif isinstance(doc, list):
            records = doc
        else:
            raise ParseError("manifest JSON must be an array or hold a 'sequences' array")
        if not isinstance(records, list):
            raise ParseError("'sequences' must be an array")
        return _assemble_manifest([_sequence_from_record(r) for r in records])
    # JSONL: one sequence per non-blank line
    sequences = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line=lineno) from exc
        sequences.append(_sequence_from_record(record, line=lineno))
    return _assemble_manifest(sequences)


def default_manifest() -> SourceManifest:
    """The bundled synthetic manifest used for self-contained runs."""
    text = resources.files("assembly_bench.data").joinpath(
        "synthetic_manifest.jsonl"
    ).read_text("utf-8")
    return parse_manifest_text(text)


# --- configuration ----------------------------------------------------------

MIN_LENGTH = 2
MAX_LENGTH = 19


@dataclass(frozen=True)
class GenConfig:
    collection_size: int = 20
    timeline_length: int | tuple[int, int] = 5
    samples_per_task: int = 80
    seed: int = 0
    compositional: bool = False
    split: str = "test"
    max_retries: int = 20

    def __post_init__(self):
        lo, hi = self.length_range
        if not (MIN_LENGTH <= lo <= hi <= MAX_LENGTH):
            raise GenerationError(
                f"timeline length {self.timeline_length!r} outside [{MIN_LENGTH}, {MAX_LENGTH}]"
            )
        # Room for at least one distractor; compositional corruption can add
        # two assets beyond the gold window.
        headroom = 2 if self.compositional else 1
        if self.collection_size < hi + headroom:
            raise GenerationError(
                f"collection_size {self.collection_size} too small for length {hi} "
                f"(need at least {hi + headroom})"
            )
        if self.compositional and lo < 3:
            raise GenerationError(
                "compositional generation needs timeline length >= 3 (an insert "
                "corruption can shorten the intermediate timeline below swap range)"
            )
        if self.samples_per_task < 0:
            raise GenerationError("samples_per_task must be >= 0")
        if self.max_retries < 1:
            raise GenerationError("max_retries must be >= 1")

    @property
    def length_range(self) -> tuple[int, int]:
        if isinstance(self.timeline_length, int):
            return self.timeline_length, self.timeline_length
        lo, hi = self.timeline_length
        return int(lo), int(hi)

    def draw_length(self, rng: random.Random) -> int:
        lo, hi = self.length_range
        return lo if lo == hi else rng.randint(lo, hi)


# --- samples ----------------------------------------------------------------


@dataclass(frozen=True)
class Sample:
    sample_id: str
    task: str  # op name, or 'op1+op2' for compositional samples
    cue: str  # 'positional' | 'semantic'
    collection: Collection
    input_timeline: Timeline
    instruction: str
    output_timeline: Timeline
    meta: dict = field(compare=False)

    @property
    def is_compositional(self) -> bool:
        return "+" in self.task

    def task_kinds(self) -> tuple[TaskKind, ...]:
        cue = Cue(self.cue)
        return tuple(TaskKind(Op(name), cue) for name in self.task.split("+"))


def derive_seed(seed: int, bucket: str, index: int) -> int:
    digest = hashlib.sha256(f"{seed}:{bucket}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class _Retry(Exception):
    """Internal: this attempt cannot satisfy the constraints, draw again."""


@dataclass
class _EditPlan:
    """One corruption step: applying `op` at the given positions to
    input_items yields gold_items."""

    op: Op
    input_items: list[SourceItem]
    gold_items: list[SourceItem]
    j: int  # primary 1-based position (meaning depends on op)
    k: int | None = None  # swap only
    element: SourceItem | None = None  # inserted / removed / incoming item
    outgoing: SourceItem | None = None  # replace: the corrupted input item


def _corrupt(gold: list[SourceItem], op: Op, rng: random.Random, draw_distractor) -> _EditPlan:
    l = len(gold)
    if op is Op.INSERT:
        j = rng.randint(1, l)
        input_items = gold[: j - 1] + gold[j:]
        return _EditPlan(op, input_items, gold, j=j, element=gold[j - 1])
    if op is Op.REMOVE:
        d = draw_distractor()
        j = rng.randint(1, l + 1)
        input_items = gold[: j - 1] + [d] + gold[j - 1 :]
        return _EditPlan(op, input_items, gold, j=j, element=d)
    if op is Op.REPLACE:
        d = draw_distractor()
        j = rng.randint(1, l)
        input_items = gold[: j - 1] + [d] + gold[j:]
        return _EditPlan(op, input_items, gold, j=j, element=gold[j - 1], outgoing=d)
    j, k = sorted(rng.sample(range(1, l + 1), 2))
    input_items = list(gold)
    input_items[j - 1], input_items[k - 1] = input_items[k - 1], input_items[j - 1]
    return _EditPlan(op, input_items, gold, j=j, k=k)


def _maybe_last(position: int, length_equivalent: int, rng: random.Random):
    if position == length_equivalent and rng.random() < 0.5:
        return LAST
    return position


def _semantic_cue_items(plan: _EditPlan) -> list[SourceItem]:
    """Items whose captions the semantic rendering of this plan would quote."""
    if plan.op is Op.INSERT:
        return [plan.element]
    if plan.op is Op.REMOVE:
        return [plan.element]
    if plan.op is Op.REPLACE:
        return [plan.outgoing, plan.element]
    return [plan.input_items[plan.j - 1], plan.input_items[plan.k - 1]]


def _cues_for(plan: _EditPlan, template, ids: dict[str, str], rng: random.Random) -> dict:
    """Build the placeholder->text map for one rendered clause."""

    def id_of(item: SourceItem) -> str:
        return ids[normalize_caption(item.caption)]

    holes = template.placeholders()
    semantic = template.task.cue is Cue.SEMANTIC
    input_len = len(plan.input_items)
    values: dict[str, str] = {}
    if plan.op is Op.INSERT:
        values["position"] = format_position(_maybe_last(plan.j, input_len + 1, rng), rng)
        values["element"] = (
            format_semantic(plan.element.caption) if semantic else format_id(id_of(plan.element), rng)
        )
    elif plan.op is Op.REMOVE:
        if semantic:
            values["element"] = format_semantic(plan.element.caption)
        else:
            values["position"] = format_position(_maybe_last(plan.j, input_len, rng), rng)
    elif plan.op is Op.REPLACE:
        if semantic:
            values["element"] = format_semantic(plan.outgoing.caption)
            values["element_b"] = format_semantic(plan.element.caption)
        else:
            if "position" in holes:
                values["position"] = format_position(_maybe_last(plan.j, input_len, rng), rng)
            else:
                values["element"] = format_id(id_of(plan.outgoing), rng)
            values["element_b"] = format_id(id_of(plan.element), rng)
    else:  # swap
        if semantic:
            values["element"] = format_semantic(plan.input_items[plan.j - 1].caption)
            values["element_b"] = format_semantic(plan.input_items[plan.k - 1].caption)
        else:
            values["position"] = format_position(plan.j, rng)
            values["position_b"] = format_position(_maybe_last(plan.k, input_len, rng), rng)
    return values


def _make_draw(pool: list[SourceItem], taken: set[str], rng: random.Random, tries: int = 60):
    def draw() -> SourceItem:
        for _ in range(tries):
            item = pool[rng.randrange(len(pool))]
            key = normalize_caption(item.caption)
            if key not in taken:
                taken.add(key)
                return item
        raise _Retry("no caption-distinct distractor available")

    return draw


def _attempt(
    manifest: SourceManifest,
    ops: tuple[Op, ...],
    cue: Cue,
    cfg: GenConfig,
    templates: TemplateSet,
    rng: random.Random,
    length: int,
) -> tuple[Collection, Timeline, Timeline, str, list[str], str]:
    eligible = [s for s in manifest.sequences if len(s.items) >= length]
    if not eligible:
        raise GenerationError(
            f"no source sequence has {length}+ items (manifest holds {len(manifest.sequences)})"
        )
    seq = eligible[rng.randrange(len(eligible))]
    start = rng.randrange(len(seq.items) - length + 1)
    gold = list(seq.items[start : start + length])

    taken = {normalize_caption(it.caption) for it in gold}
    if len(taken) != length:
        raise _Retry("gold window repeats a caption")

    pool = [it for s in manifest.sequences if s is not seq for it in s.items]
    if not pool:
        raise GenerationError("manifest needs at least two sequences to supply distractors")
    draw = _make_draw(pool, taken, rng)

    # Corrupt back-to-front: the last op restores the gold timeline, earlier
    # ops restore each intermediate state.
    plans: list[_EditPlan] = []
    target = gold
    for op in reversed(ops):
        plan = _corrupt(target, op, rng, draw)
        plans.insert(0, plan)
        target = plan.input_items
    input_items = plans[0].input_items

    if cue is Cue.SEMANTIC:
        for plan in plans:
            for item in _semantic_cue_items(plan):
                if not caption_is_safe_cue(item.caption):
                    raise _Retry(f"caption unusable as a cue: {item.caption!r}")

    # The collection holds every item any timeline touches, plus filler
    # distractors up to the configured size. Captions stay unique throughout.
    members: dict[str, SourceItem] = {}
    for item_list in [input_items] + [p.gold_items for p in plans]:
        for item in item_list:
            members.setdefault(normalize_caption(item.caption), item)
    if len(members) > cfg.collection_size:
        raise GenerationError(
            f"collection_size {cfg.collection_size} cannot hold {len(members)} timeline assets"
        )
    while len(members) < cfg.collection_size:
        filler = draw()
        members[normalize_caption(filler.caption)] = filler

    items = list(members.values())
    rng.shuffle(items)
    ids = assign_ids(cfg.collection_size, rng)
    collection = Collection(
        tuple(Asset(id=i, caption=it.caption, uri=it.uri) for i, it in zip(ids, items))
    )
    id_by_caption = {normalize_caption(a.caption): a.id for a in collection.assets}

    def to_timeline(seq_items: list[SourceItem]) -> Timeline:
        return Timeline(tuple(id_by_caption[normalize_caption(it.caption)] for it in seq_items))

    input_timeline = to_timeline(input_items)
    output_timeline = to_timeline(gold)

    surfaces = []
    template_ids = []
    for op, plan in zip(ops, plans):
        template = sample_template(templates, TaskKind(op, cue), cfg.split, rng)
        surfaces.append(render(template, _cues_for(plan, template, id_by_caption, rng)))
        template_ids.append(template.id)
    surface = surfaces[0] if len(surfaces) == 1 else join_compositional(*surfaces)

    return collection, input_timeline, output_timeline, surface, template_ids, seq.sequence_id


def _build_sample(
    manifest: SourceManifest,
    ops: tuple[Op, ...],
    cue: Cue,
    cfg: GenConfig,
    templates: TemplateSet,
    rng: random.Random,
    sample_id: str,
) -> tuple[Sample, int]:
    label = "+".join(op.value for op in ops)
    failures = 0
    for _ in range(cfg.max_retries):
        length = cfg.draw_length(rng)
        try:
            collection, input_tl, output_tl, surface, template_ids, seq_id = _attempt(
                manifest, ops, cue, cfg, templates, rng, length
            )
        except _Retry:
            failures += 1
            continue
        got, _ = apply_text(surface, input_tl, collection)
        if got.entries != output_tl.entries:
            raise GenerationError(
                f"round-trip self-check failed for {sample_id} ({surface!r})"
            )
        sample = Sample(
            sample_id=sample_id,
            task=label,
            cue=cue.value,
            collection=collection,
            input_timeline=input_tl,
            instruction=surface,
            output_timeline=output_tl,
            meta={
                "seed": cfg.seed,
                "template_ids": template_ids,
                "length": len(output_tl),
                "sequence_id": seq_id,
            },
        )
        return sample, failures
    raise GenerationError(
        f"gave up on task {label}/{cue.value} after {cfg.max_retries} attempts "
        f"(source data too poor in distinct captions?)"
    )


def make_sample(
    manifest: SourceManifest,
    task: TaskKind,
    cfg: GenConfig,
    templates: TemplateSet,
    rng: random.Random,
    sample_id: str = "sample-0000",
) -> Sample:
    """Generate one single-op sample of the given kind."""
    sample, _ = _build_sample(manifest, (task.op,), task.cue, cfg, templates, rng, sample_id)
    return sample


def make_compositional(
    manifest: SourceManifest,
    pair: tuple[Op, Op],
    cfg: GenConfig,
    templates: TemplateSet,
    rng: random.Random,
    sample_id: str = "sample-0000",
) -> Sample:
    """Generate one two-op sample; both ops use semantic cues."""
    sample, _ = _build_sample(manifest, pair, Cue.SEMANTIC, cfg, templates, rng, sample_id)
    return sample


def _buckets(cfg: GenConfig) -> list[tuple[str, tuple[Op, ...], Cue]]:
    if cfg.compositional:
        return [
            (f"{a.value}+{b.value}/semantic", (a, b), Cue.SEMANTIC)
            for a, b in COMPOSITIONAL_PAIRS
        ]
    return [(k.name, (k.op,), k.cue) for k in ALL_TASK_KINDS]


def iter_dataset(
    manifest: SourceManifest, cfg: GenConfig, templates: TemplateSet
) -> Iterator[tuple[str, Sample, int]]:
    """Yield (bucket name, sample, redraws) across all buckets."""
    for bucket, ops, cue in _buckets(cfg):
        for index in range(cfg.samples_per_task):
            rng = random.Random(derive_seed(cfg.seed, bucket, index))
            sample_id = f"{bucket.replace('/', '-')}-{index:04d}"
            sample, failures = _build_sample(
                manifest, ops, cue, cfg, templates, rng, sample_id
            )
            yield bucket, sample, failures


def make_dataset(
    manifest: SourceManifest, cfg: GenConfig, templates: TemplateSet
) -> tuple[list[Sample], dict]:
    """Generate the full dataset plus a per-bucket summary."""
    samples: list[Sample] = []
    counts: dict[str, int] = {bucket: 0 for bucket, _, _ in _buckets(cfg)}
    skipped = 0
    for bucket, sample, failures in iter_dataset(manifest, cfg, templates):
        samples.append(sample)
        counts[bucket] += 1
        skipped += failures
    summary = {
        "total": len(samples),
        "counts": counts,
        "skipped": skipped,
        "seed": cfg.seed,
        "split": cfg.split,
    }
    return samples, summary


# --- bundled synthetic source data ------------------------------------------

_SUBJECTS = (
    "a heron", "a fox", "two children", "an old tram", "a street vendor",
    "a violinist", "a fishing boat", "a mountain goat", "a paper kite",
    "a night train", "a ceramic bowl", "a lighthouse keeper", "a red bicycle",
    "a swarm of bees", "a chess player", "a hot air balloon", "a stray cat",
    "a market stall", "a snowplow", "a tide pool", "a garden spider",
    "a brass band", "a sailboat", "a lantern parade", "an apple orchard",
    "a climbing team", "a river barge", "a glassblower", "a desert caravan",
    "a carousel", "a beekeeper", "a kayaker",
)
_ACTIONS = (
    "drifting past", "circling above", "resting beside", "crossing",
    "winding through", "sheltering under", "gliding over", "leaning against",
    "rolling toward", "emerging from", "fading behind", "docked near",
    "climbing up", "sliding down", "parked outside", "spinning beside",
    "floating across", "wading through", "halting before", "turning around",
    "stretching along", "hidden behind", "glowing near", "tilting toward",
    "anchored off", "marching past", "balanced on", "swaying over",
    "scattered across", "nestled inside",
)
_SCENES = (
    "the old pier", "a foggy valley", "the city square", "a frozen canal",
    "the harbor wall", "a wheat field", "the canyon rim", "a quiet courtyard",
    "the railway bridge", "a cliffside path", "the village green",
    "a flooded meadow", "the lighthouse steps", "a cobbled alley",
    "the orchard gate", "a moonlit lake", "the festival tents",
    "a painted mural", "the salt flats", "a bamboo grove", "the ferry landing",
    "a ruined abbey", "the glass atrium", "a mossy waterfall",
    "the winter market", "a dusty crossroads", "the botanical dome",
    "a tidal causeway", "the observatory hill", "a paper lantern shop",
)


def build_synthetic_manifest(
    sequences: int = 40, items_per_sequence: int = 24, seed: int = 1387
) -> SourceManifest:
    """Procedurally captioned source sequences with globally unique captions."""
    rng = random.Random(seed)
    total = sequences * items_per_sequence
    space = len(_SUBJECTS) * len(_ACTIONS) * len(_SCENES)
    if total > space:
        raise GenerationError(f"cannot mint {total} unique captions from {space} combos")
    picks = rng.sample(range(space), total)
    out = []
    for s in range(sequences):
        items = []
        for j in range(items_per_sequence):
            code = picks[s * items_per_sequence + j]
            subject = _SUBJECTS[code % len(_SUBJECTS)]
            code //= len(_SUBJECTS)
            action = _ACTIONS[code % len(_ACTIONS)]
            scene = _SCENES[code // len(_ACTIONS)]
            items.append(
                SourceItem(
                    caption=f"{subject} {action} {scene}",
                    uri=f"synthetic://seq{s:02d}/item{j:02d}",
                )
            )
        out.append(SourceSequence(sequence_id=f"seq{s:02d}", items=tuple(items)))
    return SourceManifest(sequences=tuple(out))
