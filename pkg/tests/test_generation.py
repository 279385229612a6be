"""Tests for dataset generation: ingest, construction laws, determinism."""

from __future__ import annotations

import json
import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assembly_bench.core import Cue, Instruction, Op, TaskKind, normalize_caption
from assembly_bench.errors import AssemblyError, GenerationError, ParseError
from assembly_bench.executor import apply_text, parse_instruction, execute
from assembly_bench.generation import (
    COMPOSITIONAL_PAIRS,
    GenConfig,
    SourceItem,
    SourceManifest,
    SourceSequence,
    build_synthetic_manifest,
    default_manifest,
    derive_seed,
    ingest_manifest,
    iter_dataset,
    make_compositional,
    make_dataset,
    make_sample,
    parse_manifest_text,
)
from assembly_bench.templates import load_templates

TEMPLATES = load_templates()
MANIFEST = default_manifest()

QUOTED = re.compile(r'"([^"]*)"')


def small_cfg(**kw) -> GenConfig:
    return GenConfig(**{"samples_per_task": 4, "seed": 11, **kw})


# --- manifest ingest --------------------------------------------------------


def test_ingest_json_with_sequences_key(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(
        json.dumps(
            {
                "sequences": [
                    {"sequence_id": "a", "items": [{"caption": "x one"}, {"caption": "x two"}]},
                    {"sequence_id": "b", "items": [{"caption": "y one"}, {"caption": "y two"}]},
                ]
            }
        )
    )
    manifest = ingest_manifest(str(path))
    assert len(manifest.sequences) == 2
    assert manifest.warnings == 0
    assert manifest.sequences[0].items[0].caption == "x one"


def test_ingest_drops_short_sequences_with_warning(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(
        json.dumps(
            [
                {"sequence_id": "a", "items": [{"caption": "only one"}]},
                {"sequence_id": "b", "items": [{"caption": "y one"}, {"caption": "y two"}]},
            ]
        )
    )
    manifest = ingest_manifest(str(path))
    assert [s.sequence_id for s in manifest.sequences] == ["b"]
    assert manifest.warnings == 1


def test_ingest_missing_file():
    with pytest.raises(ParseError):
        ingest_manifest("/nonexistent/manifest.json")


def test_ingest_jsonl_reports_bad_line(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text(
        '{"sequence_id": "a", "items": [{"caption": "x"}, {"caption": "y"}]}\n'
        "{not json}\n"
    )
    with pytest.raises(ParseError) as err:
        ingest_manifest(str(path))
    assert err.value.line == 2


def test_ingest_rejects_duplicate_sequence_ids():
    text = json.dumps(
        [
            {"sequence_id": "a", "items": [{"caption": "x"}, {"caption": "y"}]},
            {"sequence_id": "a", "items": [{"caption": "p"}, {"caption": "q"}]},
        ]
    )
    with pytest.raises(ParseError):
        parse_manifest_text(text)


def test_ingest_drops_empty_caption_sequences():
    text = json.dumps(
        [
            {"sequence_id": "a", "items": [{"caption": "  "}, {"caption": "y"}]},
            {"sequence_id": "b", "items": [{"caption": "p"}, {"caption": "q"}]},
        ]
    )
    manifest = parse_manifest_text(text)
    assert [s.sequence_id for s in manifest.sequences] == ["b"]
    assert manifest.warnings == 1


# --- config validation ------------------------------------------------------


def test_config_rejects_bad_lengths():
    with pytest.raises(GenerationError):
        GenConfig(timeline_length=1)
    with pytest.raises(GenerationError):
        GenConfig(timeline_length=(2, 25))
    with pytest.raises(GenerationError):
        GenConfig(timeline_length=20)


def test_config_rejects_small_collection():
    with pytest.raises(GenerationError):
        GenConfig(collection_size=5, timeline_length=5)
    GenConfig(collection_size=6, timeline_length=5)  # exactly length+1 is fine


def test_config_compositional_needs_length_three():
    with pytest.raises(GenerationError):
        GenConfig(compositional=True, timeline_length=(2, 5))
    GenConfig(compositional=True, timeline_length=(3, 5))


# --- construction laws ------------------------------------------------------


def one_sample(task: TaskKind, seed=3, **kw):
    cfg = GenConfig(seed=seed, **kw)
    return make_sample(MANIFEST, task, cfg, TEMPLATES, random.Random(seed))


def test_insert_lengths():
    s = one_sample(TaskKind(Op.INSERT, Cue.POSITIONAL))
    assert len(s.input_timeline) == 4
    assert len(s.output_timeline) == 5


def test_remove_lengths():
    s = one_sample(TaskKind(Op.REMOVE, Cue.SEMANTIC))
    assert len(s.input_timeline) == 6
    assert len(s.output_timeline) == 5


def test_swap_differs_at_exactly_two_positions():
    s = one_sample(TaskKind(Op.SWAP, Cue.POSITIONAL))
    pairs = list(zip(s.input_timeline.entries, s.output_timeline.entries))
    assert sum(a != b for a, b in pairs) == 2
    assert sorted(s.input_timeline.entries) == sorted(s.output_timeline.entries)


def test_replace_differs_at_exactly_one_position():
    s = one_sample(TaskKind(Op.REPLACE, Cue.SEMANTIC))
    pairs = list(zip(s.input_timeline.entries, s.output_timeline.entries))
    assert len(s.input_timeline) == len(s.output_timeline)
    assert sum(a != b for a, b in pairs) == 1


def test_collection_closure_and_size():
    for task in (TaskKind(Op.INSERT, Cue.SEMANTIC), TaskKind(Op.REMOVE, Cue.POSITIONAL)):
        s = one_sample(task)
        assert len(s.collection) == 20
        for entry in list(s.input_timeline) + list(s.output_timeline):
            assert entry in s.collection


def test_sample_round_trip():
    for kind_index, task in enumerate(
        TaskKind(op, cue) for cue in Cue for op in Op
    ):
        s = one_sample(task, seed=100 + kind_index)
        got, _ = apply_text(s.instruction, s.input_timeline, s.collection)
        assert got.entries == s.output_timeline.entries, s.instruction


def test_semantic_cues_resolve_uniquely():
    for op in Op:
        s = one_sample(TaskKind(op, Cue.SEMANTIC), seed=77)
        cues = QUOTED.findall(s.instruction)
        assert cues
        for cue_text in cues:
            matches = [
                a
                for a in s.collection.assets
                if normalize_caption(a.caption) == normalize_caption(cue_text)
            ]
            assert len(matches) == 1, cue_text


# --- datasets ---------------------------------------------------------------


def test_dataset_counts_and_shape():
    samples, summary = make_dataset(MANIFEST, small_cfg(), TEMPLATES)
    assert summary["total"] == 32
    assert set(summary["counts"].values()) == {4}
    assert len({s.sample_id for s in samples}) == 32


def test_dataset_empty_when_zero_per_task():
    samples, summary = make_dataset(MANIFEST, small_cfg(samples_per_task=0), TEMPLATES)
    assert samples == []
    assert summary["total"] == 0
    assert all(v == 0 for v in summary["counts"].values())


def test_dataset_deterministic():
    a, _ = make_dataset(MANIFEST, small_cfg(), TEMPLATES)
    b, _ = make_dataset(MANIFEST, small_cfg(), TEMPLATES)
    assert a == b


def test_samples_independent_of_order():
    cfg = small_cfg()
    full = {s.sample_id: s for _, s, _ in iter_dataset(MANIFEST, cfg, TEMPLATES)}
    task = TaskKind(Op.SWAP, Cue.SEMANTIC)
    rng = random.Random(derive_seed(cfg.seed, task.name, 2))
    alone = make_sample(MANIFEST, task, cfg, TEMPLATES, rng, sample_id="swap-semantic-0002")
    assert full["swap-semantic-0002"] == alone


def test_multi_length_ranges():
    cfg = GenConfig(timeline_length=(2, 19), samples_per_task=12, seed=5)
    samples, _ = make_dataset(MANIFEST, cfg, TEMPLATES)
    lengths = {len(s.output_timeline) for s in samples}
    assert lengths <= set(range(2, 20))
    assert len(lengths) > 10  # 96 draws over 18 values: broad coverage
    for s in samples:
        assert s.meta["length"] == len(s.output_timeline)
        assert len(s.collection) >= len(s.output_timeline) + 1
        got, _ = apply_text(s.instruction, s.input_timeline, s.collection)
        assert got.entries == s.output_timeline.entries


# --- compositional ----------------------------------------------------------


def test_compositional_pairs_enumerate_twelve():
    assert len(COMPOSITIONAL_PAIRS) == 12
    assert (Op.INSERT, Op.INSERT) not in COMPOSITIONAL_PAIRS


def test_compositional_round_trip_and_lengths():
    cfg = GenConfig(compositional=True, samples_per_task=3, seed=9)
    samples, summary = make_dataset(MANIFEST, cfg, TEMPLATES)
    assert summary["total"] == 36
    for s in samples:
        assert s.cue == "semantic"
        ops = s.task.split("+")
        delta = {"insert": 1, "remove": -1, "replace": 0, "swap": 0}
        expect = len(s.input_timeline) + delta[ops[0]] + delta[ops[1]]
        assert len(s.output_timeline) == expect
        got, _ = apply_text(s.instruction, s.input_timeline, s.collection)
        assert got.entries == s.output_timeline.entries


def test_compositional_order_matters_somewhere():
    cfg = GenConfig(compositional=True, samples_per_task=4, seed=21)
    samples, _ = make_dataset(MANIFEST, cfg, TEMPLATES)
    diverged = 0
    for s in samples:
        parsed = parse_instruction(s.instruction).instruction
        flipped = Instruction(surface=parsed.surface, ops=parsed.ops[::-1])
        try:
            got = execute(s.input_timeline, s.collection, flipped)
        except AssemblyError:
            diverged += 1
            continue
        if got.entries != s.output_timeline.entries:
            diverged += 1
    assert diverged > 0


def test_compositional_single_sample_api():
    rng = random.Random(4)
    cfg = GenConfig(compositional=True, seed=4)
    s = make_compositional(MANIFEST, (Op.INSERT, Op.REMOVE), cfg, TEMPLATES, rng)
    assert s.task == "insert+remove"
    assert len(s.output_timeline) == len(s.input_timeline)
    assert " Then, " in s.instruction


# --- failure paths ----------------------------------------------------------


def test_starved_manifest_raises():
    lonely = SourceManifest(
        sequences=(
            SourceSequence(
                "only",
                tuple(SourceItem(caption=f"thing number {i} here") for i in range(30)),
            ),
        )
    )
    with pytest.raises(GenerationError):
        make_sample(
            lonely, TaskKind(Op.REMOVE, Cue.POSITIONAL), GenConfig(seed=1), TEMPLATES,
            random.Random(1),
        )


def test_short_sequences_raise():
    stubby = SourceManifest(
        sequences=tuple(
            SourceSequence(
                f"s{k}", tuple(SourceItem(caption=f"cap {k} {i} word") for i in range(3))
            )
            for k in range(3)
        )
    )
    with pytest.raises(GenerationError):
        make_sample(
            stubby, TaskKind(Op.INSERT, Cue.POSITIONAL), GenConfig(seed=1), TEMPLATES,
            random.Random(1),
        )


def test_caption_collisions_exhaust_retries():
    # every window repeats a caption, so every attempt is discarded
    noisy = SourceManifest(
        sequences=tuple(
            SourceSequence(
                f"s{k}",
                tuple(SourceItem(caption=f"same caption {k}") for _ in range(8)),
            )
            for k in range(4)
        )
    )
    with pytest.raises(GenerationError) as err:
        make_sample(
            noisy, TaskKind(Op.SWAP, Cue.POSITIONAL), GenConfig(seed=1), TEMPLATES,
            random.Random(1),
        )
    assert "swap" in str(err.value)


# --- bundled manifest -------------------------------------------------------


def test_bundled_manifest_matches_builder():
    assert default_manifest() == build_synthetic_manifest()


def test_bundled_manifest_captions_unique_and_usable():
    caps = [it.caption for s in MANIFEST.sequences for it in s.items]
    assert len(caps) == len(set(caps))
    assert all(len(s.items) >= 20 for s in MANIFEST.sequences)


# --- property: generated samples always round-trip --------------------------

all_kinds = [TaskKind(op, cue) for cue in Cue for op in Op]


@settings(max_examples=1000, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    kind=st.sampled_from(all_kinds),
    length=st.integers(2, 9),
)
def test_generated_samples_round_trip_property(seed, kind, length):
    cfg = GenConfig(seed=seed, timeline_length=length, collection_size=max(12, length + 1))
    s = make_sample(MANIFEST, kind, cfg, TEMPLATES, random.Random(seed))
    got, _ = apply_text(s.instruction, s.input_timeline, s.collection)
    assert got.entries == s.output_timeline.entries
    assert len(s.collection) == cfg.collection_size
    for entry in list(s.input_timeline) + list(s.output_timeline):
        assert entry in s.collection


@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), op=st.sampled_from(list(Op)))
def test_semantic_cue_uniqueness_property(seed, op):
    cfg = GenConfig(seed=seed, timeline_length=5, collection_size=12)
    s = make_sample(MANIFEST, TaskKind(op, Cue.SEMANTIC), cfg, TEMPLATES, random.Random(seed))
    for cue_text in QUOTED.findall(s.instruction):
        matches = [
            a
            for a in s.collection.assets
            if normalize_caption(a.caption) == normalize_caption(cue_text)
        ]
        assert len(matches) == 1
