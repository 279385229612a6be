"""Shared test fixtures: a small hand-pinned sample used for golden files."""

from __future__ import annotations

from assembly_bench.core import Asset, Collection, Timeline
from assembly_bench.generation import Sample


def fixture_sample() -> Sample:
    """A fixed swap sample. Pinned by hand so prompt golden files only change
    when the serialization format itself changes."""
    collection = Collection(
        (
            Asset("0935", "a tabby cat stretching on a windowsill", "fixture://c0"),
            Asset("0894", "rain falling on a tin roof", "fixture://c1"),
            Asset("0103", "a child flying a red kite", None),
            Asset("4864", "waves breaking against the rocks", "fixture://c3"),
            Asset("0977", "a baker dusting flour over dough", None),
            Asset("7182", "fireworks above the harbor", "fixture://c5"),
        )
    )
    return Sample(
        sample_id="fixture-swap-0000",
        task="swap",
        cue="positional",
        collection=collection,
        input_timeline=Timeline(("0894", "4864", "0103", "0977", "0935")),
        instruction="Exchange the second and third shot",
        output_timeline=Timeline(("0894", "0103", "4864", "0977", "0935")),
        meta={"seed": 0, "template_ids": ["pinned"], "length": 5, "sequence_id": "fixture"},
    )
