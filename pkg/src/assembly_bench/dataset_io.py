"""Dataset and prediction persistence (JSONL)."""

from __future__ import annotations

import json
import os
from typing import Iterable

from .core import Asset, Collection, Timeline
from .errors import AssemblyError, SchemaError
from .generation import Sample

_FIELDS = (
    "sample_id",
    "task",
    "cue",
    "collection",
    "input_timeline",
    "instruction",
    "output_timeline",
    "meta",
)


def sample_to_record(sample: Sample) -> dict:
    return {
        "sample_id": sample.sample_id,
        "task": sample.task,
        "cue": sample.cue,
        "collection": [
            {"clip_id": a.id, "caption": a.caption, "uri": a.uri}
            for a in sample.collection.assets
        ],
        "input_timeline": list(sample.input_timeline.entries),
        "instruction": sample.instruction,
        "output_timeline": list(sample.output_timeline.entries),
        "meta": sample.meta,
    }


def record_to_sample(record: dict) -> Sample:
    missing = [f for f in _FIELDS if f not in record]
    if missing:
        raise SchemaError(f"record missing fields {missing}")
    try:
        collection = Collection(
            tuple(
                Asset(id=e["clip_id"], caption=e["caption"], uri=e.get("uri"))
                for e in record["collection"]
            )
        )
        return Sample(
            sample_id=record["sample_id"],
            task=record["task"],
            cue=record["cue"],
            collection=collection,
            input_timeline=Timeline(tuple(record["input_timeline"])),
            instruction=record["instruction"],
            output_timeline=Timeline(tuple(record["output_timeline"])),
            meta=dict(record["meta"]),
        )
    except (AssemblyError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad sample record: {exc}") from exc


def write_dataset(samples: Iterable[Sample], path: str) -> int:
    """Write one sample per line; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample_to_record(sample), ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def read_dataset(path: str) -> list[Sample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"bad JSON: {exc.msg}", line=lineno) from exc
            try:
                samples.append(record_to_sample(record))
            except SchemaError as exc:
                raise SchemaError(str(exc), line=lineno) from exc
    return samples


def write_predictions(predictions: dict[str, str], path: str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for sample_id, response in predictions.items():
            fh.write(
                json.dumps(
                    {"sample_id": sample_id, "response": response}, ensure_ascii=False
                )
            )
            fh.write("\n")
            count += 1
    return count


def read_predictions(path: str) -> dict[str, str]:
    """Predictions come as JSONL of {sample_id, response} or as a directory
    of per-sample text files named <sample_id>.txt."""
    if os.path.isdir(path):
        out: dict[str, str] = {}
        for name in sorted(os.listdir(path)):
            if not name.endswith(".txt"):
                continue
            with open(os.path.join(path, name), encoding="utf-8") as fh:
                out[name[: -len(".txt")]] = fh.read()
        return out
    predictions: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"bad JSON: {exc.msg}", line=lineno) from exc
            if (
                not isinstance(record, dict)
                or "sample_id" not in record
                or "response" not in record
            ):
                raise SchemaError("prediction records need sample_id and response", line=lineno)
            if record["sample_id"] in predictions:
                raise SchemaError(
                    f"duplicate prediction for {record['sample_id']!r}", line=lineno
                )
            predictions[record["sample_id"]] = str(record["response"])
    return predictions
