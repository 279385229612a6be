"""Prompt serialization and model-output timeline parsing.

The prompt layout is canonical: a fixed system line, the collection as a
JSON array, the current timeline as a JSON object keyed "1".."l", and the
instruction line. Byte output is deterministic and pinned by golden files.
"""

from __future__ import annotations

import json
import re

from .errors import (
    MissingClipIdError,
    NonConsecutiveKeysError,
    NoTimelineFoundError,
)
from .generation import Sample

SYSTEM_LINE = (
    "You are presented with a collection of images, you have to modify the "
    "timeline accordingly, to complete the instruction you are given."
)
PLACEHOLDER = "<VisualHere>"

MODE_PLACEHOLDER = "placeholder"
MODE_CAPTION = "caption"
PROMPT_MODES = (MODE_PLACEHOLDER, MODE_CAPTION)

STRICT = "strict"
LENIENT = "lenient"


def format_timeline(ids) -> str:
    """Canonical JSON text for an id sequence, the same shape the prompt
    embeds and parse_timeline_output accepts under strict parsing."""
    timeline = {str(i): {"clip_id": entry} for i, entry in enumerate(ids, start=1)}
    return json.dumps(timeline, indent=4, ensure_ascii=False)


def build_prompt(sample: Sample, mode: str = MODE_PLACEHOLDER) -> str:
    """Render one sample as prompt text. Placeholder mode stands a
    '<VisualHere>' token in for each visual; caption mode inlines captions
    (the text-only variant)."""
    if mode not in PROMPT_MODES:
        raise ValueError(f"unknown prompt mode {mode!r}")
    records = [
        {
            "clip_id": asset.id,
            "clip": PLACEHOLDER if mode == MODE_PLACEHOLDER else asset.caption,
        }
        for asset in sample.collection.assets
    ]
    parts = [
        SYSTEM_LINE,
        "Collection:",
        json.dumps(records, indent=4, ensure_ascii=False),
        "The current timeline is:",
        format_timeline(sample.input_timeline),
        f"Instruction: {sample.instruction}",
    ]
    return "\n".join(parts) + "\n"


def split_on_placeholder(prompt: str) -> list[str]:
    """Segments around each '<VisualHere>'; joining them back with the
    placeholder reproduces the prompt exactly."""
    return prompt.split(PLACEHOLDER)


# --- model output parsing ---------------------------------------------------

_BARE_KEY_RE = re.compile(r"([{,]\s*)(\d+)(\s*:)")
_BARE_CLIP_ID_RE = re.compile(r'("clip_id"\s*:\s*)(\d+)')
_TRAILING_COMMA_RE = re.compile(r",(\s*[}\]])")


def _first_balanced_block(text: str) -> str | None:
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string: str | None = None
        i = start
        while i < len(text):
            ch = text[i]
            if in_string is not None:
                if ch == "\\":
                    i += 2
                    continue
                if ch == in_string:
                    in_string = None
            elif ch in "\"'":
                in_string = ch
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start : i + 1]
            i += 1
        start = text.find("{", start + 1)
    return None


def _repair(block: str) -> str:
    if "'" in block and '"' not in block:
        block = block.replace("'", '"')
    block = _BARE_KEY_RE.sub(r'\1"\2"\3', block)
    block = _BARE_CLIP_ID_RE.sub(r'\1"\2"', block)
    block = _TRAILING_COMMA_RE.sub(r"\1", block)
    return block


def _normalize_clip_id(value) -> str:
    if isinstance(value, bool):
        raise MissingClipIdError(f"clip_id {value!r} is not an id")
    if isinstance(value, int):
        if value < 0:
            raise MissingClipIdError(f"clip_id {value} is negative")
        return f"{value:04d}"
    if isinstance(value, str):
        token = value.strip()
        if token.isdigit():
            return token.zfill(4) if len(token) < 4 else token
        raise MissingClipIdError(f"clip_id {value!r} is not numeric")
    raise MissingClipIdError(f"clip_id {value!r} has unsupported type")


def _ids_from_object(obj) -> list[str]:
    if not isinstance(obj, dict):
        raise NoTimelineFoundError("response is not a timeline object")
    keyed: dict[int, str] = {}
    for key, record in obj.items():
        text = str(key).strip()
        if not text.isdigit():
            raise NonConsecutiveKeysError(f"timeline key {key!r} is not an integer")
        index = int(text)
        if not isinstance(record, dict) or "clip_id" not in record:
            raise MissingClipIdError(f"timeline entry {key!r} lacks a clip_id")
        keyed[index] = _normalize_clip_id(record["clip_id"])
    if sorted(keyed) != list(range(1, len(keyed) + 1)):
        raise NonConsecutiveKeysError(
            f"timeline keys {sorted(keyed)} are not 1..{len(keyed)}"
        )
    return [keyed[i] for i in range(1, len(keyed) + 1)]


def parse_timeline_output(text: str, strictness: str = LENIENT) -> list[str]:
    """Extract the predicted timeline from a model response.

    Strict mode takes the whole response as one JSON object. Lenient mode
    pulls out the first balanced {...} block and repairs common deviations
    (single quotes, unquoted integer keys and ids, trailing commas) before
    applying the same structural rules.
    """
    if strictness == STRICT:
        try:
            obj = json.loads(text.strip())
        except json.JSONDecodeError as exc:
            raise NoTimelineFoundError(f"response is not valid JSON: {exc.msg}") from exc
        return _ids_from_object(obj)
    if strictness != LENIENT:
        raise ValueError(f"unknown strictness {strictness!r}")
    block = _first_balanced_block(text)
    if block is None:
        raise NoTimelineFoundError("no {...} block in response")
    try:
        obj = json.loads(_repair(block))
    except json.JSONDecodeError as exc:
        raise NoTimelineFoundError(f"timeline block does not parse: {exc.msg}") from exc
    return _ids_from_object(obj)
