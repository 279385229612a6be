"""Domain types for timeline assembly: assets, collections, timelines, edit ops.

Everything here is an immutable value; the edit functions are pure and never
mutate their inputs. Positions are 1-based throughout, matching how the
instructions talk about them ("first", "second", "last").
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .errors import CapacityError, PositionError, UnknownIdError

ID_SPACE = 10_000
_ID_RE = re.compile(r"^\d{4}$")


class Last:
    """Sentinel for the position one past the current end (insert) or the
    final entry (remove). There is exactly one instance, LAST."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "LAST"


LAST = Last()

Position = Union[int, Last]


def is_valid_id(value: str) -> bool:
    """True when value is exactly four decimal digits."""
    return isinstance(value, str) and bool(_ID_RE.match(value))


def normalize_caption(text: str) -> str:
    """Canonical caption form used for semantic matching.

    Lowercases, trims, collapses runs of internal whitespace, and strips any
    trailing sentence punctuation.
    """
    out = " ".join(text.strip().lower().split())
    return out.rstrip(".!?")


@dataclass(frozen=True)
class Asset:
    """A captioned media element addressed by a 4-digit id token."""

    id: str
    caption: str
    uri: str | None = None

    def __post_init__(self):
        if not is_valid_id(self.id):
            raise UnknownIdError(self.id, f"malformed asset id {self.id!r}: want 4 digits")
        if not normalize_caption(self.caption):
            raise ValueError(f"asset {self.id}: caption is empty after normalization")


@dataclass(frozen=True)
class Collection:
    """An unordered pool of assets with a bidirectional id registry.

    The registry maps id -> index into `assets` and is validated to be a
    bijection at construction time.
    """

    assets: tuple[Asset, ...]
    registry: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.assets, tuple):
            object.__setattr__(self, "assets", tuple(self.assets))
        if not 1 <= len(self.assets) <= ID_SPACE:
            raise CapacityError(f"collection size {len(self.assets)} outside [1, {ID_SPACE}]")
        registry: dict[str, int] = {}
        for i, asset in enumerate(self.assets):
            if asset.id in registry:
                raise UnknownIdError(asset.id, f"duplicate asset id {asset.id!r} in collection")
            registry[asset.id] = i
        object.__setattr__(self, "registry", registry)

    def __contains__(self, asset_id: str) -> bool:
        return asset_id in self.registry

    def __len__(self) -> int:
        return len(self.assets)

    def get(self, asset_id: str) -> Asset:
        try:
            return self.assets[self.registry[asset_id]]
        except KeyError:
            raise UnknownIdError(asset_id) from None

    def ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.assets)


@dataclass(frozen=True)
class Timeline:
    """An ordered sequence of asset ids. May be empty mid-edit; benchmark
    samples always carry at least one entry."""

    entries: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.entries, tuple):
            object.__setattr__(self, "entries", tuple(self.entries))
        for entry in self.entries:
            if not is_valid_id(entry):
                raise UnknownIdError(entry, f"malformed timeline entry {entry!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, position: int) -> str:
        """1-based read access."""
        if not 1 <= position <= len(self.entries):
            raise PositionError(f"position {position} outside [1, {len(self.entries)}]")
        return self.entries[position - 1]


# --- cue references -------------------------------------------------------


@dataclass(frozen=True)
class PositionRef:
    """Points at a timeline slot by 1-based index or LAST."""

    index: Position

    def __post_init__(self):
        if not isinstance(self.index, Last):
            if not isinstance(self.index, int) or isinstance(self.index, bool) or self.index < 1:
                raise PositionError(f"position index must be >= 1, got {self.index!r}")


@dataclass(frozen=True)
class IdRef:
    """Points at an asset by its 4-digit id."""

    id: str

    def __post_init__(self):
        if not is_valid_id(self.id):
            raise UnknownIdError(self.id, f"malformed id reference {self.id!r}")


@dataclass(frozen=True)
class SemanticRef:
    """Points at an asset by the description of its content."""

    description: str

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError("semantic reference needs a non-empty description")


CueRef = Union[PositionRef, IdRef, SemanticRef]


# --- edit operations ------------------------------------------------------


@dataclass(frozen=True)
class Insert:
    element: CueRef
    at: PositionRef

    def __post_init__(self):
        if isinstance(self.element, PositionRef):
            raise PositionError("inserted element must be referenced by id or description")
        if not isinstance(self.at, PositionRef):
            raise PositionError(f"insert target must be a position, got {self.at!r}")


@dataclass(frozen=True)
class Remove:
    target: CueRef


@dataclass(frozen=True)
class Replace:
    target: CueRef
    replacement: CueRef

    def __post_init__(self):
        if isinstance(self.replacement, PositionRef):
            raise PositionError("replacement element must be referenced by id or description")


@dataclass(frozen=True)
class Swap:
    a: CueRef
    b: CueRef


EditOp = Union[Insert, Remove, Replace, Swap]


@dataclass(frozen=True)
class Instruction:
    """Surface text plus the structured ops it denotes (1 op, or 2 for the
    compositional flavor)."""

    surface: str
    ops: tuple[EditOp, ...]

    def __post_init__(self):
        if not isinstance(self.ops, tuple):
            object.__setattr__(self, "ops", tuple(self.ops))
        if not 1 <= len(self.ops) <= 2:
            raise ValueError(f"instruction carries {len(self.ops)} ops, want 1 or 2")


# --- task taxonomy --------------------------------------------------------


class Op(str, Enum):
    INSERT = "insert"
    REMOVE = "remove"
    REPLACE = "replace"
    SWAP = "swap"


class Cue(str, Enum):
    POSITIONAL = "positional"
    SEMANTIC = "semantic"


@dataclass(frozen=True, order=True)
class TaskKind:
    op: Op
    cue: Cue

    @property
    def name(self) -> str:
        return f"{self.op.value}/{self.cue.value}"


ALL_TASK_KINDS: tuple[TaskKind, ...] = tuple(
    TaskKind(op, cue) for cue in (Cue.POSITIONAL, Cue.SEMANTIC) for op in Op
)


def op_type(op: EditOp) -> Op:
    if isinstance(op, Insert):
        return Op.INSERT
    if isinstance(op, Remove):
        return Op.REMOVE
    if isinstance(op, Replace):
        return Op.REPLACE
    if isinstance(op, Swap):
        return Op.SWAP
    raise TypeError(f"not an edit op: {op!r}")


# --- registry + reconstruction -------------------------------------------


def assign_ids(count: int, rng: random.Random) -> list[str]:
    """Draw `count` distinct 4-digit ids without replacement.

    Deterministic for a fixed rng state; raises CapacityError when the id
    space cannot supply that many.
    """
    if count < 0:
        raise CapacityError(f"cannot assign {count} ids")
    if count > ID_SPACE:
        raise CapacityError(f"id space holds {ID_SPACE} ids, asked for {count}")
    return [f"{n:04d}" for n in rng.sample(range(ID_SPACE), count)]


def reconstruct(ids: list[str] | tuple[str, ...], collection: Collection) -> list[Asset]:
    """Resolve an ordered id list back to its assets (the reverse mapping)."""
    out = []
    for asset_id in ids:
        if asset_id not in collection:
            raise UnknownIdError(asset_id)
        out.append(collection.get(asset_id))
    return out


# --- pure edit application ------------------------------------------------


def _resolve_insert_pos(position: Position, length: int) -> int:
    if isinstance(position, Last):
        return length + 1
    if not 1 <= position <= length + 1:
        raise PositionError(f"insert position {position} outside [1, {length + 1}]")
    return position


def _resolve_entry_pos(position: Position, length: int, what: str) -> int:
    if isinstance(position, Last):
        if length == 0:
            raise PositionError(f"cannot {what} from an empty timeline")
        return length
    if not 1 <= position <= length:
        raise PositionError(f"{what} position {position} outside [1, {length}]")
    return position


def insert_at(timeline: Timeline, asset_id: str, at: Position) -> Timeline:
    """New timeline with asset_id inserted so it lands at position `at`."""
    pos = _resolve_insert_pos(at, len(timeline))
    entries = timeline.entries
    return Timeline(entries[: pos - 1] + (asset_id,) + entries[pos - 1 :])


def remove_at(timeline: Timeline, at: Position) -> Timeline:
    """New timeline with the entry at `at` dropped."""
    pos = _resolve_entry_pos(at, len(timeline), "remove")
    entries = timeline.entries
    return Timeline(entries[: pos - 1] + entries[pos:])


def replace_at(timeline: Timeline, at: int, asset_id: str) -> Timeline:
    """New timeline with position `at` holding asset_id instead."""
    if isinstance(at, Last):
        raise PositionError("replace_at takes an explicit index")
    pos = _resolve_entry_pos(at, len(timeline), "replace")
    entries = timeline.entries
    return Timeline(entries[: pos - 1] + (asset_id,) + entries[pos:])


def swap_positions(timeline: Timeline, a: int, b: int) -> Timeline:
    """New timeline with the entries at `a` and `b` exchanged."""
    if isinstance(a, Last) or isinstance(b, Last):
        raise PositionError("swap_positions takes explicit indices")
    length = len(timeline)
    pa = _resolve_entry_pos(a, length, "swap")
    pb = _resolve_entry_pos(b, length, "swap")
    entries = list(timeline.entries)
    entries[pa - 1], entries[pb - 1] = entries[pb - 1], entries[pa - 1]
    return Timeline(tuple(entries))
