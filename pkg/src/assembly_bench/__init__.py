"""Benchmark tooling for instructed timeline assembly.

Generates editing tasks over captioned asset collections, executes the
instructions with a rule-based engine, serializes prompts, and scores model
outputs by exact timeline match.
"""

from .core import (
    ALL_TASK_KINDS,
    Asset,
    Collection,
    Cue,
    IdRef,
    Insert,
    Instruction,
    LAST,
    Op,
    PositionRef,
    Remove,
    Replace,
    SemanticRef,
    Swap,
    TaskKind,
    Timeline,
    assign_ids,
    insert_at,
    normalize_caption,
    reconstruct,
    remove_at,
    replace_at,
    swap_positions,
)
from .errors import AssemblyError

__version__ = "0.1.0"

__all__ = [
    "ALL_TASK_KINDS",
    "Asset",
    "AssemblyError",
    "Collection",
    "Cue",
    "IdRef",
    "Insert",
    "Instruction",
    "LAST",
    "Op",
    "PositionRef",
    "Remove",
    "Replace",
    "SemanticRef",
    "Swap",
    "TaskKind",
    "Timeline",
    "__version__",
    "assign_ids",
    "insert_at",
    "normalize_caption",
    "reconstruct",
    "remove_at",
    "replace_at",
    "swap_positions",
]
