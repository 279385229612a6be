"""Rule-based instruction executor: text -> edit ops -> new timeline.

The grammar covers the shipped template corpus plus small lexical variants:
operation verbs, ordinal words, 'last'/'end', 'position N', 'shot/clip with
ID NNNN', bare 'shot NN', double-quoted semantic descriptions, and the
two-clause joiner 'Then,'. Anything outside that raises ParseError with the
offset of the first offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core import (
    Collection,
    CueRef,
    IdRef,
    Insert,
    Instruction,
    LAST,
    Last,
    PositionRef,
    Remove,
    Replace,
    SemanticRef,
    Swap,
    Timeline,
    insert_at,
    normalize_caption,
    remove_at,
    replace_at,
    swap_positions,
)
from .errors import (
    AmbiguousError,
    AssemblyError,
    NoMatchError,
    ParseError,
    PositionError,
    UnknownIdError,
)
from .templates import ORDINALS

INSERT_VERBS = frozenset({"add", "insert", "append", "place", "put"})
REMOVE_VERBS = frozenset({"remove", "delete"})
REPLACE_VERBS = frozenset({"replace", "change", "substitute"})
SWAP_VERBS = frozenset({"swap", "exchange", "interchange"})
OP_VERBS = INSERT_VERBS | REMOVE_VERBS | REPLACE_VERBS | SWAP_VERBS
# Verbs that may govern the reversed replace form "<verb> X in place of Y".
MARKER_VERBS = frozenset({"put", "place", "use"})

POSITION_WORDS = {"position", "positions", "spot", "slot", "point"}
LAST_WORDS = frozenset({"last", "final", "end"})
FIRST_WORDS = frozenset({"beginning", "start", "front"})

_ORDINAL_INDEX = {word: i + 1 for i, word in enumerate(ORDINALS)}

_TOKEN_RE = re.compile(
    r'"(?P<quoted>[^"]*)"'
    r"|(?P<number>\d+)(?P<ordsuf>st|nd|rd|th)?"
    r"|(?P<word>[A-Za-z][A-Za-z'\-]*)"
    r"|(?P<punct>[.,;:])"
)

_QUOTED_POSITION_RE = re.compile(r"^(?:position\s+(\d+)|(\d{1,2})(?:st|nd|rd|th))$")
_QUOTED_ID_RE = re.compile(r"^(?:(?:shot|clip)\s+)?(?:with\s+)?id\s+(\d{1,4})$")


@dataclass(frozen=True)
class Token:
    kind: str  # quoted | number | word | punct
    text: str  # matched source text (without quotes for quoted tokens)
    start: int
    end: int
    ordinal: bool = False  # number carried an st/nd/rd/th suffix

    @property
    def lower(self) -> str:
        return self.text.lower()


@dataclass(frozen=True)
class ParseResult:
    instruction: Instruction
    spans: tuple[tuple[int, int], ...]  # (start, end) per op, in source order


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", position=pos)
        if m.lastgroup == "ordsuf" or m.group("number") is not None:
            tokens.append(
                Token(
                    "number",
                    m.group("number"),
                    m.start(),
                    m.end(),
                    ordinal=m.group("ordsuf") is not None,
                )
            )
        elif m.group("quoted") is not None:
            tokens.append(Token("quoted", m.group("quoted"), m.start(), m.end()))
        elif m.group("word") is not None:
            tokens.append(Token("word", m.group("word"), m.start(), m.end()))
        else:
            tokens.append(Token("punct", m.group("punct"), m.start(), m.end()))
        pos = m.end()
    return tokens


def _split_clauses(tokens: list[Token]) -> list[list[Token]]:
    breaks = [i for i, t in enumerate(tokens) if t.kind == "word" and t.lower == "then"]
    if len(breaks) > 1:
        raise ParseError("at most two clauses are supported", position=tokens[breaks[1]].start)
    if breaks:
        parts = [tokens[: breaks[0]], tokens[breaks[0] + 1 :]]
    else:
        parts = [tokens]
    clauses = []
    for part in parts:
        while part and part[0].kind == "punct":
            part = part[1:]
        while part and part[-1].kind == "punct":
            part = part[:-1]
        if not part:
            where = tokens[0].start if tokens else 0
            raise ParseError("empty clause", position=where)
        clauses.append(part)
    return clauses


def _find_marker(tokens: list[Token]) -> tuple[int, int] | None:
    """Locate the 'in place of' window; returns (start index, end index exclusive)."""
    words = [(i, t.lower) for i, t in enumerate(tokens) if t.kind == "word"]
    for k in range(len(words) - 2):
        if (
            words[k][1] == "in"
            and words[k + 1][1] == "place"
            and words[k + 2][1] == "of"
            and words[k + 1][0] == words[k][0] + 1
            and words[k + 2][0] == words[k][0] + 2
        ):
            return words[k][0], words[k][0] + 3
    return None


def classify_quoted(text: str) -> CueRef | None:
    """How the parser reads a double-quoted string: quoted positions and
    quoted id phrases are honored as such, anything else is a semantic
    description. None for text that is empty after normalization."""
    inner = normalize_caption(text)
    if inner in _ORDINAL_INDEX:
        return PositionRef(_ORDINAL_INDEX[inner])
    if inner in LAST_WORDS:
        return PositionRef(LAST)
    m = _QUOTED_POSITION_RE.match(inner)
    if m:
        return PositionRef(int(m.group(1) or m.group(2)))
    m = _QUOTED_ID_RE.match(inner)
    if m:
        return IdRef(m.group(1).zfill(4))
    if not inner:
        return None
    return SemanticRef(text)


def caption_is_safe_cue(caption: str) -> bool:
    """True when quoting this caption yields a semantic reference (it cannot
    be mistaken for a position or id phrase, and contains no double quote)."""
    if '"' in caption:
        return False
    return isinstance(classify_quoted(caption), SemanticRef)


def _reinterpret_quoted(token: Token) -> CueRef:
    ref = classify_quoted(token.text)
    if ref is None:
        raise ParseError("empty quoted description", position=token.start)
    return ref


def _scan_refs(tokens: list[Token], skip: set[int]) -> list[CueRef]:
    """Collect cue references left to right; everything else must be filler."""
    refs: list[CueRef] = []
    i = 0
    n = len(tokens)
    while i < n:
        if i in skip:
            i += 1
            continue
        tok = tokens[i]
        if tok.kind == "punct":
            i += 1
            continue
        if tok.kind == "quoted":
            refs.append(_reinterpret_quoted(tok))
            i += 1
            continue
        if tok.kind == "number":
            if tok.ordinal:
                refs.append(PositionRef(int(tok.text)))
                i += 1
                continue
            raise ParseError(
                f"number {tok.text!r} needs an anchor (ordinal, 'position N', or 'ID N')",
                position=tok.start,
            )
        word = tok.lower
        if word in OP_VERBS:
            raise ParseError(f"unexpected second operation {tok.text!r}", position=tok.start)
        if word in _ORDINAL_INDEX:
            refs.append(PositionRef(_ORDINAL_INDEX[word]))
        elif word in LAST_WORDS:
            refs.append(PositionRef(LAST))
        elif word in FIRST_WORDS:
            refs.append(PositionRef(1))
        elif word in POSITION_WORDS:
            nxt = tokens[i + 1] if i + 1 < n and (i + 1) not in skip else None
            if nxt is not None and nxt.kind == "number" and not nxt.ordinal:
                refs.append(PositionRef(int(nxt.text)))
                i += 1
        elif word == "id":
            nxt = tokens[i + 1] if i + 1 < n and (i + 1) not in skip else None
            if nxt is None or nxt.kind != "number":
                raise ParseError("'ID' must be followed by a number", position=tok.start)
            if len(nxt.text) > 4:
                raise ParseError(f"asset id {nxt.text!r} exceeds 4 digits", position=nxt.start)
            refs.append(IdRef(nxt.text.zfill(4)))
            i += 1
        elif word in ("shot", "clip", "shots", "clips"):
            nxt = tokens[i + 1] if i + 1 < n and (i + 1) not in skip else None
            if nxt is not None and nxt.kind == "number" and not nxt.ordinal:
                if len(nxt.text) > 4:
                    raise ParseError(
                        f"asset id {nxt.text!r} exceeds 4 digits", position=nxt.start
                    )
                refs.append(IdRef(nxt.text.zfill(4)))
                i += 1
        # any other word is filler
        i += 1
    return refs


def _is_element(ref: CueRef) -> bool:
    return isinstance(ref, (IdRef, SemanticRef))


def _parse_clause(tokens: list[Token]) -> tuple[object, tuple[int, int]]:
    span = (tokens[0].start, tokens[-1].end)
    marker = _find_marker(tokens)

    if marker is not None:
        verb_idx = None
        for i, t in enumerate(tokens[: marker[0]]):
            if t.kind == "word" and t.lower in (OP_VERBS | {"use"}):
                verb_idx = i
                break
        if verb_idx is None:
            raise ParseError("no operation verb before 'in place of'", position=span[0])
        verb = tokens[verb_idx].lower
        if verb not in MARKER_VERBS:
            raise ParseError(
                f"{verb!r} cannot govern 'in place of' (use put/place/use)",
                position=tokens[verb_idx].start,
            )
        skip = set(range(marker[0], marker[1])) | {verb_idx}
        for i, t in enumerate(tokens):
            if i in skip or t.kind != "word":
                continue
            if t.lower in OP_VERBS or t.lower == "use":
                raise ParseError(f"unexpected second operation {t.text!r}", position=t.start)
        before = _scan_refs(tokens[: marker[0]], {verb_idx})
        after = _scan_refs(tokens[marker[1] :], set())
        if len(before) != 1 or len(after) != 1:
            raise ParseError(
                "'in place of' takes one replacement and one target", position=span[0]
            )
        replacement, target = before[0], after[0]
        if not _is_element(replacement):
            raise ParseError("replacement must name an element, not a position", position=span[0])
        return Replace(target=target, replacement=replacement), span

    verb_idx = None
    for i, t in enumerate(tokens):
        if t.kind == "word" and t.lower in OP_VERBS:
            verb_idx = i
            break
    if verb_idx is None:
        raise ParseError("no operation verb found", position=tokens[0].start)
    verb = tokens[verb_idx].lower
    refs = _scan_refs(tokens, {verb_idx})

    if verb in INSERT_VERBS:
        positions = [r for r in refs if isinstance(r, PositionRef)]
        elements = [r for r in refs if _is_element(r)]
        if len(positions) != 1 or len(elements) != 1:
            raise ParseError(
                "insert takes one element and one target position", position=span[0]
            )
        return Insert(element=elements[0], at=positions[0]), span
    if verb in REMOVE_VERBS:
        if len(refs) != 1:
            raise ParseError("remove takes exactly one reference", position=span[0])
        return Remove(target=refs[0]), span
    if verb in REPLACE_VERBS:
        if len(refs) != 2:
            raise ParseError("replace takes a target and a replacement", position=span[0])
        target, replacement = refs
        if not _is_element(replacement):
            raise ParseError("replacement must name an element, not a position", position=span[0])
        return Replace(target=target, replacement=replacement), span
    if len(refs) != 2:
        raise ParseError("swap takes exactly two references", position=span[0])
    return Swap(a=refs[0], b=refs[1]), span


def parse_instruction(surface: str) -> ParseResult:
    tokens = tokenize(surface)
    if not tokens:
        raise ParseError("empty instruction", position=0)
    ops = []
    spans = []
    for clause in _split_clauses(tokens):
        op, span = _parse_clause(clause)
        ops.append(op)
        spans.append(span)
    return ParseResult(
        instruction=Instruction(surface=surface, ops=tuple(ops)), spans=tuple(spans)
    )


# --- cue resolution ---------------------------------------------------------

TIMELINE_TARGET = "timeline-target"
COLLECTION_ELEMENT = "collection-element"


def _semantic_matches(description: str, assets) -> list[str]:
    wanted = normalize_caption(description)
    seen: list[str] = []
    for asset in assets:
        if normalize_caption(asset.caption) == wanted and asset.id not in seen:
            seen.append(asset.id)
    return seen


def resolve(cue: CueRef, timeline: Timeline, collection: Collection, role: str):
    """Resolve a cue to a 1-based position (timeline targets) or an asset id
    (collection elements)."""
    if role == TIMELINE_TARGET:
        if isinstance(cue, PositionRef):
            if isinstance(cue.index, Last):
                if len(timeline) == 0:
                    raise PositionError("timeline is empty, there is no last entry")
                return len(timeline)
            if not 1 <= cue.index <= len(timeline):
                raise PositionError(
                    f"position {cue.index} outside [1, {len(timeline)}]"
                )
            return cue.index
        if isinstance(cue, IdRef):
            if cue.id not in collection:
                raise UnknownIdError(cue.id)
            for i, entry in enumerate(timeline, start=1):
                if entry == cue.id:
                    return i
            raise NoMatchError(f"asset {cue.id} is not on the timeline")
        matches = _semantic_matches(
            cue.description, (collection.get(e) for e in timeline)
        )
        if not matches:
            raise NoMatchError(f"no timeline entry is captioned {cue.description!r}")
        if len(matches) > 1:
            raise AmbiguousError(
                f"{cue.description!r} matches {len(matches)} timeline entries"
            )
        for i, entry in enumerate(timeline, start=1):
            if entry == matches[0]:
                return i
        raise NoMatchError(f"no timeline entry is captioned {cue.description!r}")

    if role == COLLECTION_ELEMENT:
        if isinstance(cue, PositionRef):
            raise PositionError("a position cannot name a collection element")
        if isinstance(cue, IdRef):
            if cue.id not in collection:
                raise UnknownIdError(cue.id)
            return cue.id
        matches = _semantic_matches(cue.description, collection.assets)
        if not matches:
            raise NoMatchError(f"no collection asset is captioned {cue.description!r}")
        if len(matches) > 1:
            raise AmbiguousError(
                f"{cue.description!r} matches {len(matches)} collection assets"
            )
        return matches[0]

    raise ValueError(f"unknown resolution role {role!r}")


def _apply_op(op, timeline: Timeline, collection: Collection) -> Timeline:
    if isinstance(op, Insert):
        asset_id = resolve(op.element, timeline, collection, COLLECTION_ELEMENT)
        return insert_at(timeline, asset_id, op.at.index)
    if isinstance(op, Remove):
        pos = resolve(op.target, timeline, collection, TIMELINE_TARGET)
        return remove_at(timeline, pos)
    if isinstance(op, Replace):
        pos = resolve(op.target, timeline, collection, TIMELINE_TARGET)
        asset_id = resolve(op.replacement, timeline, collection, COLLECTION_ELEMENT)
        return replace_at(timeline, pos, asset_id)
    if isinstance(op, Swap):
        pa = resolve(op.a, timeline, collection, TIMELINE_TARGET)
        pb = resolve(op.b, timeline, collection, TIMELINE_TARGET)
        return swap_positions(timeline, pa, pb)
    raise TypeError(f"not an edit op: {op!r}")


def execute(timeline: Timeline, collection: Collection, instruction: Instruction) -> Timeline:
    """Apply the instruction's ops left to right; each op resolves its cues
    against the timeline produced by the previous one."""
    current = timeline
    for index, op in enumerate(instruction.ops):
        try:
            current = _apply_op(op, current, collection)
        except AssemblyError as exc:
            exc.op_index = index
            raise
    return current


def apply_text(surface: str, timeline: Timeline, collection: Collection):
    """Parse and execute in one step; returns (new timeline, parse result)."""
    result = parse_instruction(surface)
    return execute(timeline, collection, result.instruction), result
