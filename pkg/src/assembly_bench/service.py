"""Local HTTP service for interactive timeline editing.

Sessions hold an immutable collection plus a mutable timeline edited through
natural-language instructions. Datasets generated through the API stay in
memory and can seed sessions or be evaluated against uploaded predictions.
All responses are JSON; errors use the envelope {kind, message, detail}.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import asdict, dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .core import (
    LAST,
    Asset,
    Collection,
    IdRef,
    Insert,
    PositionRef,
    Remove,
    Replace,
    SemanticRef,
    Swap,
    Timeline,
    is_valid_id,
)
from .errors import AssemblyError, EvalError
from .evaluation import score
from .executor import apply_text
from .generation import GenConfig, Sample, SourceManifest, default_manifest, make_dataset
from .prompts import LENIENT, STRICT
from .templates import TemplateSet, load_templates

DEFAULT_PORT = 8765
_ORIGIN_REGEX = r"https?://(localhost|127\.0\.0\.1)(:\d+)?"


def resolve_port(port: int | None = None) -> int:
    """Pick the port: explicit argument, then ASSEMBLY_BENCH_PORT, then default."""
    if port is not None:
        return port
    raw = os.environ.get("ASSEMBLY_BENCH_PORT")
    if raw is None or raw == "":
        return DEFAULT_PORT
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"ASSEMBLY_BENCH_PORT must be an integer, got {raw!r}") from exc


@dataclass
class Session:
    session_id: str
    collection: Collection
    initial: Timeline
    timeline: Timeline
    history: list[tuple[str, Timeline]] = field(default_factory=list)
    source: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class ServiceState:
    """Shared mutable state behind the app: sessions and in-memory datasets."""

    def __init__(self, manifest: SourceManifest | None = None, templates: TemplateSet | None = None):
        self.manifest = manifest if manifest is not None else default_manifest()
        self.templates = templates if templates is not None else load_templates()
        self.sessions: dict[str, Session] = {}
        self.datasets: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._dataset_counter = 0

    def add_session(self, session: Session) -> None:
        with self._lock:
            self.sessions[session.session_id] = session

    def add_dataset(self, samples: list[Sample], summary: dict) -> str:
        with self._lock:
            self._dataset_counter += 1
            dataset_id = f"ds-{self._dataset_counter:04d}"
            self.datasets[dataset_id] = {"samples": samples, "summary": summary}
        return dataset_id


def _error(status: int, kind: str, message: str, detail: dict | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"kind": kind, "message": message, "detail": detail or {}},
    )


def _schema_error(message: str) -> JSONResponse:
    return _error(400, "Schema", message)


def _collection_payload(collection: Collection) -> list[dict]:
    return [
        {"clip_id": asset.id, "caption": asset.caption, "uri": asset.uri}
        for asset in collection.assets
    ]


def _cue_payload(ref) -> dict:
    if isinstance(ref, PositionRef):
        index = "last" if ref.index is LAST else ref.index
        return {"kind": "position", "index": index}
    if isinstance(ref, IdRef):
        return {"kind": "id", "id": ref.id}
    if isinstance(ref, SemanticRef):
        return {"kind": "semantic", "description": ref.description}
    raise TypeError(f"unexpected cue {ref!r}")


def _op_payload(op) -> dict:
    if isinstance(op, Insert):
        return {"op": "insert", "element": _cue_payload(op.element), "at": _cue_payload(op.at)}
    if isinstance(op, Remove):
        return {"op": "remove", "target": _cue_payload(op.target)}
    if isinstance(op, Replace):
        return {
            "op": "replace",
            "target": _cue_payload(op.target),
            "replacement": _cue_payload(op.replacement),
        }
    if isinstance(op, Swap):
        return {"op": "swap", "a": _cue_payload(op.a), "b": _cue_payload(op.b)}
    raise TypeError(f"unexpected op {op!r}")


def _changed_positions(old: Timeline, new: Timeline) -> list[int]:
    length = max(len(old.entries), len(new.entries))
    changed = []
    for i in range(length):
        before = old.entries[i] if i < len(old.entries) else None
        after = new.entries[i] if i < len(new.entries) else None
        if before != after:
            changed.append(i + 1)
    return changed


def _session_payload(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "collection": _collection_payload(session.collection),
        "timeline": list(session.timeline.entries),
        "history_length": len(session.history),
        "source": session.source,
    }


def _sample_summary(sample: Sample) -> dict:
    return {
        "sample_id": sample.sample_id,
        "task": sample.task,
        "cue": sample.cue,
        "instruction": sample.instruction,
        "input_timeline": list(sample.input_timeline.entries),
        "output_timeline": list(sample.output_timeline.entries),
        "length": len(sample.input_timeline.entries),
    }


def _replay_history(session: Session) -> None:
    timeline = session.initial
    for surface, recorded in session.history:
        timeline, _ = apply_text(surface, timeline, session.collection)
        if timeline.entries != recorded.entries:
            raise RuntimeError(
                f"session {session.session_id}: history replay diverged at {surface!r}"
            )
    if timeline.entries != session.timeline.entries:
        raise RuntimeError(f"session {session.session_id}: timeline drifted from history")


def _session_from_assets(body: dict) -> tuple[Collection, Timeline] | JSONResponse:
    raw_assets = body.get("assets")
    if not isinstance(raw_assets, list) or not raw_assets:
        return _schema_error("'assets' must be a non-empty list")
    assets = []
    for record in raw_assets:
        if not isinstance(record, dict):
            return _schema_error("each asset must be an object")
        clip_id = record.get("clip_id")
        caption = record.get("caption")
        if not isinstance(clip_id, str) or not isinstance(caption, str):
            return _schema_error("each asset needs string 'clip_id' and 'caption'")
        uri = record.get("uri")
        if uri is not None and not isinstance(uri, str):
            return _schema_error("'uri' must be a string when present")
        try:
            assets.append(Asset(clip_id, caption, uri))
        except (AssemblyError, ValueError) as exc:
            return _schema_error(f"bad asset {clip_id!r}: {exc}")
    raw_timeline = body.get("timeline", [])
    if not isinstance(raw_timeline, list):
        return _schema_error("'timeline' must be a list of clip ids")
    try:
        collection = Collection(tuple(assets))
    except AssemblyError as exc:
        return _schema_error(str(exc))
    for entry in raw_timeline:
        if not isinstance(entry, str) or not is_valid_id(entry):
            return _schema_error(f"timeline entry {entry!r} is not a 4-digit id")
        if entry not in collection:
            return _schema_error(f"timeline entry {entry!r} is not in the collection")
    return collection, Timeline(tuple(raw_timeline))


def create_app(
    manifest: SourceManifest | None = None,
    templates: TemplateSet | None = None,
    debug: bool = True,
) -> FastAPI:
    """Build the application. With debug on, every session mutation is
    double-checked by replaying its history from the initial timeline."""
    state = ServiceState(manifest, templates)
    app = FastAPI(title="assembly-bench", version="0.1.0")
    app.state.service = state
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=_ORIGIN_REGEX,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    def bad_body(request: Request, exc: RequestValidationError):
        return _schema_error("request body is not valid JSON of the expected shape")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session(body: dict):
        if "dataset_id" in body or "sample_id" in body:
            dataset_id = body.get("dataset_id")
            sample_id = body.get("sample_id")
            if not isinstance(dataset_id, str) or not isinstance(sample_id, str):
                return _schema_error("seeding from a dataset needs 'dataset_id' and 'sample_id'")
            dataset = state.datasets.get(dataset_id)
            if dataset is None:
                return _error(404, "NotFound", f"unknown dataset {dataset_id!r}")
            sample = next(
                (s for s in dataset["samples"] if s.sample_id == sample_id), None
            )
            if sample is None:
                return _error(404, "NotFound", f"unknown sample {sample_id!r}")
            collection, timeline = sample.collection, sample.input_timeline
            source = {"dataset_id": dataset_id, "sample_id": sample_id}
        else:
            built = _session_from_assets(body)
            if isinstance(built, JSONResponse):
                return built
            collection, timeline = built
            source = None
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            collection=collection,
            initial=timeline,
            timeline=timeline,
            source=source,
        )
        state.add_session(session)
        return _session_payload(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = state.sessions.get(session_id)
        if session is None:
            return _error(404, "NotFound", f"unknown session {session_id!r}")
        with session.lock:
            payload = _session_payload(session)
            payload["history"] = [
                {"instruction": surface, "timeline": list(timeline.entries)}
                for surface, timeline in session.history
            ]
        return payload

    @app.post("/sessions/{session_id}/execute")
    def execute_instruction(session_id: str, body: dict):
        session = state.sessions.get(session_id)
        if session is None:
            return _error(404, "NotFound", f"unknown session {session_id!r}")
        instruction = body.get("instruction")
        if not isinstance(instruction, str) or not instruction.strip():
            return _schema_error("'instruction' must be a non-empty string")
        with session.lock:
            try:
                timeline, parsed = apply_text(instruction, session.timeline, session.collection)
            except AssemblyError as exc:
                detail = {}
                if exc.op_index is not None:
                    detail["op_index"] = exc.op_index
                return _error(422, exc.kind, str(exc), detail)
            previous = session.timeline
            session.history.append((instruction, timeline))
            session.timeline = timeline
            if debug:
                _replay_history(session)
            return {
                "timeline": list(timeline.entries),
                "ops": [_op_payload(op) for op in parsed.instruction.ops],
                "spans": [list(span) for span in parsed.spans],
                "changed_positions": _changed_positions(previous, timeline),
                "history_length": len(session.history),
            }

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        session = state.sessions.get(session_id)
        if session is None:
            return _error(404, "NotFound", f"unknown session {session_id!r}")
        with session.lock:
            if not session.history:
                return _error(409, "EmptyHistory", "nothing to undo")
            session.history.pop()
            session.timeline = (
                session.history[-1][1] if session.history else session.initial
            )
            if debug:
                _replay_history(session)
            return {
                "timeline": list(session.timeline.entries),
                "history_length": len(session.history),
            }

    @app.post("/generate")
    def generate(body: dict):
        cfg_kwargs = {}
        fields = {
            "collection_size": int,
            "samples_per_task": int,
            "seed": int,
            "compositional": bool,
            "split": str,
        }
        for key, expected in fields.items():
            if key in body:
                value = body[key]
                if expected is bool:
                    ok = isinstance(value, bool)
                else:
                    ok = isinstance(value, expected) and not isinstance(value, bool)
                if not ok:
                    return _schema_error(f"'{key}' must be {expected.__name__}")
                cfg_kwargs[key] = value
        if "timeline_length" in body:
            value = body["timeline_length"]
            if isinstance(value, int) and not isinstance(value, bool):
                cfg_kwargs["timeline_length"] = value
            elif (
                isinstance(value, list)
                and len(value) == 2
                and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
            ):
                cfg_kwargs["timeline_length"] = (value[0], value[1])
            else:
                return _schema_error("'timeline_length' must be an int or [lo, hi]")
        try:
            cfg = GenConfig(**cfg_kwargs)
        except AssemblyError as exc:
            return _schema_error(str(exc))
        try:
            samples, summary = make_dataset(state.manifest, cfg, state.templates)
        except AssemblyError as exc:
            return _error(400, exc.kind, str(exc))
        dataset_id = state.add_dataset(samples, summary)
        return {"dataset_id": dataset_id, "summary": summary}

    @app.get("/datasets")
    def list_datasets():
        return {
            "datasets": [
                {"dataset_id": dataset_id, "summary": entry["summary"]}
                for dataset_id, entry in state.datasets.items()
            ]
        }

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        entry = state.datasets.get(dataset_id)
        if entry is None:
            return _error(404, "NotFound", f"unknown dataset {dataset_id!r}")
        return {
            "dataset_id": dataset_id,
            "summary": entry["summary"],
            "samples": [_sample_summary(sample) for sample in entry["samples"]],
        }

    @app.post("/evaluate")
    def evaluate(body: dict):
        dataset_id = body.get("dataset_id")
        if not isinstance(dataset_id, str):
            return _schema_error("'dataset_id' must be a string")
        entry = state.datasets.get(dataset_id)
        if entry is None:
            return _error(404, "NotFound", f"unknown dataset {dataset_id!r}")
        predictions = body.get("predictions")
        if not isinstance(predictions, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in predictions.items()
        ):
            return _schema_error("'predictions' must map sample_id to response text")
        strictness = body.get("strictness", LENIENT)
        if strictness not in (LENIENT, STRICT):
            return _schema_error(f"'strictness' must be '{LENIENT}' or '{STRICT}'")
        try:
            report = score(predictions, entry["samples"], strictness)
        except EvalError as exc:
            return _error(400, exc.kind, str(exc))
        return {"report": asdict(report)}

    @app.get("/templates")
    def list_templates():
        return {
            "templates": [
                {
                    "id": template.id,
                    "task": template.task.name,
                    "split": template.split,
                    "pattern": template.pattern,
                }
                for template in state.templates.templates
            ]
        }

    return app


def run_server(
    host: str = "127.0.0.1",
    port: int | None = None,
    manifest: SourceManifest | None = None,
    templates: TemplateSet | None = None,
) -> None:
    """Blocking uvicorn runner used by the CLI serve subcommand."""
    import uvicorn

    app = create_app(manifest, templates)
    uvicorn.run(app, host=host, port=resolve_port(port), log_level="info")
