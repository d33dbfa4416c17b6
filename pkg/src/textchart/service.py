"""HTTP service: document ingestion, statement runs, artifact retrieval.

File-backed store: documents are content-addressed JSON records; each run
owns a directory holding its record and, once done, immutable artifacts.
Runs execute asynchronously on a bounded worker pool; the record's status
flips to done only after every artifact is on disk.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel, Field

from .artifacts import write_artifacts
from .backend import LiveBackend, MockBackend
from .config import ServiceConfig, load_pipeline_options, load_service_config
from .errors import StageError, TextchartError, stage_exit_code
from .pipeline import run_pipeline

PENDING = "pending"
RUNNING = "running"
DONE = "done"
FAILED = "failed"


class SpanIn(BaseModel):
    offset: int
    length: int


class BackendIn(BaseModel):
    kind: str = "live"  # live | mock
    fixture_dir: str | None = None


class RunOptionsIn(BaseModel):
    granularity: str = "fine"
    backend: BackendIn = Field(default_factory=BackendIn)


class RunIn(BaseModel):
    statement_span: SpanIn | None = None
    statement_text: str | None = None
    options: RunOptionsIn = Field(default_factory=RunOptionsIn)


class DocumentIn(BaseModel):
    body: str
    title: str = ""


class Store:
    """Documents and runs on disk; document writes serialized per process."""

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        (self.root / "documents").mkdir(parents=True, exist_ok=True)
        (self.root / "runs").mkdir(parents=True, exist_ok=True)
        self._doc_lock = threading.Lock()
        self._run_locks: dict[str, threading.Lock] = {}
        self._run_locks_guard = threading.Lock()

    # documents ---------------------------------------------------------

    def put_document(self, body: str, title: str) -> str:
        content_hash = hashlib.sha256(body.encode("utf-8")).hexdigest()
        doc_id = content_hash[:16]
        path = self.root / "documents" / f"{doc_id}.json"
        with self._doc_lock:
            if path.exists():
                return doc_id
            record = {
                "id": doc_id,
                "title": title,
                "body": body,
                "created_at": datetime.now(timezone.utc).isoformat(),
                "content_hash": content_hash,
            }
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(record, ensure_ascii=False), encoding="utf-8")
            tmp.rename(path)
        return doc_id

    def get_document(self, doc_id: str) -> dict | None:
        path = self.root / "documents" / f"{doc_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    # runs ---------------------------------------------------------------

    def _run_lock(self, run_id: str) -> threading.Lock:
        with self._run_locks_guard:
            return self._run_locks.setdefault(run_id, threading.Lock())

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def create_run(self, record: dict) -> None:
        run_dir = self.run_dir(record["id"])
        run_dir.mkdir(parents=True, exist_ok=True)
        self.write_run(record)

    def write_run(self, record: dict) -> None:
        path = self.run_dir(record["id"]) / "record.json"
        with self._run_lock(record["id"]):
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(record, ensure_ascii=False, indent=2), encoding="utf-8")
            tmp.rename(path)

    def get_run(self, run_id: str) -> dict | None:
        path = self.run_dir(run_id) / "record.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))


def _execute_run(store: Store, config: ServiceConfig, record: dict,
                 statement: str, context: str) -> None:
    record = dict(record)
    record["status"] = RUNNING
    store.write_run(record)
    options_in = record["options"]
    backend_in = options_in.get("backend", {})
    try:
        if backend_in.get("kind") == "mock":
            fixture_dir = backend_in.get("fixture_dir")
            if not fixture_dir:
                raise StageError("backend", TextchartError("mock backend requires fixture_dir"))
            backend = MockBackend(fixture_dir)
        else:
            backend = LiveBackend(config.backend)
        options = load_pipeline_options(options_in.get("granularity", "fine"))
        result = run_pipeline(statement, context, backend, options)
        out_dir = store.run_dir(record["id"]) / "artifacts"
        written = write_artifacts(result, out_dir)
        outputs = {
            "tables": [p for p in written if Path(p).name.startswith("table-")],
            "specs": [p for p in written if Path(p).name.startswith("spec-")],
            "charts": [p for p in written if Path(p).name.startswith("chart-")],
            "trace": "trace.json",
        }
        record["outputs"] = outputs
        record["status"] = DONE  # artifacts are on disk before the flip
        store.write_run(record)
    except Exception as exc:  # failures land in the record, not the worker log
        stage = exc.stage if isinstance(exc, StageError) else "run"
        record["status"] = FAILED
        record["error"] = {
            "stage": stage,
            "message": str(exc),
            "exit_code": stage_exit_code(exc) if isinstance(exc, TextchartError) else 1,
        }
        store.write_run(record)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or load_service_config()
    store = Store(config.data_dir)
    pool = ThreadPoolExecutor(max_workers=config.workers)

    app = FastAPI(title="textchart", version="0.1.0")
    app.state.store = store
    app.state.pool = pool
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/documents")
    def post_document(doc: DocumentIn):
        if not doc.body.strip():
            raise HTTPException(status_code=400, detail="document body is empty")
        if len(doc.body.encode("utf-8")) > config.max_doc_bytes:
            raise HTTPException(status_code=413, detail="document exceeds the size limit")
        doc_id = store.put_document(doc.body, doc.title)
        return {"id": doc_id}

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        record = store.get_document(doc_id)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown document")
        return record

    @app.post("/documents/{doc_id}/runs")
    def post_run(doc_id: str, run_in: RunIn):
        document = store.get_document(doc_id)
        if document is None:
            raise HTTPException(status_code=404, detail="unknown document")
        body = document["body"]
        if (run_in.statement_span is None) == (run_in.statement_text is None):
            raise HTTPException(status_code=422,
                                detail="provide exactly one of statement_span or statement_text")
        if run_in.statement_span is not None:
            span = run_in.statement_span
            if span.offset < 0 or span.length <= 0 or span.offset + span.length > len(body):
                raise HTTPException(status_code=422, detail="span outside document bounds")
            statement = body[span.offset:span.offset + span.length]
            span_record = {"offset": span.offset, "length": span.length}
        else:
            statement = run_in.statement_text
            span_record = None
        if run_in.options.granularity not in ("fine", "coarse", "both"):
            raise HTTPException(status_code=422, detail="unknown granularity")

        run_id = uuid.uuid4().hex
        record = {
            "id": run_id,
            "document_id": doc_id,
            "statement_span": span_record,
            "statement_text": None if span_record else statement,
            "options": {
                "granularity": run_in.options.granularity,
                "backend": {"kind": run_in.options.backend.kind,
                            "fixture_dir": run_in.options.backend.fixture_dir},
            },
            "status": PENDING,
            "outputs": None,
            "error": None,
        }
        store.create_run(record)
        pool.submit(_execute_run, store, config, record, statement, body)
        return {"run_id": run_id}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        record = store.get_run(run_id)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown run")
        return record

    def _artifact(run_id: str, kind: str, k: int) -> Path:
        record = store.get_run(run_id)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown run")
        if record["status"] != DONE:
            raise HTTPException(status_code=409, detail=f"run is {record['status']}, not done")
        paths = record["outputs"][kind]
        if not 0 <= k < len(paths):
            raise HTTPException(status_code=404, detail=f"no {kind} artifact {k}")
        return store.run_dir(run_id) / "artifacts" / paths[k]

    @app.get("/runs/{run_id}/charts/{k}.svg")
    def get_chart(run_id: str, k: int):
        path = _artifact(run_id, "charts", k)
        return Response(content=path.read_bytes(), media_type="image/svg+xml")

    @app.get("/runs/{run_id}/tables/{k}.json")
    def get_table(run_id: str, k: int):
        path = _artifact(run_id, "tables", k)
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.get("/runs/{run_id}/specs/{k}.json")
    def get_spec(run_id: str, k: int):
        path = _artifact(run_id, "specs", k)
        return Response(content=path.read_bytes(), media_type="application/json")

    return app
