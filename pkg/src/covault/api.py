"""HTTP surface: chat, stream reads, docs, analytics, SSE events, approvals."""

from __future__ import annotations

import asyncio
import json
import queue
from dataclasses import asdict

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .analytics import AnalyticsError, weekly_entropy
from .reflexion import ReflexionError
from .reports import run_audits
from .runtime import Harness
from .vault import VaultError


class ChatRequest(BaseModel):
    text: str
    surface: str = "api"


class JournalRequest(BaseModel):
    text: str


class DocRequest(BaseModel):
    kind: str
    text: str
    title: str = ""


def create_app(harness: Harness) -> FastAPI:
    # The interactive docs UI is disabled: /docs is the vault-document
    # endpoint in this API's contract.
    app = FastAPI(title="covault", version="0.1.0", docs_url=None, redoc_url=None)
    vault = harness.vault

    # Fan-out bus for /events subscribers; fed by the vault's append hook.
    subscribers: list[queue.Queue] = []

    def on_record(record):
        payload = json.dumps({
            "stream": record.stream, "seq": record.seq, "ts": record.ts,
            "author": record.author, "model_id": record.model_id,
            "payload": record.payload,
        }, ensure_ascii=False, sort_keys=True)
        for q in list(subscribers):
            q.put(payload)

    vault.subscribe(on_record)

    @app.post("/chat")
    def chat(body: ChatRequest):
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        record = harness.handle_message(body.surface, body.text)
        return record.to_dict()

    @app.get("/streams/{name}")
    def read_stream(name: str, since_seq: int | None = None,
                    from_ts: str | None = None, to_ts: str | None = None):
        try:
            records = vault.read_stream(name, since_seq=since_seq,
                                        from_ts=from_ts, to_ts=to_ts)
        except VaultError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {"stream": name, "records": [
            {"seq": r.seq, "ts": r.ts, "author": r.author,
             "model_id": r.model_id, "payload": r.payload} for r in records]}

    @app.get("/docs")
    def read_docs(kind: str = Query(...), week: str | None = None):
        try:
            window = (week, week) if week else None
            docs = vault.query_docs(kind, week_range=window)
        except VaultError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"docs": [{"path": d.path, "kind": d.kind,
                          "frontmatter": d.frontmatter, "body": d.body}
                         for d in docs]}

    @app.get("/analytics/entropy")
    def entropy(from_week: str | None = None, to_week: str | None = None):
        window = (from_week, to_week) if from_week and to_week else None
        series = weekly_entropy(vault, window=window)
        return {"points": [asdict(p) for p in series.points]}

    @app.get("/analytics/shares")
    def shares(from_week: str | None = None, to_week: str | None = None):
        from .analytics import weekly_archetype_counts
        window = (from_week, to_week) if from_week and to_week else None
        counts = weekly_archetype_counts(vault, window=window)
        return {"weeks": {week: counts[week] for week in sorted(counts)}}

    @app.get("/analytics/verdicts")
    def verdicts():
        return {"verdicts": harness.stack.validations()}

    @app.get("/analytics/conformance")
    def conformance():
        thresholds = harness.config.thresholds
        report = run_audits(vault, ["conformance"],
                            span_days=thresholds.continuity_days,
                            reducibility_threshold=thresholds.reducibility)
        return report["audits"]["conformance"]

    @app.get("/analytics/lockin")
    def lockin(from_week: str, to_week: str):
        try:
            report = harness.engine.detect_lock_in(
                (from_week, to_week),
                dominance_threshold=harness.config.thresholds.dominance,
                starvation_weeks=harness.config.thresholds.starvation_weeks)
        except AnalyticsError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"window": list(report.window), "triggered": report.triggered,
                "dominant": list(report.dominant) if report.dominant else None,
                "starved": [list(s) for s in report.starved]}

    @app.get("/constitution")
    def constitution():
        doc = vault.read_doc("Constitution/constitution.md")
        parsed = harness.stack.load_constitution()
        return {"version": parsed.version,
                "principles": [{"id": pid, "title": title, "text": text}
                               for pid, title, text in parsed.principles],
                "path": doc.path}

    @app.post("/adr/{adr_id}/adopt")
    def adopt(adr_id: str):
        return _decide(harness, adr_id, "adopted")

    @app.post("/adr/{adr_id}/reject")
    def reject(adr_id: str):
        return _decide(harness, adr_id, "rejected")

    @app.post("/journal")
    def journal(body: JournalRequest):
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        path = harness.write_journal_entry(body.text)
        doc = vault.read_doc(path)
        return {"path": path, "frontmatter": doc.frontmatter}

    @app.post("/docs")
    def write_doc(body: DocRequest):
        # The delta is agent-authored by contract; a human write is a conflict.
        if body.kind == "delta":
            raise HTTPException(status_code=409,
                                detail="delta documents are agent-generated")
        if body.kind == "growth_journal":
            path = harness.write_journal_entry(body.text)
            return {"path": path}
        raise HTTPException(status_code=400,
                            detail=f"unsupported kind {body.kind!r}")

    @app.get("/events")
    async def events():
        q: queue.Queue = queue.Queue()
        subscribers.append(q)

        async def stream():
            try:
                while True:
                    try:
                        payload = q.get_nowait()
                    except queue.Empty:
                        await asyncio.sleep(0.05)
                        continue
                    yield f"data: {payload}\n\n"
            finally:
                subscribers.remove(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def _decide(harness: Harness, adr_id: str, decision: str) -> dict:
    try:
        return harness.stack.decide_adr(adr_id, decision)
    except VaultError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc
    except ReflexionError as exc:
        status = 409 if "already decided" in str(exc) else 400
        raise HTTPException(status_code=status, detail=str(exc)) from exc
