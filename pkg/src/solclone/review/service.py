"""HTTP/JSON API over the review store, consumed by the browser UI and scripts."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .. import report as report_render
from .core import Judgment, JudgmentError, ReviewStore, SessionPair, Verdict

logger = logging.getLogger(__name__)


class PairIn(BaseModel):
    pair_id: str
    set: str = "candidate"
    stripe: Optional[str] = None
    cd_s: float = 0.0
    cm_s: Optional[float] = None
    same_name: bool = False
    signature_compatible: bool = False


class SessionIn(BaseModel):
    name: str
    raters: list[str]
    mode: str = "full"
    seed: int = 0
    pairs: list[PairIn]
    functions: dict[str, dict] = Field(default_factory=dict)


class JudgmentIn(BaseModel):
    pair_id: str
    rater_id: str
    verdict: str
    labels: list[str] = Field(default_factory=list)
    note: str = ""
    coherent: Optional[bool] = None
    complete: Optional[bool] = None
    timestamp: Optional[str] = None


class ResolutionIn(BaseModel):
    pair_id: str
    verdict: str
    labels: list[str] = Field(default_factory=list)
    note: str = ""


def _verdict(value: str) -> Verdict:
    try:
        return Verdict(value)
    except ValueError:
        raise HTTPException(status_code=422, detail=f"unknown verdict {value!r}")


def create_app(
    store: ReviewStore,
    functions: Optional[dict[str, dict]] = None,
    ui_dir: Optional[str | Path] = None,
) -> FastAPI:
    """Wire the review store into the HTTP surface. `functions` resolves
    function ids to full records for pair payloads; sessions may also carry
    their own function maps."""
    app = FastAPI(title="solclone review service")
    shared_functions = functions or {}

    def get_session(session_id: str):
        try:
            return store.get(session_id)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    def function_payload(session, function_id: str) -> dict:
        record = session.functions.get(function_id) or shared_functions.get(function_id)
        return record or {"function_id": function_id}

    @app.post("/sessions")
    def create_session(body: SessionIn):
        try:
            session = store.create_session(
                name=body.name,
                raters=body.raters,
                mode=body.mode,
                seed=body.seed,
                pairs=[
                    SessionPair(
                        pair_id=p.pair_id,
                        set_label=p.set,
                        stripe=p.stripe,
                        cd_s=p.cd_s,
                        cm_s=p.cm_s,
                        same_name=p.same_name,
                        signature_compatible=p.signature_compatible,
                    )
                    for p in body.pairs
                ],
                functions=body.functions,
            )
        except JudgmentError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"session_id": session.session_id, "pairs": len(session.pairs)}

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str):
        session = get_session(session_id)
        return {
            "session_id": session.session_id,
            "name": session.name,
            "raters": session.raters,
            "mode": session.mode,
            "progress": session.progress(),
            "conflicts": len(session.conflict_pairs()),
        }

    @app.get("/sessions/{session_id}/next")
    def next_pair(session_id: str, rater: str = Query(...)):
        session = get_session(session_id)
        try:
            pair = session.next_pair(rater)
        except JudgmentError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        progress = session.progress()
        if pair is None:
            return {"done": True, "progress": progress}
        return {
            "done": False,
            "pair_id": pair.pair_id,
            "set": pair.set_label,
            "stripe": pair.stripe,
            "cd_s": pair.cd_s,
            "cm_s": pair.cm_s,
            "same_name": pair.same_name,
            "signature_compatible": pair.signature_compatible,
            "functions": {
                "a": function_payload(session, pair.function_id_a),
                "b": function_payload(session, pair.function_id_b),
            },
            "progress": progress,
        }

    @app.post("/sessions/{session_id}/judgments")
    def submit_judgment(session_id: str, body: JudgmentIn):
        get_session(session_id)
        judgment = Judgment(
            session_id=session_id,
            pair_id=body.pair_id,
            rater_id=body.rater_id,
            verdict=_verdict(body.verdict),
            labels=tuple(body.labels),
            note=body.note,
            coherent=body.coherent,
            complete=body.complete,
            timestamp=body.timestamp or "",
        )
        try:
            return store.submit_judgment(judgment)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except JudgmentError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/sessions/{session_id}/agreement")
    def agreement(session_id: str):
        session = get_session(session_id)
        try:
            return session.agreement().to_json()
        except JudgmentError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/sessions/{session_id}/conflicts")
    def conflicts(session_id: str):
        session = get_session(session_id)
        out = []
        for pair_id in session.conflict_pairs():
            verdicts = {
                rater: session.judgments[(pair_id, rater)].verdict.value
                for rater in session.raters
                if (pair_id, rater) in session.judgments
            }
            out.append({"pair_id": pair_id, "verdicts": verdicts})
        return {"conflicts": out}

    @app.post("/sessions/{session_id}/resolutions")
    def resolve(session_id: str, body: ResolutionIn):
        get_session(session_id)
        try:
            return store.resolve_conflict(
                session_id,
                body.pair_id,
                _verdict(body.verdict),
                labels=tuple(body.labels),
                note=body.note,
            )
        except JudgmentError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/sessions/{session_id}/reports/{report_name}")
    def reports(session_id: str, report_name: str, format: str = Query("json")):
        session = get_session(session_id)
        try:
            if report_name == "stripes":
                data = session.stripe_report()
                markdown = report_render.render_validation_stripes_markdown(data)
            elif report_name == "metrics":
                data = session.metrics().to_json()
                markdown = report_render.render_metrics_markdown(data)
            elif report_name == "labels":
                data = session.label_report()
                markdown = report_render.render_labels_markdown(data)
            else:
                raise HTTPException(status_code=404, detail=f"unknown report {report_name!r}")
        except JudgmentError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        if format == "markdown":
            return PlainTextResponse(markdown)
        return data

    if ui_dir and Path(ui_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def export_session(store: ReviewStore, session_id: str, out_dir: str | Path) -> list[Path]:
    """Write a session's derived snapshots (judgments, agreement, reports)."""
    from ..util import write_json, write_jsonl

    session = store.get(session_id)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    judgments = [
        session.judgments[key].to_json() for key in sorted(session.judgments.keys())
    ]
    written.append(write_jsonl(out_dir / "judgments.jsonl", judgments))

    resolutions = [
        {
            "pair_id": r.pair_id,
            "verdict": r.verdict.value,
            "labels": sorted(r.labels),
            "note": r.note,
            "timestamp": r.timestamp,
        }
        for r in (session.resolutions[p] for p in sorted(session.resolutions))
    ]
    written.append(write_jsonl(out_dir / "resolutions.jsonl", resolutions))

    if len(session.raters) == 2:
        written.append(write_json(out_dir / "agreement.json", session.agreement().to_json()))
    written.append(write_json(out_dir / "metrics.json", session.metrics().to_json()))
    written.append(write_json(out_dir / "stripes.json", session.stripe_report()))
    written.append(write_json(out_dir / "labels.json", session.label_report()))
    return written
