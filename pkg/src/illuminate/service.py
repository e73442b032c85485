"""HTTP service exposing diagnosis and chat over the trained artifacts.

Sessions persist as append-only JSONL journals (one file per session) so a
restart replays them back into memory.  Requests to the same session are
serialized; concurrent posts get a 409.
"""
from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .classify import CnnModel, load_checkpoint
from .classify.pipeline import TextClassifier
from .explain import explain as lime_explain
from .llmclient import BackendConfig, BackendError, CompletionRequest, make_backend
from .prompts import (
    DialogueState,
    KTooLarge,
    ParseError,
    PlanConfig,
    PlanStep,
    TreatmentPlan,
    build_diagnose_prompt,
    load_cbt_db,
    load_default_cbt_db,
    load_default_cbt_table,
    load_exemplar_bank,
    next_turn,
    parse_diagnosis,
    plan_treatment,
)
from .prompts.diagnose import Exemplar
from .textprep import load_embeddings, preprocess

logger = logging.getLogger(__name__)


@dataclass
class ServiceConfig:
    port: int = 8000
    backend: BackendConfig = field(default_factory=BackendConfig)
    model_checkpoint_path: str | None = None
    cbt_db_path: str | None = None
    exemplar_bank_path: str | None = None
    journal_dir: str = "journals"
    cors_origin: str | None = None
    embedding_table_path: str | None = None  # CNN checkpoints only
    model_id: str = "illuminate-default"


def load_service_config(path: str | Path) -> ServiceConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    backend = BackendConfig(**raw.pop("backend", {}))
    return ServiceConfig(backend=backend, **raw)


@dataclass
class Session:
    id: str
    state: DialogueState
    created_at: float
    updated_at: float
    plan: TreatmentPlan | None = None


class DiagnoseBody(BaseModel):
    text: str
    shots: int = 3
    engine: str = "both"
    explain: bool = True


class MessageBody(BaseModel):
    text: str


def _plan_from_dict(raw: dict) -> TreatmentPlan:
    steps = [
        PlanStep(node_name=s["node"], rationale=s["rationale"], prompt=s["prompt"])
        for s in raw["steps"]
    ]
    return TreatmentPlan(
        steps=steps, depth=raw["depth"], scores=[s["score"] for s in raw["steps"]]
    )


class SessionStore:
    """In-memory sessions backed by per-session JSONL journals."""

    def __init__(self, journal_dir: str | Path):
        self.journal_dir = Path(journal_dir)
        self.journal_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def journal_path(self, session_id: str) -> Path:
        return self.journal_dir / f"{session_id}.jsonl"

    def append_event(self, session_id: str, event: dict) -> None:
        with open(self.journal_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def create(self) -> Session:
        session_id = str(uuid.uuid4())
        now = time.time()
        session = Session(
            id=session_id, state=DialogueState(), created_at=now, updated_at=now
        )
        self.append_event(session_id, {"event": "created", "ts": now})
        with self._registry_lock:
            self.sessions[session_id] = session
            self.locks[session_id] = threading.Lock()
        return session

    def replay(self) -> None:
        for path in sorted(self.journal_dir.glob("*.jsonl")):
            session_id = path.stem
            session: Session | None = None
            for line_no, line in enumerate(
                path.read_text(encoding="utf-8").splitlines(), start=1
            ):
                if not line.strip():
                    continue
                try:
                    event = json.loads(line)
                    kind = event["event"]
                    if kind == "created":
                        session = Session(
                            id=session_id,
                            state=DialogueState(),
                            created_at=event["ts"],
                            updated_at=event["ts"],
                        )
                    elif kind == "turn" and session is not None:
                        session.state.history.append(("user", event["user"]))
                        session.state.history.append(("assistant", event["assistant"]))
                        session.state.stage = event["stage"]
                        session.state.risk = event["risk"]
                        session.updated_at = event["ts"]
                    elif kind == "plan" and session is not None:
                        session.plan = _plan_from_dict(event["plan"])
                        session.updated_at = event["ts"]
                    else:
                        raise KeyError(kind)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    logger.warning(
                        "skipping malformed journal line %s:%d (%s)",
                        path.name,
                        line_no,
                        exc,
                    )
            if session is not None:
                with self._registry_lock:
                    self.sessions[session_id] = session
                    self.locks[session_id] = threading.Lock()


def _load_pipeline(cfg: ServiceConfig) -> TextClassifier | None:
    if not cfg.model_checkpoint_path:
        return None
    model, vocab, _ = load_checkpoint(cfg.model_checkpoint_path)
    if isinstance(model, CnnModel):
        if not cfg.embedding_table_path:
            logger.warning("CNN checkpoint needs embedding_table_path; classifier disabled")
            return None
        table = load_embeddings(cfg.embedding_table_path)
        return TextClassifier(model=model, table=table)
    if vocab is None:
        logger.warning("checkpoint has no paired vocabulary; classifier disabled")
        return None
    return TextClassifier(model=model, vocab=vocab)


def _case_summary(state: DialogueState) -> str:
    user_turns = [text for speaker, text in state.history if speaker == "user"]
    assistant_turns = [text for speaker, text in state.history if speaker == "assistant"]
    summary = " ".join(user_turns[-6:])
    if assistant_turns:
        # append the latest reflection so planning sees the dialogue's
        # current understanding, not just raw user text
        summary = f"{summary} {assistant_turns[-1]}"
    return summary


def create_app(cfg: ServiceConfig) -> FastAPI:
    app = FastAPI(title="illuminate", version="0.1.0")

    if cfg.cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cfg.cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    store = SessionStore(cfg.journal_dir)
    store.replay()
    backend = make_backend(cfg.backend)
    pipeline = _load_pipeline(cfg)
    bank: list[Exemplar]
    if cfg.exemplar_bank_path:
        bank = load_exemplar_bank(cfg.exemplar_bank_path)
    else:
        with resources.as_file(
            resources.files("illuminate").joinpath("data/exemplar_bank.jsonl")
        ) as path:
            bank = load_exemplar_bank(path)
    cbt_db = load_cbt_db(cfg.cbt_db_path) if cfg.cbt_db_path else load_default_cbt_db()
    cbt_table = load_default_cbt_table()

    app.state.store = store
    app.state.pipeline = pipeline
    app.state.backend = backend

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/v1/diagnose")
    def diagnose(body: DiagnoseBody):
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        if body.engine not in ("classifier", "llm", "both"):
            raise HTTPException(status_code=400, detail=f"unknown engine {body.engine!r}")
        result: dict = {
            "label": None,
            "p1": None,
            "explanation": "",
            "keywords": [],
            "lime": None,
            "warnings": [],
        }
        classifier_label = None
        if body.engine in ("classifier", "both"):
            if pipeline is None:
                raise HTTPException(status_code=409, detail="no classifier model loaded")
            pred = pipeline.predict_text(body.text)
            classifier_label = "depressed" if pred.label == 1 else "not_depressed"
            result["label"] = classifier_label
            result["p1"] = pred.p1
            if body.explain:
                doc = preprocess(body.text)
                if doc.tokens:
                    result["lime"] = lime_explain(pipeline.p1, doc, seed=0).as_dict()
        if body.engine in ("llm", "both"):
            try:
                bundle = build_diagnose_prompt(body.text, bank, body.shots)
            except KTooLarge as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            try:
                response = backend.complete(
                    CompletionRequest(
                        model_id=cfg.model_id,
                        messages=tuple(bundle.to_chat_messages()),
                    )
                )
                diagnosis = parse_diagnosis(response.content)
            except (BackendError, ParseError) as exc:
                raise HTTPException(status_code=502, detail=str(exc)) from exc
            result["explanation"] = diagnosis.explanation
            result["keywords"] = diagnosis.keywords
            if body.engine == "llm":
                result["label"] = diagnosis.label
            elif classifier_label and diagnosis.label != classifier_label:
                result["warnings"].append(
                    f"classifier says {classifier_label}, language model says {diagnosis.label}"
                )
        return result

    @app.post("/v1/sessions")
    def create_session():
        try:
            session = store.create()
        except OSError as exc:
            raise HTTPException(status_code=507, detail=f"journal write failed: {exc}")
        return {"session_id": session.id}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return {
            "session_id": session.id,
            "stage": session.state.stage,
            "risk": session.state.risk,
            "history": [
                {"speaker": speaker, "text": text}
                for speaker, text in session.state.history
            ],
            "plan": session.plan.as_dict() if session.plan else None,
        }

    @app.post("/v1/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        session = store.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        lock = store.locks[session_id]
        if not lock.acquire(blocking=False):
            raise HTTPException(
                status_code=409, detail="another request is active on this session"
            )
        try:
            try:
                reply, new_state = next_turn(
                    session.state, body.text, backend, model_id=cfg.model_id
                )
            except BackendError as exc:
                raise HTTPException(status_code=502, detail=str(exc)) from exc
            session.state = new_state
            session.updated_at = time.time()
            turn_index = len(new_state.history) // 2
            try:
                store.append_event(
                    session_id,
                    {
                        "event": "turn",
                        "turn_index": turn_index,
                        "user": body.text,
                        "assistant": reply,
                        "stage": new_state.stage,
                        "risk": new_state.risk,
                        "ts": session.updated_at,
                    },
                )
            except OSError as exc:
                raise HTTPException(status_code=507, detail=f"journal write failed: {exc}")
            if new_state.stage == "support" and session.plan is None:
                # votes disabled: the attached plan must be reproducible
                # from the journal alone
                plan = plan_treatment(
                    _case_summary(new_state),
                    cbt_db,
                    PlanConfig(beam=2, depth=3, beta=0.0),
                    cbt_table,
                )
                session.plan = plan
                store.append_event(
                    session_id,
                    {"event": "plan", "plan": plan.as_dict(), "ts": session.updated_at},
                )
            payload = {
                "reply": reply,
                "stage": new_state.stage,
                "risk": new_state.risk,
            }
            if session.plan is not None:
                payload["plan"] = session.plan.as_dict()
            return payload
        finally:
            lock.release()

    return app


def run(config_path: str | Path) -> None:
    """Entry point used by the CLI serve subcommand."""
    import uvicorn

    cfg = load_service_config(config_path)
    uvicorn.run(create_app(cfg), host="127.0.0.1", port=cfg.port)


__all__ = [
    "ServiceConfig",
    "Session",
    "SessionStore",
    "create_app",
    "load_service_config",
    "run",
]
