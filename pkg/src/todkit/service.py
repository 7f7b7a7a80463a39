"""HTTP session API over the dialog engine.

Endpoints:
    POST   /session                 create a session -> {session_id}
    POST   /session/{id}/message    {text} -> debug payload + responses
    GET    /session/{id}            transcript (raw history)
    DELETE /session/{id}
    GET    /health
"""

from __future__ import annotations

import threading
import time
import uuid

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .belief import serialize_belief
from .engine import DialogEngine, Session
from .kb import Database
from .polish import polish
from .seqmodel import GeneratorBackend

DEFAULT_TTL_SECONDS = 3600.0


class MessageIn(BaseModel):
    text: str = ""


class SessionStore:
    """Thread-safe session map with per-session locks and TTL eviction."""

    def __init__(self, ttl: float = DEFAULT_TTL_SECONDS):
        self.ttl = ttl
        self._lock = threading.Lock()
        self._sessions: dict[str, tuple[Session, threading.Lock, float]] = {}

    def _evict(self):
        now = time.monotonic()
        expired = [
            sid
            for sid, (_, _, created) in self._sessions.items()
            if now - created > self.ttl
        ]
        for sid in expired:
            del self._sessions[sid]

    def create(self, engine: DialogEngine, rng_seed: int = 0) -> str:
        with self._lock:
            self._evict()
            sid = uuid.uuid4().hex[:12]
            session = engine.new_session(sid, rng_seed=rng_seed)
            self._sessions[sid] = (session, threading.Lock(), time.monotonic())
            return sid

    def get(self, sid: str) -> tuple[Session, threading.Lock]:
        with self._lock:
            self._evict()
            if sid not in self._sessions:
                raise HTTPException(status_code=404, detail="unknown session")
            session, lock, _ = self._sessions[sid]
            return session, lock

    def delete(self, sid: str):
        with self._lock:
            if sid not in self._sessions:
                raise HTTPException(status_code=404, detail="unknown session")
            del self._sessions[sid]


def create_app(
    backend: GeneratorBackend | None,
    db: Database | None,
    rng_seed: int = 0,
    ttl: float = DEFAULT_TTL_SECONDS,
) -> FastAPI:
    app = FastAPI(title="todkit dialog service")
    store = SessionStore(ttl=ttl)
    engine = DialogEngine(backend, db) if backend is not None and db is not None else None

    def require_engine() -> DialogEngine:
        if engine is None:
            raise HTTPException(status_code=503, detail="backend not loaded")
        return engine

    @app.get("/health")
    def health():
        if engine is None:
            raise HTTPException(status_code=503, detail="backend not loaded")
        return {
            "status": "ok",
            "backend_info": type(backend).__name__,
        }

    @app.post("/session")
    def create_session():
        eng = require_engine()
        return {"session_id": store.create(eng, rng_seed=rng_seed)}

    @app.post("/session/{sid}/message")
    def message(sid: str, body: MessageIn):
        eng = require_engine()
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="empty message")
        session, lock = store.get(sid)
        with lock:
            turn = eng.respond(session, body.text)
            polished = polish(turn, eng.db)
        return {
            "response": polished,
            "raw_response": turn.raw_response,
            "belief": serialize_belief(turn.belief),
            "domain": turn.domain,
            "db_match": turn.db.bucket,
            "template": turn.template,
            "tolerance_events": turn.tolerance_events,
        }

    @app.get("/session/{sid}")
    def transcript(sid: str):
        session, lock = store.get(sid)
        with lock:
            return {
                "session_id": sid,
                "transcript": [
                    {"role": role, "text": text} for role, text in session.history
                ],
            }

    @app.delete("/session/{sid}")
    def delete_session(sid: str):
        store.delete(sid)
        return {"deleted": True}

    return app
