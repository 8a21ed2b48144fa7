"""HTTP inference service: per-session dialogue state over a loaded
checkpoint. Sessions are in-memory and expire after an idle timeout."""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .data import SILENCE, KbFact, tokenize
from .model import DialogueState, HcnModel

DEFAULT_IDLE_TIMEOUT = 30 * 60.0
TOP_K = 5


@dataclass
class Session:
    id: str
    state: DialogueState
    transcript: list = field(default_factory=list)
    kb_facts: list[KbFact] = field(default_factory=list)
    created: float = field(default_factory=time.time)
    last_active: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


class MessageIn(BaseModel):
    text: str = ""


def fill_placeholders(template: str, kb_facts: list[KbFact]) -> str:
    """Best-effort lexicalization from session KB context; unmatched
    placeholders stay visible."""
    values = {}
    for fact in kb_facts:
        values.setdefault("<name>", fact.entity)
        from .data import RELATION_TYPES

        vtype = RELATION_TYPES.get(fact.relation)
        if vtype:
            values.setdefault(vtype, fact.value)
    return " ".join(values.get(tok, tok) for tok in template.split())


def create_app(model: HcnModel | None, idle_timeout: float = DEFAULT_IDLE_TIMEOUT, static_dir=None):
    app = FastAPI(title="hcn dialogue manager")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> Session:
        with registry_lock:
            now = time.time()
            for sid in [s for s, sess in sessions.items() if now - sess.last_active > idle_timeout]:
                del sessions[sid]
            sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail="unknown or expired session")
        return sess

    @app.post("/api/session", status_code=201)
    def create_session():
        if model is None:
            raise HTTPException(status_code=503, detail="no checkpoint loaded")
        sid = secrets.token_hex(16)
        with registry_lock:
            sessions[sid] = Session(id=sid, state=model.initial_state())
        return {"session_id": sid}

    @app.post("/api/session/{session_id}/message")
    def post_message(session_id: str, msg: MessageIn):
        sess = get_session(session_id)
        with sess.lock:
            tokens = tokenize(msg.text) or [SILENCE]
            probs, sess.state = model.forward_turn(tokens, sess.state)
            action_id = int(np.argmax(probs))
            template = model.corpus.actions.templates[action_id]
            reply = fill_placeholders(template, sess.kb_facts)
            order = np.argsort(probs)[::-1][:TOP_K]
            top_k = [
                {
                    "action_id": int(i),
                    "template": model.corpus.actions.templates[int(i)],
                    "p": float(probs[int(i)]),
                }
                for i in order
            ]
            sess.last_active = time.time()
            sess.transcript.append(
                {
                    "user": msg.text,
                    "action_id": action_id,
                    "template": template,
                    "timestamp": sess.last_active,
                }
            )
            return {"reply": reply, "action_id": action_id, "top_k": top_k}

    @app.get("/api/session/{session_id}/transcript")
    def get_transcript(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            return list(sess.transcript)

    @app.get("/api/health")
    def health():
        if model is None:
            raise HTTPException(status_code=503, detail="no checkpoint loaded")
        return {"checkpoint": model.corpus.fingerprints["actions"]}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
