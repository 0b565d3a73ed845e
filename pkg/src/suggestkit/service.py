"""HTTP service: serves suggestion sets and ingests accept/reject events.

The deployment loop around a live policy. Propensities are computed
server-side at generation time and held in memory keyed by request id; the
client never sees them, so logged propensities cannot be tampered with.
Every suggestion set shown is logged exactly once: through an accept or
reject event, or as an automatic reject when its session expires idle.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .corpus import BOR, tokenize
from .features import FeatureTable, PosLexicon, load_pos_lexicon
from .logstore import LogRecord, LogStore
from .ngram import NgramModel
from .policy import (
    DEFAULT_PHRASE_LENGTH,
    DEFAULT_SLOTS,
    LogLinearPolicy,
    Suggestion,
    load_weights,
)

DEFAULT_SESSION_TIMEOUT = 30 * 60.0


@dataclass
class ServiceConfig:
    model_path: str
    weights_path: str
    lexicon_path: str
    log_path: str
    k: int = DEFAULT_SLOTS
    length: int = DEFAULT_PHRASE_LENGTH
    session_timeout: float = DEFAULT_SESSION_TIMEOUT
    cors_origins: tuple[str, ...] = ("*",)


@dataclass
class _Pending:
    request_id: str
    context: tuple[str, ...]
    suggestions: tuple[Suggestion, ...]
    mid_word: bool
    created: float


@dataclass
class _Session:
    session_id: str
    pending: _Pending | None = None
    next_event: int = 0
    last_active: float = field(default_factory=time.time)


class SuggestionEngine:
    """Loaded model + policy + sessions; all HTTP handlers delegate here."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.lm = NgramModel.load(config.model_path)
        self.lex = load_pos_lexicon(config.lexicon_path)
        theta = load_weights(config.weights_path)
        self.policy_tag = "sha256:" + hashlib.sha256(
            Path(config.weights_path).read_bytes()
        ).hexdigest()[:16]
        self.table = FeatureTable(self.lm, self.lex)
        self.policy = LogLinearPolicy(theta, self.lm, self.lex, table=self.table)
        self.store = LogStore(config.log_path)
        self.rng = np.random.default_rng()
        self._sessions: dict[str, _Session] = {}
        self._client_tokens: dict[str, str] = {}
        self._lock = threading.Lock()

    # -- sessions ----------------------------------------------------------

    def create_session(self, client_token: str | None = None) -> str:
        with self._lock:
            if client_token is not None and client_token in self._client_tokens:
                return self._client_tokens[client_token]
            sid = secrets.token_urlsafe(16)
            self._sessions[sid] = _Session(sid)
            if client_token is not None:
                self._client_tokens[client_token] = sid
            return sid

    def _session(self, session_id: str) -> _Session:
        sess = self._sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail="unknown session")
        sess.last_active = time.time()
        return sess

    def sweep_expired(self, now: float | None = None) -> int:
        """Auto-reject pending suggestion sets of idle sessions."""
        now = now if now is not None else time.time()
        swept = 0
        with self._lock:
            for sess in self._sessions.values():
                if sess.pending is not None and now - sess.last_active > self.config.session_timeout:
                    self._log_outcome(sess, accepted_slot=None, words_accepted=0)
                    swept += 1
        return swept

    # -- suggestions -------------------------------------------------------

    def _sample_set(self, context: tuple[str, ...], prefix: str):
        if not prefix:
            sset = self.policy.generate_suggestion_set(
                context, k=self.config.k, length=self.config.length, rng=self.rng
            )
            return sset.suggestions
        match_ids = [
            i for i, w in enumerate(self.lm.vocab) if w.startswith(prefix)
        ]
        if not match_ids:
            return ()
        out = []
        used: set[int] = set()
        for _ in range(min(self.config.k, len(match_ids))):
            probs = self.policy.word_distribution(context)
            mask = np.zeros_like(probs)
            mask[match_ids] = probs[match_ids]
            mask[list(used)] = 0.0
            total = mask.sum()
            if total <= 0.0:
                break
            filtered = mask / total
            idx = min(
                int(np.searchsorted(np.cumsum(filtered), self.rng.random())),
                len(filtered) - 1,
            )
            used.add(idx)
            first_p = float(filtered[idx])
            words = [self.lm.vocab[idx]]
            word_probs = [first_p]
            ctx = list(context) + words
            for _ in range(self.config.length - 1):
                w, p = self.policy.sample_word(ctx, self.rng)
                words.append(w)
                word_probs.append(p)
                ctx.append(w)
            out.append(
                Suggestion(tuple(words), tuple(word_probs), float(np.prod(word_probs)))
            )
        return tuple(out)

    def request_suggestions(self, session_id: str, context_tokens: list[str], prefix: str = ""):
        with self._lock:
            sess = self._session(session_id)
            if sess.pending is not None:
                self._log_outcome(sess, accepted_slot=None, words_accepted=0)
            context = tuple(context_tokens) if context_tokens else (BOR,)
            suggestions = self._sample_set(context, prefix.lower())
            request_id = secrets.token_urlsafe(12)
            sess.pending = _Pending(
                request_id=request_id,
                context=context,
                suggestions=suggestions,
                mid_word=bool(prefix),
                created=time.time(),
            )
            return request_id, suggestions

    # -- events ------------------------------------------------------------

    def _log_outcome(self, sess: _Session, accepted_slot: int | None, words_accepted: int) -> None:
        pending = sess.pending
        assert pending is not None
        now = time.time()
        for j, s in enumerate(pending.suggestions):
            self.store.append(
                LogRecord(
                    session_id=sess.session_id,
                    event_index=sess.next_event,
                    context=pending.context,
                    words=s.words,
                    word_props=s.per_word_probs,
                    propensity=s.propensity,
                    reward=float(words_accepted) if j == accepted_slot else 0.0,
                    policy_tag=self.policy_tag,
                    timestamp=now,
                    mid_word=pending.mid_word,
                )
            )
            sess.next_event += 1
        sess.pending = None

    def report_event(
        self,
        session_id: str,
        request_id: str,
        action: str,
        slot: int | None,
        words_accepted: int | None,
    ) -> None:
        with self._lock:
            sess = self._session(session_id)
            if sess.pending is None or sess.pending.request_id != request_id:
                raise HTTPException(status_code=409, detail="no pending suggestions for request_id")
            if action == "reject":
                self._log_outcome(sess, accepted_slot=None, words_accepted=0)
                return
            if action != "accept":
                raise HTTPException(status_code=422, detail=f"unknown action {action!r}")
            if slot is None or not 0 <= slot < len(sess.pending.suggestions):
                raise HTTPException(status_code=422, detail="accept requires a valid slot")
            if words_accepted is None or not 1 <= words_accepted <= self.config.length:
                raise HTTPException(
                    status_code=422,
                    detail=f"words_accepted must be in [1, {self.config.length}]",
                )
            self._log_outcome(sess, accepted_slot=slot, words_accepted=words_accepted)


class SessionRequest(BaseModel):
    client_token: str | None = None


class SuggestionsRequest(BaseModel):
    session_id: str
    context_tokens: list[str] = []
    prefix: str = ""


class EventRequest(BaseModel):
    session_id: str
    request_id: str
    action: str
    slot: int | None = None
    words_accepted: int | None = None


def create_app(config: ServiceConfig | None = None, engine: SuggestionEngine | None = None) -> FastAPI:
    """Build the FastAPI app; with no config, endpoints 503 until loaded."""
    app = FastAPI(title="suggestkit suggestion service")
    app.state.engine = engine if engine is not None else (
        SuggestionEngine(config) if config is not None else None
    )
    origins = list(config.cors_origins) if config is not None else ["*"]
    app.add_middleware(
        CORSMiddleware, allow_origins=origins, allow_methods=["*"], allow_headers=["*"]
    )

    def engine_or_503() -> SuggestionEngine:
        if app.state.engine is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return app.state.engine

    @app.post("/session")
    def post_session(req: SessionRequest):
        eng = engine_or_503()
        eng.sweep_expired()
        return {"session_id": eng.create_session(req.client_token)}

    @app.post("/suggestions")
    def post_suggestions(req: SuggestionsRequest):
        eng = engine_or_503()
        eng.sweep_expired()
        try:
            context = [t for raw in req.context_tokens for t in [raw.strip().lower()] if t]
        except AttributeError:
            raise HTTPException(status_code=422, detail="context_tokens must be strings")
        request_id, suggestions = eng.request_suggestions(req.session_id, context, req.prefix)
        return {
            "request_id": request_id,
            "suggestions": [
                {"words": list(s.words), "display_text": " ".join(s.words)}
                for s in suggestions
            ],
        }

    @app.post("/events")
    def post_events(req: EventRequest):
        eng = engine_or_503()
        eng.sweep_expired()
        eng.report_event(req.session_id, req.request_id, req.action, req.slot, req.words_accepted)
        return {"ok": True}

    @app.get("/health")
    def get_health():
        return {"status": "ok" if app.state.engine is not None else "loading",
                "model_loaded": app.state.engine is not None}

    @app.get("/policy")
    def get_policy():
        eng = engine_or_503()
        return {"policy_tag": eng.policy_tag, "k": eng.config.k, "length": eng.config.length}

    return app


def tokenize_context(text: str) -> list[str]:
    """Tokenize free text typed so far into context tokens (keeps markers)."""
    return tokenize(text)
