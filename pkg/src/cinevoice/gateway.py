"""Network-edge service: skill requests in, view pushes out.

One utterance travels: skill request (HTTP) or utterance message
(push channel) -> parse -> dialogue.handle -> a SkillResponse back to
the caller and a RenderMessage broadcast to every client subscribed to
the session. Response and broadcast are built from the same handle()
result, so their speech text can never disagree.

The Service here is transport-free and thread-safe: per-session locks
serialize state transitions, sequence numbers are assigned under the
lock, and subscribers receive messages through bounded queues so one
slow client can never stall the rest.
"""
from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

from .catalog import Catalog, RatingsMatrix, profile_for
from .dialogue import (
    Deps,
    SessionState,
    ViewUpdate,
    handle,
    open_session,
    render_frame,
    HOME_FRAME,
)
from .entities import Lexicons
from .intent import IntentModel, parse
from .recsys import ItemNeighborhood
from . import speech

RENDER_TYPE = "render"
UTTERANCE_TYPE = "utterance"

# Close code used when a push-channel connect carries a bad token.
WS_CLOSE_UNAUTHORIZED = 4401

DEFAULT_QUEUE_SIZE = 64

# Sentinel a subscriber reads when the service has dropped it.
DISCONNECT = object()


def canonical_json(obj: Any) -> str:
    """One JSON spelling per value: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class ProtocolError(ValueError):
    """Malformed wire payload; maps to a 400 at the HTTP layer."""


@dataclass(frozen=True)
class SkillRequest:
    session_id: str
    user_id: str
    text: str

    def to_json(self) -> str:
        return canonical_json(
            {"session_id": self.session_id, "user_id": self.user_id, "text": self.text}
        )

    @staticmethod
    def from_json(raw: str | bytes) -> "SkillRequest":
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"invalid JSON: {exc}") from exc
        return SkillRequest.from_payload(body)

    @staticmethod
    def from_payload(body: Any) -> "SkillRequest":
        if not isinstance(body, dict):
            raise ProtocolError("request body must be a JSON object")
        for key in ("session_id", "user_id", "text"):
            if key not in body:
                raise ProtocolError(f"missing field: {key}")
            if not isinstance(body[key], str):
                raise ProtocolError(f"field {key} must be a string")
        if not body["session_id"]:
            raise ProtocolError("session_id must be non-empty")
        return SkillRequest(
            session_id=body["session_id"],
            user_id=body["user_id"],
            text=body["text"],
        )


@dataclass(frozen=True)
class SkillResponse:
    speech_text: str
    keep_session_open: bool

    def to_json(self) -> str:
        return canonical_json(
            {
                "speech_text": self.speech_text,
                "keep_session_open": self.keep_session_open,
            }
        )

    @staticmethod
    def from_json(raw: str | bytes) -> "SkillResponse":
        body = json.loads(raw)
        return SkillResponse(
            speech_text=body["speech_text"],
            keep_session_open=body["keep_session_open"],
        )


@dataclass(frozen=True)
class RenderMessage:
    """One push to the browser: what to draw and what was said."""

    seq: int
    view: str
    payload: Mapping[str, Any]
    speech_text: str
    utterance_echo: str
    type: str = RENDER_TYPE

    def to_json(self) -> str:
        return canonical_json(
            {
                "type": self.type,
                "seq": self.seq,
                "view": self.view,
                "payload": self.payload,
                "speech_text": self.speech_text,
                "utterance_echo": self.utterance_echo,
            }
        )

    @staticmethod
    def from_json(raw: str | bytes) -> "RenderMessage":
        body = json.loads(raw)
        if body.get("type") != RENDER_TYPE:
            raise ProtocolError(f"not a render message: {body.get('type')!r}")
        return RenderMessage(
            seq=body["seq"],
            view=body["view"],
            payload=body["payload"],
            speech_text=body["speech_text"],
            utterance_echo=body["utterance_echo"],
        )


@dataclass
class Subscription:
    """One client's ordered message feed for one session."""

    session_id: str
    messages: "queue.Queue[Any]"
    alive: bool = True

    def get(self, timeout: Optional[float] = None) -> Any:
        """Next RenderMessage, or the DISCONNECT sentinel."""
        return self.messages.get(timeout=timeout)


@dataclass
class _SessionSlot:
    lock: threading.Lock
    state: SessionState
    seq: int
    latest: RenderMessage
    subscribers: list[Subscription] = field(default_factory=list)


class Service:
    """Shared application core behind both transports and the repl."""

    def __init__(
        self,
        catalog: Catalog,
        ratings: RatingsMatrix,
        lexicons: Lexicons,
        neighborhood: ItemNeighborhood,
        intent_model: IntentModel,
        page_size: int = 8,
        session_timeout_s: float = 120.0,
        confidence_threshold: float = 0.5,
        title_threshold: float = 0.75,
        clock: Callable[[], float] = time.time,
        queue_size: int = DEFAULT_QUEUE_SIZE,
    ):
        self.catalog = catalog
        self.ratings = ratings
        self.lexicons = lexicons
        self.neighborhood = neighborhood
        self.intent_model = intent_model
        self.page_size = page_size
        self.session_timeout_s = session_timeout_s
        self.confidence_threshold = confidence_threshold
        self.title_threshold = title_threshold
        self.clock = clock
        self.queue_size = queue_size
        self._slots: dict[str, _SessionSlot] = {}
        self._registry_lock = threading.Lock()

    def _deps_for(self, user_id: str) -> Deps:
        profile = None
        try:
            profile = profile_for(self.ratings, int(user_id))
        except (TypeError, ValueError):
            profile = None
        return Deps(
            catalog=self.catalog,
            lexicons=self.lexicons,
            neighborhood=self.neighborhood,
            profile=profile,
            page_size=self.page_size,
            session_timeout_s=self.session_timeout_s,
        )

    def _slot(self, session_id: str, user_id: str, now: float) -> _SessionSlot:
        """Find or create the session, Home view as its first render."""
        with self._registry_lock:
            slot = self._slots.get(session_id)
            if slot is None:
                state = open_session(session_id, user_id, now)
                update = render_frame(
                    HOME_FRAME, self._deps_for(user_id), speech.HOME_WELCOME
                )
                slot = _SessionSlot(
                    lock=threading.Lock(),
                    state=state,
                    seq=1,
                    latest=_to_render(1, update, ""),
                )
                self._slots[session_id] = slot
            return slot

    def handle_utterance(
        self, session_id: str, user_id: str, text: str, now: Optional[float] = None
    ) -> tuple[SkillResponse, RenderMessage]:
        """Run one utterance through parsing and dialogue, then broadcast.

        Returns the caller-facing response and the pushed message; both
        carry the same speech text by construction.
        """
        if now is None:
            now = self.clock()
        deps = self._deps_for(user_id)
        request = parse(
            self.intent_model,
            self.lexicons,
            text,
            threshold=self.confidence_threshold,
            title_threshold=self.title_threshold,
        )
        slot = self._slot(session_id, user_id, now)
        with slot.lock:
            new_state, update = handle(slot.state, request, deps, now)
            slot.state = new_state
            slot.seq += 1
            message = _to_render(slot.seq, update, request.raw_text)
            slot.latest = message
            self._broadcast(slot, message)
        response = SkillResponse(
            speech_text=update.speech_text,
            keep_session_open=new_state.open,
        )
        return response, message

    def handle_skill_request(
        self, req: SkillRequest, now: Optional[float] = None
    ) -> SkillResponse:
        response, _ = self.handle_utterance(
            req.session_id, req.user_id, req.text, now=now
        )
        return response

    def subscribe(
        self, session_id: str, user_id: str = "", now: Optional[float] = None
    ) -> Subscription:
        """Attach a client to a session's feed.

        Unknown sessions are created on the spot (implicit open). The
        subscriber immediately receives a snapshot of the latest view,
        then every later message in emission order.
        """
        if now is None:
            now = self.clock()
        slot = self._slot(session_id, user_id, now)
        sub = Subscription(
            session_id=session_id, messages=queue.Queue(maxsize=self.queue_size)
        )
        with slot.lock:
            slot.subscribers.append(sub)
            sub.messages.put_nowait(slot.latest)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        slot = self._slots.get(sub.session_id)
        if slot is None:
            return
        with slot.lock:
            if sub in slot.subscribers:
                slot.subscribers.remove(sub)
            sub.alive = False

    def _broadcast(self, slot: _SessionSlot, message: RenderMessage) -> None:
        """Push to every subscriber; drop any whose queue is full."""
        stalled: list[Subscription] = []
        for sub in slot.subscribers:
            try:
                sub.messages.put_nowait(message)
            except queue.Full:
                stalled.append(sub)
        for sub in stalled:
            slot.subscribers.remove(sub)
            sub.alive = False
            try:
                sub.messages.put_nowait(DISCONNECT)
            except queue.Full:
                # Reader will notice alive == False once it drains.
                pass

    def session_state(self, session_id: str) -> Optional[SessionState]:
        slot = self._slots.get(session_id)
        return slot.state if slot else None


def _to_render(seq: int, update: ViewUpdate, utterance_echo: str) -> RenderMessage:
    return RenderMessage(
        seq=seq,
        view=update.view,
        payload=update.payload,
        speech_text=update.speech_text,
        utterance_echo=utterance_echo,
    )


def speech_for(intent: str, slots, summary: speech.ResultSummary) -> str:
    """Deterministic speech template fill; see the speech module."""
    return speech.speech_for(intent, slots, summary)
