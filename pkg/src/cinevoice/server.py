"""HTTP + WebSocket front end over the gateway Service.

Two endpoints, matching the documented wire protocol:

- POST /skill  {"session_id","user_id","text"} -> speech response
- GET  /ws?session=<id>&token=<t>  persistent push channel

The push channel also accepts {"type":"utterance","text":...} messages
so a browser can stand in for the voice device; they run through the
identical utterance path as /skill.
"""
from __future__ import annotations

import asyncio
import json
import queue
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import time

from fastapi import FastAPI, Request, Response, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from .catalog import load_catalog
from .config import AppConfig
from .entities import build_lexicons, load_genre_synonyms
from .gateway import (
    DISCONNECT,
    ProtocolError,
    Service,
    SkillRequest,
    UTTERANCE_TYPE,
    WS_CLOSE_UNAUTHORIZED,
)
from .intent import load_corpus, train_intent_model
from .recsys import build_item_model

# Close code for a subscriber that cannot keep up with the push rate.
WS_CLOSE_OVERLOADED = 1013

_QUEUE_POLL_S = 0.5


def packaged_data_path(name: str) -> Path:
    """Path of a data file shipped inside the package."""
    return Path(str(resources.files("cinevoice") / "data" / name))


def build_service(
    config: AppConfig, clock: Callable[[], float] = time.time
) -> Service:
    """Load data, build both models, and wire up the shared core."""
    synonyms = load_genre_synonyms(packaged_data_path("genre_synonyms.tsv"))
    data_dir = Path(config.data_dir)
    tags_path = data_dir / "tags.csv"
    catalog, ratings = load_catalog(
        data_dir / "movies.csv",
        data_dir / "ratings.csv",
        tags_path if tags_path.exists() else None,
        genre_synonyms=synonyms,
    )
    lexicons = build_lexicons(catalog, synonyms)
    neighborhood = build_item_model(ratings, k=config.k, min_support=config.min_support)
    corpus = load_corpus(packaged_data_path("intent_corpus.tsv"))
    intent_model = train_intent_model(corpus)
    return Service(
        catalog=catalog,
        ratings=ratings,
        lexicons=lexicons,
        neighborhood=neighborhood,
        intent_model=intent_model,
        page_size=config.page_size,
        session_timeout_s=config.session_timeout_s,
        confidence_threshold=config.confidence_threshold,
        title_threshold=config.title_threshold,
        clock=clock,
    )


def create_app(config: AppConfig, service: Optional[Service] = None) -> FastAPI:
    app = FastAPI(title="movie voice browser", docs_url=None, redoc_url=None)
    svc = service if service is not None else build_service(config)
    app.state.service = svc
    app.state.auth_token = config.auth_token

    @app.post("/skill")
    async def skill(request: Request) -> Response:
        raw = await request.body()
        try:
            req = SkillRequest.from_json(raw)
        except ProtocolError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        response = await run_in_threadpool(svc.handle_skill_request, req)
        return Response(content=response.to_json(), media_type="application/json")

    @app.websocket("/ws")
    async def ws(websocket: WebSocket) -> None:
        await websocket.accept()
        session = websocket.query_params.get("session")
        token = websocket.query_params.get("token")
        if not session or token != app.state.auth_token:
            await websocket.close(code=WS_CLOSE_UNAUTHORIZED)
            return
        user = websocket.query_params.get("user", "")
        sub = svc.subscribe(session, user)

        async def pump() -> None:
            while True:
                try:
                    message = await run_in_threadpool(sub.get, _QUEUE_POLL_S)
                except queue.Empty:
                    if not sub.alive:
                        await websocket.close(code=WS_CLOSE_OVERLOADED)
                        return
                    continue
                if message is DISCONNECT:
                    await websocket.close(code=WS_CLOSE_OVERLOADED)
                    return
                await websocket.send_text(message.to_json())

        async def listen() -> None:
            while True:
                raw = await websocket.receive_text()
                try:
                    body = json.loads(raw)
                except json.JSONDecodeError:
                    continue
                if (
                    isinstance(body, dict)
                    and body.get("type") == UTTERANCE_TYPE
                    and isinstance(body.get("text"), str)
                ):
                    await run_in_threadpool(
                        svc.handle_utterance, session, user, body["text"]
                    )

        tasks = [asyncio.create_task(pump()), asyncio.create_task(listen())]
        try:
            done, pending = await asyncio.wait(
                tasks, return_when=asyncio.FIRST_COMPLETED
            )
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(exc, WebSocketDisconnect):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            for task in tasks:
                task.cancel()
            svc.unsubscribe(sub)

    return app
