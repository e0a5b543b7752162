"""FastAPI wrapper around the session service.

Two transports carry the same message protocol:

* ``POST /v1/message``  - one message in, one reply out.
* ``WS /v1/ws``         - persistent channel; each JSON text frame is one
  message and receives exactly one reply frame, in order.  Malformed
  frames get a protocol-error reply and the connection stays open.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from .protocol import PROTOCOL_VERSION, error_reply, protocol_description
from .service import SessionManager


def create_app(scenario_dir: str = ".") -> FastAPI:
    app = FastAPI(title="pointsel gateway", version="1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    manager = SessionManager(scenario_dir=scenario_dir)
    app.state.manager = manager

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "protocol_version": PROTOCOL_VERSION}

    @app.get("/v1/protocol")
    def protocol() -> dict:
        return protocol_description()

    @app.post("/v1/message")
    def message(body: dict) -> dict:
        return manager.handle(body)

    @app.websocket("/v1/ws")
    async def websocket(ws: WebSocket) -> None:
        await ws.accept()
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    body = json.loads(raw)
                except json.JSONDecodeError as exc:
                    await ws.send_json(error_reply("", "PROTOCOL_ERROR",
                                                   f"invalid JSON frame: {exc}"))
                    continue
                await ws.send_json(manager.handle(body))
        except WebSocketDisconnect:
            return

    return app


app = create_app()
