"""HTTP/WebSocket serving layer over the session manager."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect

from .. import data_path
from ..dialogue.nlg import NlgTemplateTable
from ..nlu.features import Lexicons
from ..nlu.rules import RuleBasedEngine, load_patterns
from ..policy.rules import RulePolicy
from ..policy.serialize import load_policy
from ..rec.catalog import load_catalog
from ..rec.usermodel import UserModelStore
from .auth import (
    AuthStore,
    BadCredentialsError,
    DuplicateUserError,
    UnknownUserError,
)
from .sessions import (
    NotAuthenticatedError,
    SessionManager,
    TerminatedSessionError,
    UnknownSessionError,
)

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8000


@dataclass
class GatewayConfig:
    """Server configuration; file values lose to environment overrides."""

    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    catalog: str | None = None
    nlu: str = "rule"  # rule | crf
    policy: str = "rule"  # "rule" or a policy file path
    encoder: str = "basic"
    nlu_model: str | None = None  # trained CRF file, required when nlu=crf
    store_dir: str = "moviebot_store"
    seed: int = 0
    idle_timeout: float = 30 * 60.0

    @classmethod
    def load(cls, path=None, env=None) -> "GatewayConfig":
        env = os.environ if env is None else env
        path = env.get("MOVIEBOT_CONFIG", path)
        cfg = cls()
        if path:
            with open(path, encoding="utf-8") as fh:
                for key, value in json.load(fh).items():
                    if not hasattr(cfg, key):
                        raise ValueError(f"unknown config key {key!r}")
                    setattr(cfg, key, value)
        addr = env.get("MOVIEBOT_ADDR")
        if addr:
            host, _, port = addr.rpartition(":")
            cfg.host = host or cfg.host
            cfg.port = int(port)
        return cfg


def build_manager(config: GatewayConfig) -> SessionManager:
    catalog_file = config.catalog or data_path("catalog_sample.jsonl")
    catalog = load_catalog(catalog_file)
    templates = NlgTemplateTable.load(data_path("nlg_templates.tsv"))

    stoplist = Lexicons.load_word_list(data_path("stoplist.txt"))
    if config.nlu == "rule":
        lexicons = Lexicons.from_catalog(catalog, stoplist)
        nlu_engine = RuleBasedEngine(load_patterns(data_path("rule_patterns.tsv")), lexicons)
    elif config.nlu == "crf":
        if not config.nlu_model:
            raise ValueError("nlu=crf needs nlu_model to point at a trained model")
        from ..nlu.crf import load_crf
        from ..nlu.features import FeatureEncoder
        from ..nlu.joint import CrfEngine

        model = load_crf(config.nlu_model)
        nlu_engine = CrfEngine(
            model, FeatureEncoder(Lexicons.from_catalog(catalog, stoplist))
        )
    else:
        raise ValueError(f"unknown NLU engine {config.nlu!r}")

    if config.policy == "rule":
        policy = RulePolicy()
    else:
        policy = load_policy(config.policy)
        config.encoder = policy.encoder_kind

    os.makedirs(config.store_dir, exist_ok=True)
    return SessionManager(
        catalog=catalog,
        nlu_engine=nlu_engine,
        policy=policy,
        templates=templates,
        user_store=UserModelStore(os.path.join(config.store_dir, "users")),
        auth_store=AuthStore(os.path.join(config.store_dir, "auth.json")),
        encoder_kind=config.encoder,
        idle_timeout=config.idle_timeout,
        seed=config.seed,
    )


def create_app(config: GatewayConfig | None = None, manager: SessionManager | None = None) -> FastAPI:
    config = config or GatewayConfig.load()
    manager = manager or build_manager(config)
    app = FastAPI(title="moviebot gateway")
    app.state.manager = manager
    app.state.config = config

    def wire(messages) -> list[dict]:
        return [m.to_dict() for m in messages]

    @app.post("/api/sessions", status_code=201)
    def create_session():
        sess = manager.create_session()
        return {"session": sess.session_id}

    @app.post("/api/sessions/{session_id}/messages")
    def post_message(session_id: str, body: dict):
        if "text" not in body:
            raise HTTPException(400, "body needs a 'text' field")
        try:
            return wire(manager.handle_user_message(session_id, str(body["text"])))
        except UnknownSessionError as exc:
            raise HTTPException(404, str(exc)) from exc
        except TerminatedSessionError as exc:
            raise HTTPException(409, str(exc)) from exc

    @app.post("/api/auth/register", status_code=201)
    def register(body: dict):
        try:
            manager.auth_store.register(str(body.get("user", "")), str(body.get("password", "")))
        except DuplicateUserError as exc:
            raise HTTPException(409, str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        return {"user": body["user"]}

    @app.post("/api/auth/login")
    def login(body: dict):
        try:
            msg = manager.login(
                str(body.get("session", "")),
                str(body.get("user", "")),
                str(body.get("password", "")),
            )
        except UnknownSessionError as exc:
            raise HTTPException(404, str(exc)) from exc
        except UnknownUserError as exc:
            raise HTTPException(404, str(exc)) from exc
        except BadCredentialsError as exc:
            raise HTTPException(401, str(exc)) from exc
        return msg.to_dict()

    @app.get("/api/sessions/{session_id}/user-model")
    def user_model(session_id: str, form: str = Query("summary")):
        try:
            return manager.get_user_model(session_id, form).to_dict()
        except UnknownSessionError as exc:
            raise HTTPException(404, str(exc)) from exc
        except NotAuthenticatedError as exc:
            raise HTTPException(401, str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc

    @app.websocket("/ws")
    async def ws_channel(socket: WebSocket):
        await socket.accept()
        flushed: set[str] = set()
        try:
            while True:
                frame = await socket.receive_json()
                session_id = frame.get("session", "")
                try:
                    if session_id not in flushed:
                        for msg in manager.drain(session_id):
                            await socket.send_json(msg.to_dict())
                        flushed.add(session_id)
                    if frame.get("type") != "user_message":
                        continue
                    text = (frame.get("payload") or {}).get("text", "")
                    for msg in manager.handle_user_message(session_id, str(text)):
                        await socket.send_json(msg.to_dict())
                except (UnknownSessionError, TerminatedSessionError) as exc:
                    await socket.send_json(
                        {
                            "type": "error",
                            "session": session_id,
                            "payload": {"text": str(exc)},
                            "seq": 0,
                        }
                    )
        except WebSocketDisconnect:
            return

    return app


def serve(config: GatewayConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
