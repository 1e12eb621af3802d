"""Gateway tests: wire protocol, sessions, auth, REST, and websocket."""

import json

import pytest
from fastapi.testclient import TestClient

from moviebot import data_path
from moviebot.dialogue.nlg import NlgTemplateTable
from moviebot.gateway.auth import (
    AuthStore,
    BadCredentialsError,
    DuplicateUserError,
    UnknownUserError,
)
from moviebot.gateway.server import GatewayConfig, create_app
from moviebot.gateway.sessions import (
    NotAuthenticatedError,
    SessionManager,
    TerminatedSessionError,
    UnknownSessionError,
    WireMessage,
)
from moviebot.nlu.features import Lexicons
from moviebot.nlu.rules import RuleBasedEngine, load_patterns
from moviebot.policy.rules import RulePolicy
from moviebot.rec.catalog import load_catalog
from moviebot.rec.usermodel import UserModelStore

PASSWORD = "correct-horse-battery"


def make_manager(tmp_path, **kwargs):
    catalog = load_catalog(data_path("toy_catalog.jsonl"))
    lexicons = Lexicons.from_catalog(
        catalog, Lexicons.load_word_list(data_path("stoplist.txt"))
    )
    engine = RuleBasedEngine(load_patterns(data_path("rule_patterns.tsv")), lexicons)
    defaults = dict(
        catalog=catalog,
        nlu_engine=engine,
        policy=RulePolicy(),
        templates=NlgTemplateTable.load(data_path("nlg_templates.tsv")),
        user_store=UserModelStore(tmp_path / "users"),
        auth_store=AuthStore(tmp_path / "auth.json"),
    )
    defaults.update(kwargs)
    return SessionManager(**defaults)


def intents(messages):
    return [(m.type, m.payload.get("intent")) for m in messages]


# ---------------------------------------------------------------------------
# Wire protocol


def test_wire_message_shape():
    msg = WireMessage("agent_message", "abc", {"text": "hi"}, 1)
    d = msg.to_dict()
    assert set(d) == {"type", "session", "payload", "seq"}
    with pytest.raises(ValueError):
        WireMessage("telemetry", "abc", {}, 1)


# ---------------------------------------------------------------------------
# Auth store


def test_auth_round_trip(tmp_path):
    store = AuthStore(tmp_path / "auth.json")
    store.register("maria", PASSWORD)
    store.verify("maria", PASSWORD)  # no exception
    with pytest.raises(BadCredentialsError):
        store.verify("maria", "wrong")
    with pytest.raises(UnknownUserError):
        store.verify("ghost", PASSWORD)
    with pytest.raises(DuplicateUserError):
        store.register("maria", "other")
    with pytest.raises(ValueError):
        store.register("", "x")


def test_auth_file_never_stores_plaintext(tmp_path):
    path = tmp_path / "auth.json"
    store = AuthStore(path)
    store.register("maria", PASSWORD)
    raw = path.read_text()
    assert PASSWORD not in raw
    header = json.loads(raw)
    assert header["hash"] == "pbkdf2-hmac-sha256"
    assert header["iterations"] >= 100_000


def test_auth_store_reload(tmp_path):
    path = tmp_path / "auth.json"
    AuthStore(path).register("maria", PASSWORD)
    AuthStore(path).verify("maria", PASSWORD)


# ---------------------------------------------------------------------------
# Session manager


def test_create_session_queues_welcome(tmp_path):
    manager = make_manager(tmp_path)
    sess = manager.create_session()
    assert len(sess.session_id) == 32  # 128-bit hex id
    queued = manager.drain(sess.session_id)
    assert intents(queued) == [("agent_message", "WELCOME")]
    assert queued[0].seq == 1
    assert manager.drain(sess.session_id) == []


def test_message_pipeline_and_gapless_seq(tmp_path):
    manager = make_manager(tmp_path)
    sess = manager.create_session()
    out = manager.drain(sess.session_id)
    out += manager.handle_user_message(sess.session_id, "hello")
    out += manager.handle_user_message(sess.session_id, "i want a comedy movie")
    out += manager.handle_user_message(sess.session_id, "i will watch it")
    assert [m.seq for m in out] == list(range(1, len(out) + 1))
    types = [m.type for m in out]
    assert "recommendation" in types
    rec = next(m for m in out if m.type == "recommendation")
    assert rec.payload["explanation"] == "Because you asked for comedy."
    assert "title" in rec.payload and "genres" in rec.payload


def test_session_isolation_interleaved_equals_serial(tmp_path):
    script_a = ["hello", "i want a comedy movie", "i will watch it"]
    script_b = ["i want an action movie", "something different please", "bye"]

    def run_serial():
        manager = make_manager(tmp_path / "serial")
        results = []
        for script in (script_a, script_b):
            sess = manager.create_session()
            out = manager.drain(sess.session_id)
            for line in script:
                out += manager.handle_user_message(sess.session_id, line)
            results.append([(m.type, m.payload.get("text")) for m in out])
        return results

    def run_interleaved():
        manager = make_manager(tmp_path / "interleaved")
        sa = manager.create_session()
        sb = manager.create_session()
        out_a = manager.drain(sa.session_id)
        out_b = manager.drain(sb.session_id)
        for line_a, line_b in zip(script_a, script_b):
            out_a += manager.handle_user_message(sa.session_id, line_a)
            out_b += manager.handle_user_message(sb.session_id, line_b)
        return [
            [(m.type, m.payload.get("text")) for m in out_a],
            [(m.type, m.payload.get("text")) for m in out_b],
        ]

    assert run_serial() == run_interleaved()


def test_soft_reset_on_tracker_error(tmp_path):
    manager = make_manager(tmp_path)
    sess = manager.create_session()
    manager.drain(sess.session_id)
    # ACCEPT with no outstanding recommendation violates a precondition.
    out = manager.handle_user_message(sess.session_id, "i will watch it")
    assert [m.type for m in out] == ["error", "agent_message"]
    assert out[1].payload["intent"] == "WELCOME"
    assert not sess.terminated
    # The session keeps working afterwards.
    again = manager.handle_user_message(sess.session_id, "i want a comedy movie")
    assert any(m.type == "recommendation" for m in again)


def test_terminated_session_rejects_messages(tmp_path):
    manager = make_manager(tmp_path)
    sess = manager.create_session()
    manager.handle_user_message(sess.session_id, "bye")
    with pytest.raises(TerminatedSessionError):
        manager.handle_user_message(sess.session_id, "hello")


def test_unknown_session(tmp_path):
    manager = make_manager(tmp_path)
    with pytest.raises(UnknownSessionError):
        manager.handle_user_message("nope", "hello")


def test_idle_expiry(tmp_path):
    manager = make_manager(tmp_path, idle_timeout=0.0)
    sess = manager.create_session()
    sess.last_activity -= 1.0
    with pytest.raises(UnknownSessionError):
        manager.handle_user_message(sess.session_id, "hello")


def test_anonymous_user_model_denied(tmp_path):
    manager = make_manager(tmp_path)
    sess = manager.create_session()
    with pytest.raises(NotAuthenticatedError):
        manager.get_user_model(sess.session_id)


def test_login_chat_persist_reload(tmp_path):
    manager = make_manager(tmp_path)
    manager.auth_store.register("maria", PASSWORD)

    sess = manager.create_session()
    manager.drain(sess.session_id)
    msg = manager.login(sess.session_id, "maria", PASSWORD)
    assert msg.type == "system" and msg.payload["user"] == "maria"

    manager.handle_user_message(sess.session_id, "i want a comedy movie")
    summary = manager.get_user_model(sess.session_id, "summary")
    assert "You like comedy movies." in summary.payload["statements"]
    manager.handle_user_message(sess.session_id, "bye")

    # A fresh session after login sees the promoted long-term preference.
    sess2 = manager.create_session()
    manager.login(sess2.session_id, "maria", PASSWORD)
    raw = manager.get_user_model(sess2.session_id, "raw")
    pairs = raw.payload["pairs"]
    assert {"slot": "genre", "value": "comedy", "polarity": 1, "scope": "long_term"} in pairs
    # And the merged frame influences the first recommendation directly.
    out = manager.handle_user_message(sess2.session_id, "hello")
    assert any(
        m.type == "agent_message" and m.payload["intent"] == "RECOMMEND" for m in out
    ) or any(m.type == "recommendation" for m in out)


def test_latest_wins_in_view_history_in_log(tmp_path):
    manager = make_manager(tmp_path)
    manager.auth_store.register("u", PASSWORD)
    sess = manager.create_session()
    manager.login(sess.session_id, "u", PASSWORD)
    manager.handle_user_message(sess.session_id, "no comedy movies please")
    manager.handle_user_message(sess.session_id, "i want a comedy movie")
    model = manager.user_store.load("u")
    assert len(model.events) == 2  # both polarities kept in the log
    assert model.current_view()[next(iter(model.current_view()))] == 1
    raw = manager.get_user_model(sess.session_id, "raw")
    comedy = [p for p in raw.payload["pairs"] if p["value"] == "comedy"]
    assert comedy == [
        {"slot": "genre", "value": "comedy", "polarity": 1, "scope": "short_term"}
    ]


def test_bad_login(tmp_path):
    manager = make_manager(tmp_path)
    manager.auth_store.register("maria", PASSWORD)
    sess = manager.create_session()
    with pytest.raises(BadCredentialsError):
        manager.login(sess.session_id, "maria", "wrong")
    with pytest.raises(UnknownUserError):
        manager.login(sess.session_id, "ghost", PASSWORD)


def test_store_dir_never_contains_plaintext_password(tmp_path):
    manager = make_manager(tmp_path)
    manager.auth_store.register("maria", PASSWORD)
    sess = manager.create_session()
    manager.login(sess.session_id, "maria", PASSWORD)
    manager.handle_user_message(sess.session_id, "i want a comedy movie")
    manager.handle_user_message(sess.session_id, "bye")
    for path in tmp_path.rglob("*"):
        if path.is_file():
            assert PASSWORD not in path.read_text(errors="ignore"), path


# ---------------------------------------------------------------------------
# REST and websocket


@pytest.fixture()
def client(tmp_path):
    manager = make_manager(tmp_path)
    app = create_app(GatewayConfig(store_dir=str(tmp_path)), manager=manager)
    return TestClient(app)


def test_rest_session_lifecycle(client):
    resp = client.post("/api/sessions")
    assert resp.status_code == 201
    session = resp.json()["session"]

    resp = client.post(f"/api/sessions/{session}/messages", json={"text": "hello"})
    assert resp.status_code == 200
    frames = resp.json()
    assert all(set(f) == {"type", "session", "payload", "seq"} for f in frames)
    assert all(f["session"] == session for f in frames)

    resp = client.post(f"/api/sessions/{session}/messages", json={"text": "bye"})
    assert resp.status_code == 200
    resp = client.post(f"/api/sessions/{session}/messages", json={"text": "hi"})
    assert resp.status_code == 409


def test_rest_errors(client):
    assert client.post("/api/sessions/nope/messages", json={"text": "x"}).status_code == 404
    session = client.post("/api/sessions").json()["session"]
    assert client.post(f"/api/sessions/{session}/messages", json={}).status_code == 400
    assert client.get(f"/api/sessions/{session}/user-model").status_code == 401


def test_rest_auth_flow(client):
    assert (
        client.post("/api/auth/register", json={"user": "maria", "password": PASSWORD}).status_code
        == 201
    )
    assert (
        client.post("/api/auth/register", json={"user": "maria", "password": "x"}).status_code
        == 409
    )
    assert client.post("/api/auth/register", json={"user": "", "password": "x"}).status_code == 400

    session = client.post("/api/sessions").json()["session"]
    resp = client.post(
        "/api/auth/login", json={"session": session, "user": "maria", "password": "bad"}
    )
    assert resp.status_code == 401
    resp = client.post(
        "/api/auth/login", json={"session": session, "user": "maria", "password": PASSWORD}
    )
    assert resp.status_code == 200
    assert resp.json()["type"] == "system"

    client.post(f"/api/sessions/{session}/messages", json={"text": "i want a comedy movie"})
    resp = client.get(f"/api/sessions/{session}/user-model", params={"form": "summary"})
    assert resp.status_code == 200
    assert "You like comedy movies." in resp.json()["payload"]["statements"]
    assert client.get(
        f"/api/sessions/{session}/user-model", params={"form": "telepathic"}
    ).status_code == 400


def test_websocket_round_trip(client):
    session = client.post("/api/sessions").json()["session"]
    with client.websocket_connect("/ws") as ws:
        ws.send_json(
            {"type": "user_message", "session": session, "payload": {"text": "hello"}}
        )
        first = ws.receive_json()
        assert first["payload"]["intent"] == "WELCOME"  # drained backlog
        assert first["seq"] == 1
        second = ws.receive_json()
        assert second["type"] == "agent_message"
        assert second["seq"] == 2

        ws.send_json(
            {"type": "user_message", "session": "bogus", "payload": {"text": "x"}}
        )
        err = ws.receive_json()
        assert err["type"] == "error" and err["seq"] == 0


def test_gateway_config_env_overrides(tmp_path):
    cfg_path = tmp_path / "gateway.json"
    cfg_path.write_text(json.dumps({"port": 9001, "nlu": "rule"}))
    cfg = GatewayConfig.load(
        env={"MOVIEBOT_CONFIG": str(cfg_path), "MOVIEBOT_ADDR": "0.0.0.0:7777"}
    )
    assert cfg.port == 7777
    assert cfg.host == "0.0.0.0"
    assert cfg.nlu == "rule"
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"warp_speed": 9}))
        GatewayConfig.load(env={"MOVIEBOT_CONFIG": str(bad)})
