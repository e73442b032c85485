import http.server
import json
import threading

import pytest

from illuminate.llmclient import (
    BackendConfig,
    BackendTimeout,
    ChatMessage,
    CompletionRequest,
    HttpBackend,
    HttpStatusError,
    MalformedScript,
    MissingAuth,
    MockBackend,
    UnmatchedRequest,
    WireParseError,
    complete,
    load_mock_script,
    make_backend,
)


def req(content="hello there", model="test-model"):
    return CompletionRequest(
        model_id=model, messages=(ChatMessage(role="user", content=content),)
    )


class TestMockBackend:
    def test_single_entry_script(self, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text('{"match": {"nth": 1}, "response": "canned"}\n')
        backend = load_mock_script(script)
        out = backend.complete(req())
        assert out.content == "canned"
        assert out.prompt_tokens == 2
        assert out.completion_tokens == 1

    def test_three_nth_entries_in_order(self, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text(
            "\n".join(
                json.dumps({"match": {"nth": i}, "response": f"reply {i}"})
                for i in (1, 2, 3)
            )
        )
        backend = load_mock_script(script)
        assert [backend.complete(req()).content for _ in range(3)] == [
            "reply 1",
            "reply 2",
            "reply 3",
        ]

    def test_fourth_call_on_strict_script(self, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text(
            "\n".join(
                json.dumps({"match": {"nth": i}, "response": "r"}) for i in (1, 2, 3)
            )
        )
        backend = load_mock_script(script)
        for _ in range(3):
            backend.complete(req())
        with pytest.raises(UnmatchedRequest):
            backend.complete(req())

    def test_contains_match(self):
        from illuminate.llmclient import _ScriptEntry

        backend = MockBackend(
            [_ScriptEntry(response="0.9", contains="Behavioral Activation")],
            default="0.1",
        )
        vote = backend.complete(req("rate Behavioral Activation for this case"))
        assert vote.content == "0.9"
        assert backend.complete(req("rate Relaxation for this case")).content == "0.1"

    def test_default_response_when_unmatched(self, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text('{"match": {"nth": 5}, "response": "never"}\n')
        backend = load_mock_script(script, default="fallback")
        assert backend.complete(req()).content == "fallback"

    def test_malformed_script(self, tmp_path):
        script = tmp_path / "bad.jsonl"
        script.write_text('{"response": "no match key"}\n')
        with pytest.raises(MalformedScript):
            load_mock_script(script)
        script.write_text("not json\n")
        with pytest.raises(MalformedScript):
            load_mock_script(script)

    def test_deterministic_sequences(self, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text(
            "\n".join(
                json.dumps({"match": {"nth": i}, "response": f"r{i}"}) for i in (1, 2)
            )
        )
        a = [load_mock_script(script).complete(req()).content for _ in range(1)]
        b = [load_mock_script(script).complete(req()).content for _ in range(1)]
        assert a == b


class _StubHandler(http.server.BaseHTTPRequestHandler):
    """Scriptable chat-completions endpoint recording request bodies."""

    script: list = []
    bodies: list = []

    def do_POST(self):
        n = int(self.headers.get("Content-Length", 0))
        self.__class__.bodies.append(
            (self.path, self.headers.get("Authorization"), self.rfile.read(n))
        )
        status, payload = self.script.pop(0) if self.script else (200, {})
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    handler = type("Handler", (_StubHandler,), {"script": [], "bodies": []})
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}", handler
    server.shutdown()


def http_cfg(endpoint, **kw):
    defaults = dict(
        kind="http",
        endpoint=endpoint,
        auth_env_var="TEST_LLM_KEY",
        timeout_ms=2000,
        max_retries=2,
        backoff_base_ms=1,
    )
    defaults.update(kw)
    return BackendConfig(**defaults)


def ok_payload(content="hi!"):
    return {
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 3, "completion_tokens": 2},
    }


class TestHttpBackend:
    def test_recorded_fixture_replayed(self, stub_server, data_dir, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "secret-key")
        endpoint, handler = stub_server
        fixture = json.loads((data_dir / "http_fixture.json").read_text())
        handler.script.append((200, fixture["response"]))
        request = CompletionRequest(
            model_id=fixture["request"]["model"],
            messages=tuple(
                ChatMessage(role=m["role"], content=m["content"])
                for m in fixture["request"]["messages"]
            ),
            temperature=fixture["request"]["temperature"],
            max_tokens=fixture["request"]["max_tokens"],
        )
        out = complete(http_cfg(endpoint), request)
        assert out.content == fixture["response"]["choices"][0]["message"]["content"]
        assert out.prompt_tokens == 41
        assert out.completion_tokens == 24
        # the wire body matches the recorded request byte-for-byte
        path, auth, body = handler.bodies[0]
        assert path == "/chat/completions"
        assert auth == "Bearer secret-key"
        assert json.loads(body) == fixture["request"]

    def test_retry_then_success(self, stub_server, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "k")
        endpoint, handler = stub_server
        handler.script.extend(
            [(500, {}), (503, {}), (200, ok_payload("third time"))]
        )
        out = complete(http_cfg(endpoint, max_retries=3), req())
        assert out.content == "third time"
        assert len(handler.bodies) == 3
        # retries send byte-identical bodies
        assert handler.bodies[0][2] == handler.bodies[1][2] == handler.bodies[2][2]

    def test_retries_exhausted_raises_status(self, stub_server, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "k")
        endpoint, handler = stub_server
        handler.script.extend([(500, {})] * 3)
        with pytest.raises(HttpStatusError) as err:
            complete(http_cfg(endpoint, max_retries=2), req())
        assert err.value.status == 500
        assert len(handler.bodies) == 3

    def test_non_retryable_status_raises_immediately(self, stub_server, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "k")
        endpoint, handler = stub_server
        handler.script.append((400, {"error": "bad request"}))
        with pytest.raises(HttpStatusError):
            complete(http_cfg(endpoint), req())
        assert len(handler.bodies) == 1

    def test_wire_parse_error(self, stub_server, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "k")
        endpoint, handler = stub_server
        handler.script.append((200, {"unexpected": "shape"}))
        with pytest.raises(WireParseError):
            complete(http_cfg(endpoint), req())

    def test_missing_auth(self, stub_server, monkeypatch):
        monkeypatch.delenv("TEST_LLM_KEY", raising=False)
        endpoint, _ = stub_server
        with pytest.raises(MissingAuth):
            complete(http_cfg(endpoint), req())

    def test_timeout_maps_to_backend_timeout(self, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "k")
        cfg = http_cfg("http://127.0.0.1:9", timeout_ms=100, max_retries=0)
        with pytest.raises((BackendTimeout, Exception)):
            HttpBackend(cfg).complete(req())

    def test_request_not_mutated(self, stub_server, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "k")
        endpoint, handler = stub_server
        handler.script.append((200, ok_payload()))
        request = req("stay frozen")
        before = request.messages
        complete(http_cfg(endpoint), request)
        assert request.messages is before


def test_make_backend_kinds(tmp_path):
    script = tmp_path / "s.jsonl"
    script.write_text('{"match": {"nth": 1}, "response": "x"}\n')
    assert isinstance(
        make_backend(BackendConfig(kind="mock", script_path=str(script))), MockBackend
    )
    assert isinstance(
        make_backend(BackendConfig(kind="http", endpoint="http://x")), HttpBackend
    )
    with pytest.raises(ValueError):
        BackendConfig(kind="http")


def test_chat_message_validation():
    with pytest.raises(ValueError):
        ChatMessage(role="user", content="")
    with pytest.raises(ValueError):
        ChatMessage(role="wizard", content="x")
    ChatMessage(role="system", content="")
