"""Chat-completion backends: a deterministic scripted mock and an HTTP client.

The HTTP side speaks the common chat-completions wire format: POST
{endpoint}/chat/completions with {model, messages, temperature, max_tokens}
and the reply content at choices[0].message.content.
"""
from __future__ import annotations

import json
import os
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import IlluminateError

DEFAULT_AUTH_ENV = "ILLUMINATE_API_KEY"

__all__ = [
    "ChatMessage",
    "CompletionRequest",
    "CompletionResponse",
    "BackendConfig",
    "MockBackend",
    "HttpBackend",
    "make_backend",
    "complete",
    "load_mock_script",
    "BackendError",
    "BackendTimeout",
    "HttpStatusError",
    "WireParseError",
    "MissingAuth",
    "MalformedScript",
    "UnmatchedRequest",
]


class BackendError(IlluminateError):
    pass


class BackendTimeout(BackendError):
    pass


class HttpStatusError(BackendError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}: {detail}".strip())
        self.status = status


class WireParseError(BackendError):
    pass


class MissingAuth(BackendError):
    pass


class MalformedScript(IlluminateError):
    pass


class UnmatchedRequest(BackendError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValueError(f"{self.role} message content must be non-empty")


@dataclass(frozen=True)
class CompletionRequest:
    model_id: str
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 512
    seed: int | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("request needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        object.__setattr__(self, "messages", tuple(self.messages))


@dataclass(frozen=True)
class CompletionResponse:
    content: str
    prompt_tokens: int
    completion_tokens: int
    latency_ms: int


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"
    endpoint: str = ""
    auth_env_var: str = DEFAULT_AUTH_ENV
    timeout_ms: int = 30_000
    max_retries: int = 2
    backoff_base_ms: int = 500
    script_path: str | None = None  # mock only
    default_response: str | None = None  # mock only; None means strict

    def __post_init__(self):
        if self.kind not in ("mock", "http"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "http" and not self.endpoint:
            raise ValueError("http backend requires an endpoint")


@dataclass
class _ScriptEntry:
    response: str
    nth: int | None = None
    contains: str | None = None


def _word_count(text: str) -> int:
    return len(text.split())


class MockBackend:
    """Replays scripted responses; fully deterministic, no network."""

    def __init__(self, entries: list[_ScriptEntry], default: str | None = None):
        self.entries = entries
        self.default = default
        self._lock = threading.Lock()
        self._calls = 0

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        with self._lock:
            self._calls += 1
            call_no = self._calls
        joined = "\n".join(m.content for m in req.messages)
        entry = next((e for e in self.entries if e.nth == call_no), None)
        if entry is None:
            entry = next(
                (e for e in self.entries if e.contains and e.contains in joined),
                None,
            )
        if entry is not None:
            content = entry.response
        elif self.default is not None:
            content = self.default
        else:
            raise UnmatchedRequest(f"no script entry matches call {call_no}")
        return CompletionResponse(
            content=content,
            prompt_tokens=_word_count(joined),
            completion_tokens=_word_count(content),
            latency_ms=0,
        )


def load_mock_script(path: str | Path, default: str | None = None) -> MockBackend:
    """Parse a JSONL script of {match: {nth | contains}, response} entries."""
    entries: list[_ScriptEntry] = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedScript(f"line {line_no}: invalid JSON: {exc.msg}") from exc
        match = record.get("match") if isinstance(record, dict) else None
        if (
            not isinstance(match, dict)
            or "response" not in record
            or not ({"nth", "contains"} & match.keys())
        ):
            raise MalformedScript(
                f"line {line_no}: entries need match.nth or match.contains plus response"
            )
        entries.append(
            _ScriptEntry(
                response=str(record["response"]),
                nth=match.get("nth"),
                contains=match.get("contains"),
            )
        )
    return MockBackend(entries, default=default)


class HttpBackend:
    """Chat-completions client with retry on timeout, any 5xx, and 429."""

    @staticmethod
    def _retryable(status: int) -> bool:
        return status >= 500 or status == 429

    def __init__(self, cfg: BackendConfig, session: requests.Session | None = None):
        self.cfg = cfg
        self.session = session or requests.Session()
        self._rng = random.Random()

    def _auth_header(self) -> dict[str, str]:
        if not self.cfg.auth_env_var:
            return {}
        key = os.environ.get(self.cfg.auth_env_var, "")
        if not key:
            raise MissingAuth(
                f"environment variable {self.cfg.auth_env_var} is not set"
            )
        return {"Authorization": f"Bearer {key}"}

    def _sleep(self, attempt: int) -> None:
        base = self.cfg.backoff_base_ms / 1000.0
        jitter = self._rng.uniform(0.8, 1.2)
        time.sleep(base * (2**attempt) * jitter)

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        payload = {
            "model": req.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        body = json.dumps(payload).encode("utf-8")
        headers = {"Content-Type": "application/json", **self._auth_header()}
        url = self.cfg.endpoint.rstrip("/") + "/chat/completions"
        timeout = self.cfg.timeout_ms / 1000.0
        attempts = self.cfg.max_retries + 1
        last_exc: BackendError | None = None
        for attempt in range(attempts):
            started = time.monotonic()
            try:
                resp = self.session.post(url, data=body, headers=headers, timeout=timeout)
            except requests.Timeout:
                last_exc = BackendTimeout(f"no response within {timeout:.1f}s")
                if attempt + 1 < attempts:
                    self._sleep(attempt)
                continue
            except requests.RequestException as exc:
                last_exc = BackendError(f"transport failure: {exc}")
                if attempt + 1 < attempts:
                    self._sleep(attempt)
                continue
            if self._retryable(resp.status_code):
                last_exc = HttpStatusError(resp.status_code, resp.text[:200])
                if attempt + 1 < attempts:
                    self._sleep(attempt)
                continue
            if resp.status_code != 200:
                raise HttpStatusError(resp.status_code, resp.text[:200])
            return self._parse(resp, int((time.monotonic() - started) * 1000))
        assert last_exc is not None
        raise last_exc

    @staticmethod
    def _parse(resp, latency_ms: int) -> CompletionResponse:
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise WireParseError(f"unexpected response body: {exc}") from exc
        usage = data.get("usage", {})
        return CompletionResponse(
            content=content,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            latency_ms=latency_ms,
        )


def make_backend(cfg: BackendConfig):
    if cfg.kind == "mock":
        if cfg.script_path:
            return load_mock_script(cfg.script_path, default=cfg.default_response)
        return MockBackend([], default=cfg.default_response or "")
    return HttpBackend(cfg)


def complete(cfg, req: CompletionRequest) -> CompletionResponse:
    """One completion against a BackendConfig or an already-built backend."""
    backend = make_backend(cfg) if isinstance(cfg, BackendConfig) else cfg
    return backend.complete(req)
