"""Chat-completion providers: OpenAI-compatible HTTP plus deterministic test kinds.

The replay provider keys canned responses by a digest of the message list, so
recorded fixtures survive refactors that change call counts; the scripted
provider hands out queued responses in order.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import requests

from .executor import CandidateScript

API_KEY_ENV = "CHATVIS_API_KEY"
BASE_URL_ENV = "CHATVIS_BASE_URL"
DEFAULT_BASE_URL = "https://api.openai.com"

_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


class LlmError(Exception):
    """Base class for provider failures."""


class TransportError(LlmError):
    def __init__(self, message: str, status: int | None = None) -> None:
        super().__init__(message)
        self.status = status


class FixtureMissError(LlmError):
    def __init__(self, digest: str) -> None:
        super().__init__(f"no replay fixture for message digest {digest}")
        self.digest = digest


class ScriptedExhaustedError(LlmError):
    def __init__(self) -> None:
        super().__init__("scripted provider has no queued responses left")


class EmptyScriptError(LlmError):
    def __init__(self, completion: str) -> None:
        super().__init__("completion contained no script text")
        self.completion = completion


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"{self.role} message content must be non-empty")


def system(content: str) -> ChatMessage:
    return ChatMessage("system", content)


def user(content: str) -> ChatMessage:
    return ChatMessage("user", content)


@dataclass(frozen=True)
class ModelParams:
    model: str = "gpt-4"
    temperature: float = 0.2
    max_tokens: int = 4096
    request_timeout: float = 60.0
    max_retries: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class LlmProvider(Protocol):
    kind: str

    def complete(self, messages: list[ChatMessage], params: ModelParams) -> str: ...


def digest_messages(messages: list[ChatMessage]) -> str:
    """Stable digest of the (role, content) sequence; any edit or reorder changes it."""
    payload = json.dumps(
        [[m.role, m.content] for m in messages],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def total_chars(messages: list[ChatMessage]) -> int:
    """Assembled content length, for enforcing a provider context budget."""
    return sum(len(m.content) for m in messages)


class HttpProvider:
    """POSTs to `{base_url}/v1/chat/completions` with bearer auth.

    Retries 429 and 5xx responses (and transport failures) with exponential
    backoff: base delay doubling each attempt, 10% jitter. A semaphore caps
    concurrent in-flight requests across sessions.
    """

    kind = "http"

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        backoff_base: float = 1.0,
        max_in_flight: int = 4,
        session: requests.Session | None = None,
    ) -> None:
        self.base_url = (base_url or os.environ.get(BASE_URL_ENV) or DEFAULT_BASE_URL).rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.backoff_base = backoff_base
        self._gate = threading.Semaphore(max_in_flight)
        self._session = session or requests.Session()

    def complete(self, messages: list[ChatMessage], params: ModelParams) -> str:
        body = {
            "model": params.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"}
        url = f"{self.base_url}/v1/chat/completions"

        last_status: int | None = None
        last_error = "request failed"
        for attempt in range(params.max_retries + 1):
            if attempt:
                delay = self.backoff_base * (2 ** (attempt - 1))
                time.sleep(delay * (1.0 + random.random() * 0.1))
            try:
                with self._gate:
                    response = self._session.post(
                        url, json=body, headers=headers, timeout=params.request_timeout
                    )
            except requests.RequestException as exc:
                last_status, last_error = None, str(exc)
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_status = response.status_code
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"HTTP {response.status_code}: {response.text[:200]}",
                    status=response.status_code,
                )
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise TransportError(f"malformed completion response: {exc}") from exc
        raise TransportError(
            f"exhausted {params.max_retries} retries: {last_error}", status=last_status
        )


class ReplayProvider:
    """Serves fixtures from a directory of `<digest>.txt` files."""

    kind = "replay"

    def __init__(self, fixtures_dir: str | Path) -> None:
        self.fixtures_dir = Path(fixtures_dir)

    def complete(self, messages: list[ChatMessage], params: ModelParams) -> str:
        digest = digest_messages(messages)
        fixture = self.fixtures_dir / f"{digest}.txt"
        if not fixture.exists():
            raise FixtureMissError(digest)
        return fixture.read_text(encoding="utf-8")


class ScriptedProvider:
    """Returns queued responses in order; thread-safe, raises when exhausted."""

    kind = "scripted"

    def __init__(self, responses: list[str]) -> None:
        self._responses = list(responses)
        self._lock = threading.Lock()

    def complete(self, messages: list[ChatMessage], params: ModelParams) -> str:
        with self._lock:
            if not self._responses:
                raise ScriptedExhaustedError()
            return self._responses.pop(0)

    def remaining(self) -> int:
        with self._lock:
            return len(self._responses)


class RecordingProvider:
    """Wraps another provider and writes each response as a replay fixture."""

    kind = "recording"

    def __init__(self, inner: LlmProvider, fixtures_dir: str | Path) -> None:
        self.inner = inner
        self.fixtures_dir = Path(fixtures_dir)

    def complete(self, messages: list[ChatMessage], params: ModelParams) -> str:
        response = self.inner.complete(messages, params)
        self.fixtures_dir.mkdir(parents=True, exist_ok=True)
        digest = digest_messages(messages)
        (self.fixtures_dir / f"{digest}.txt").write_text(response, encoding="utf-8")
        return response


def extract_script(completion: str, iteration: int = 0) -> CandidateScript:
    """Pull the script out of a completion.

    Chat models routinely wrap code in markdown fences even when told not to;
    the first fence's interior wins, otherwise the whole completion (trimmed)
    is taken as the script.
    """
    match = _FENCE_RE.search(completion)
    if match:
        body, fenced = match.group(1).strip(), True
    else:
        body, fenced = completion.strip(), False
    if not body:
        raise EmptyScriptError(completion)
    return CandidateScript(body=body, iteration=iteration, from_fence=fenced)
