"""Text-completion backends: a live chat-completion client and a scripted stand-in."""

from __future__ import annotations

import json
import logging
import math
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import httpx

from .errors import (
    BackendTimeoutError,
    InvalidInputError,
    ProviderError,
    RateLimitError,
    RefusalError,
    TransportError,
    UnmatchedPromptError,
)

logger = logging.getLogger(__name__)

MODEL_CONTEXT_TOKENS = 8192
BUDGET_SAFETY_MARGIN = 0.10

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class CompletionRequest:
    system_prompt: str
    user_prompt: str
    max_output_tokens: int = 1024
    temperature: float = 0.0

    def __post_init__(self):
        if not self.system_prompt.strip() or not self.user_prompt.strip():
            raise InvalidInputError("completion prompts must be non-empty")
        if self.max_output_tokens < 1:
            raise InvalidInputError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise InvalidInputError("temperature must be >= 0")


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    input_tokens: int = 0
    output_tokens: int = 0
    latency_ms: int = 0


class Backend(Protocol):
    name: str

    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


def estimate_tokens(text: str) -> int:
    """Rough token count: one token per four characters, rounded up."""
    return math.ceil(len(text) / 4)


def effective_budget(token_budget: int) -> int:
    """Budget left after the safety margin that absorbs estimation error."""
    return int(token_budget * (1 - BUDGET_SAFETY_MARGIN))


def request_tokens(request: CompletionRequest) -> int:
    return estimate_tokens(request.system_prompt) + estimate_tokens(request.user_prompt)


class _SharedBackend:
    # Estimator cloning deep-copies parameters; a backend is a shared
    # connection with its own lock, so copies alias the original.
    def __deepcopy__(self, memo):
        return self


class ScriptedBackend(_SharedBackend):
    """Deterministic backend answering from an ordered list of (substring, reply) pairs.

    The first pair whose substring occurs in the user prompt wins. Every
    request is appended to ``requests`` (guarded by a lock, since callers may
    fan out across threads).
    """

    name = "scripted"

    def __init__(self, script: Sequence[tuple[str, str]]):
        if not script:
            raise InvalidInputError("script must be non-empty")
        self.script = [(str(m), str(r)) for m, r in script]
        self.requests: list[CompletionRequest] = []
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        with self._lock:
            self.requests.append(request)
        for matcher, reply in self.script:
            if matcher in request.user_prompt:
                return CompletionResponse(
                    text=reply,
                    input_tokens=request_tokens(request),
                    output_tokens=estimate_tokens(reply),
                    latency_ms=0,
                )
        head = request.user_prompt[:80].replace("\n", " ")
        raise UnmatchedPromptError(f"no scripted response matches prompt starting {head!r}")


def scripted_backend(script: Sequence[tuple[str, str]]) -> ScriptedBackend:
    return ScriptedBackend(script)


def load_script(path) -> ScriptedBackend:
    """Read a script file: a JSON list of ``[matcher, response]`` pairs."""
    from .domain import read_json
    from .errors import SchemaError

    data = read_json(path)
    if not isinstance(data, list) or not all(isinstance(p, list) and len(p) == 2 for p in data):
        raise SchemaError(f"{path}: expected a JSON list of [matcher, response] pairs")
    return ScriptedBackend([tuple(p) for p in data])


class LiveBackend(_SharedBackend):
    """Chat-completion client over HTTPS with exponential-backoff retries."""

    name = "live"

    def __init__(
        self,
        endpoint_url: str,
        api_key: str,
        model_name: str = "gpt-4",
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff_s: float = 1.0,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint_url = endpoint_url
        self.model_name = model_name
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self._sleep = sleep
        self._client = httpx.Client(
            timeout=timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"},
        )

    def __repr__(self):
        return f"LiveBackend(endpoint_url={self.endpoint_url!r}, model_name={self.model_name!r})"

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        payload = {
            "model": self.model_name,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                delay = self.backoff_s * 2 ** (attempt - 1)
                logger.warning("retrying completion in %.1fs after: %s", delay, last_error)
                self._sleep(delay)
            start = time.monotonic()
            try:
                resp = self._client.post(self.endpoint_url, json=payload)
            except httpx.TimeoutException as exc:
                last_error = BackendTimeoutError(f"request to {self.endpoint_url} timed out: {exc}")
                continue
            except httpx.TransportError as exc:
                last_error = TransportError(f"request to {self.endpoint_url} failed: {exc}")
                continue
            latency_ms = int((time.monotonic() - start) * 1000)
            if resp.status_code in RETRYABLE_STATUS:
                cls = RateLimitError if resp.status_code == 429 else TransportError
                last_error = cls(f"HTTP {resp.status_code} from {self.endpoint_url}")
                continue
            if not 200 <= resp.status_code < 300:
                raise ProviderError(resp.status_code, resp.text[:500])
            return self._parse(resp, request, latency_ms)
        assert last_error is not None
        raise TransportError(f"giving up after {self.max_retries + 1} attempts: {last_error}") from last_error

    def _parse(self, resp: httpx.Response, request: CompletionRequest, latency_ms: int) -> CompletionResponse:
        try:
            body = resp.json()
            choice = body["choices"][0]
            message = choice.get("message") or {}
        except (ValueError, KeyError, IndexError, TypeError):
            raise ProviderError(resp.status_code, resp.text[:500]) from None
        if message.get("refusal") or choice.get("finish_reason") == "content_filter":
            raise RefusalError(message.get("refusal") or "completion withheld by content filter")
        text = message.get("content") or ""
        usage = body.get("usage") or {}
        return CompletionResponse(
            text=text,
            input_tokens=int(usage.get("prompt_tokens", request_tokens(request))),
            output_tokens=int(usage.get("completion_tokens", estimate_tokens(text))),
            latency_ms=latency_ms,
        )


def live_backend(endpoint_url, api_key, model_name="gpt-4", timeout=60.0, max_retries=3, **kwargs) -> LiveBackend:
    return LiveBackend(endpoint_url, api_key, model_name, timeout, max_retries, **kwargs)


class TranscriptBackend(_SharedBackend):
    """Wraps a backend and writes each request/response pair to its own JSON file."""

    def __init__(self, inner: Backend, directory):
        self.inner = inner
        self.name = getattr(inner, "name", "backend")
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._count = 0
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        with self._lock:
            self._count += 1
            n = self._count
        record = {
            "system_prompt": request.system_prompt,
            "user_prompt": request.user_prompt,
            "max_output_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        }
        try:
            response = self.inner.complete(request)
        except Exception as exc:
            record["error"] = f"{type(exc).__name__}: {exc}"
            self._write(n, record)
            raise
        record["response"] = {
            "text": response.text,
            "input_tokens": response.input_tokens,
            "output_tokens": response.output_tokens,
            "latency_ms": response.latency_ms,
        }
        self._write(n, record)
        return response

    def _write(self, n, record):
        path = self.directory / f"call-{n:04d}.json"
        path.write_text(json.dumps(record, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
