"""Chat backends and the gateway wrapper.

Two backends ship: a deterministic scripted backend used as the test
oracle, and an OpenAI-compatible HTTP backend configured through
MMIA_BACKEND_URL / MMIA_BACKEND_KEY / MMIA_BACKEND_MODEL. The gateway
serializes every call into an append-only JSONL audit file.
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path
from typing import Callable, Protocol

import httpx

from ..errors import BackendError, ProtocolError
from .tokens import count_tokens
from .types import ChatRequest, ChatResponse, ScriptedScenario, TokenUsage

ENV_URL = "MMIA_BACKEND_URL"
ENV_KEY = "MMIA_BACKEND_KEY"
ENV_MODEL = "MMIA_BACKEND_MODEL"


class BackendHandle(Protocol):
    backend_id: str

    def complete(self, request: ChatRequest) -> ChatResponse: ...


class ScriptedBackend:
    """Replays canned responses from a ScriptedScenario; pure and shareable."""

    def __init__(self, scenario: ScriptedScenario, backend_id: str | None = None):
        self.scenario = scenario
        self.backend_id = backend_id or f"scripted:{scenario.name}"

    def complete(self, request: ChatRequest) -> ChatResponse:
        text, usage = self.scenario.respond(request)
        return ChatResponse(text=text, usage=usage, backend_id=self.backend_id)


class HttpBackend:
    """OpenAI-compatible chat-completions client.

    Transport failures retry with exponential backoff (3 attempts); any
    4xx status is a hard backend-error with no retry.
    """

    def __init__(
        self,
        url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        timeout: float = 60.0,
        attempts: int = 3,
        backoff: float = 0.5,
    ):
        self.url = url or os.environ.get(ENV_URL, "")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "")
        if not self.url:
            raise BackendError(f"no backend URL configured (set {ENV_URL})")
        self.timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self.backend_id = f"http:{self.model or 'default'}"

    def complete(self, request: ChatRequest) -> ChatResponse:
        payload = {
            "model": self.model,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_exc: Exception | None = None
        for attempt in range(self.attempts):
            try:
                resp = httpx.post(self.url, json=payload, headers=headers, timeout=self.timeout)
            except httpx.HTTPError as exc:
                last_exc = exc
                if attempt < self.attempts - 1:
                    time.sleep(self.backoff * (2**attempt))
                continue
            if 400 <= resp.status_code < 500:
                raise BackendError(f"backend rejected request: HTTP {resp.status_code}")
            if resp.status_code >= 500:
                last_exc = BackendError(f"backend HTTP {resp.status_code}")
                if attempt < self.attempts - 1:
                    time.sleep(self.backoff * (2**attempt))
                continue
            body = resp.json()
            text = body["choices"][0]["message"]["content"]
            usage_d = body.get("usage") or {}
            usage = TokenUsage(
                int(usage_d.get("prompt_tokens", count_tokens(request.system_prompt + request.user_prompt))),
                int(usage_d.get("completion_tokens", count_tokens(text))),
            )
            return ChatResponse(text=text, usage=usage, backend_id=self.backend_id)
        raise BackendError(f"backend unreachable after {self.attempts} attempts: {last_exc}")


class Gateway:
    """Routes requests to a backend and records every call in an audit file."""

    def __init__(self, backend: BackendHandle, audit_path: Path | None = None, replay: bool = False):
        self.backend = backend
        self.audit_path = audit_path
        self.replay = replay
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        response = self.backend.complete(request)
        self._record(request, response)
        return response

    def _record(self, request: ChatRequest, response: ChatResponse) -> None:
        if self.audit_path is None:
            return
        record = {
            "backend_id": response.backend_id,
            "prompt_tokens": response.usage.prompt_tokens,
            "completion_tokens": response.usage.completion_tokens,
            "role_tag": request.role_tag,
            "ts": 0.0 if self.replay else time.time(),
            "user_prompt_head": request.user_prompt[:120],
        }
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            with open(self.audit_path, "a", encoding="utf-8") as f:
                f.write(line + "\n")


def complete(request: ChatRequest, backend: BackendHandle | Gateway) -> ChatResponse:
    """Single completion against a backend handle or gateway."""
    return backend.complete(request)


def complete_json(
    gateway: Gateway | BackendHandle,
    request: ChatRequest,
    validate: Callable[[dict], str | None],
    repair_attempts: int = 2,
) -> tuple[dict, TokenUsage]:
    """Completion that must parse as JSON and pass ``validate``.

    ``validate`` returns None when the document is acceptable, else a
    human-readable problem. On failure the backend is re-prompted with the
    problem appended; after ``repair_attempts`` repairs the call raises
    protocol-error. Returns the parsed document and the summed usage.
    """
    total = TokenUsage(0, 0)
    req = request
    problem = ""
    for _ in range(repair_attempts + 1):
        response = gateway.complete(req)
        total = TokenUsage(
            total.prompt_tokens + response.usage.prompt_tokens,
            total.completion_tokens + response.usage.completion_tokens,
        )
        try:
            doc = _extract_json(response.text)
        except ValueError as exc:
            problem = f"reply was not valid JSON: {exc}"
        else:
            problem = validate(doc) or ""
            if not problem:
                return doc, total
        req = ChatRequest(
            role_tag=request.role_tag,
            system_prompt=request.system_prompt,
            user_prompt=(
                request.user_prompt
                + f"\n\nYour previous reply was rejected: {problem}. "
                "Reply again with only the corrected JSON document."
            ),
            temperature=request.temperature,
            max_output_tokens=request.max_output_tokens,
            response_schema=request.response_schema,
        )
    raise ProtocolError(f"backend reply invalid after {repair_attempts} repairs: {problem}")


def _extract_json(text: str) -> dict:
    """Parse a JSON object from a reply, tolerating markdown fences."""
    stripped = text.strip()
    if stripped.startswith("```"):
        stripped = stripped.strip("`")
        if stripped.startswith("json"):
            stripped = stripped[4:]
        stripped = stripped.strip()
    try:
        doc = json.loads(stripped)
    except json.JSONDecodeError:
        start = stripped.find("{")
        end = stripped.rfind("}")
        if start < 0 or end <= start:
            raise ValueError("no JSON object found")
        doc = json.loads(stripped[start : end + 1])
    if not isinstance(doc, dict):
        raise ValueError("top-level JSON value is not an object")
    return doc
