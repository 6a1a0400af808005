"""Request/response types for the chat gateway and the scripted backend."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import PreconditionError
from .tokens import count_tokens

ROLE_TAGS = (
    "planner",
    "executor",
    "auditor",
    "abstractor",
    "extractor",
    "judge",
    "generator",
)


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise PreconditionError("token counts must be non-negative")

    @property
    def total(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def to_dict(self) -> dict:
        return {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
        }

    @staticmethod
    def from_dict(d: dict) -> "TokenUsage":
        return TokenUsage(int(d["prompt_tokens"]), int(d["completion_tokens"]))


@dataclass(frozen=True)
class ChatRequest:
    role_tag: str
    system_prompt: str
    user_prompt: str
    temperature: float = 0.0
    max_output_tokens: int = 2048
    response_schema: str | None = None

    def __post_init__(self):
        if self.role_tag not in ROLE_TAGS:
            raise PreconditionError(f"unknown role_tag {self.role_tag!r}")
        if not self.system_prompt or not self.user_prompt:
            raise PreconditionError("prompts must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise PreconditionError(f"temperature {self.temperature} outside [0, 2]")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: TokenUsage
    backend_id: str


@dataclass
class ScriptRule:
    """One canned-reply rule: matches on role tag and a prompt pattern.

    ``match`` is a plain substring unless ``regex`` is true. A regex with
    named groups may interpolate captures into the response via ``{name}``.
    """

    response: str
    role_tag: str | None = None
    match: str | None = None
    regex: bool = False
    usage: TokenUsage | None = None

    def applies(self, request: ChatRequest) -> re.Match | bool | None:
        if self.role_tag is not None and self.role_tag != request.role_tag:
            return None
        if self.match is None:
            return True
        haystack = request.system_prompt + "\n" + request.user_prompt
        if self.regex:
            return re.search(self.match, haystack, re.DOTALL)
        return True if self.match in haystack else None

    def render(self, m: re.Match | bool) -> str:
        if isinstance(m, re.Match) and m.groupdict():
            out = self.response
            for name, value in m.groupdict().items():
                out = out.replace("{" + name + "}", value or "")
            return out
        return self.response

    def to_dict(self) -> dict:
        d: dict = {"response": self.response}
        if self.role_tag is not None:
            d["role_tag"] = self.role_tag
        if self.match is not None:
            d["match"] = self.match
        if self.regex:
            d["regex"] = True
        if self.usage is not None:
            d["usage"] = self.usage.to_dict()
        return d

    @staticmethod
    def from_dict(d: dict) -> "ScriptRule":
        return ScriptRule(
            response=d["response"],
            role_tag=d.get("role_tag"),
            match=d.get("match"),
            regex=bool(d.get("regex", False)),
            usage=TokenUsage.from_dict(d["usage"]) if d.get("usage") else None,
        )


@dataclass
class ScriptedScenario:
    """Ordered canned-reply table: first matching rule wins.

    A pure function of the request, so scripted runs are bit-reproducible.
    """

    rules: list[ScriptRule] = field(default_factory=list)
    default: str = ""
    name: str = "scenario"

    def respond(self, request: ChatRequest) -> tuple[str, TokenUsage]:
        for rule in self.rules:
            m = rule.applies(request)
            if m:
                text = rule.render(m)
                usage = rule.usage or TokenUsage(
                    count_tokens(request.system_prompt + request.user_prompt),
                    count_tokens(text),
                )
                return text, usage
        text = self.default
        return text, TokenUsage(
            count_tokens(request.system_prompt + request.user_prompt),
            count_tokens(text),
        )

    def to_dict(self) -> dict:
        return {
            "schema": "scenario_v1",
            "name": self.name,
            "default": self.default,
            "rules": [r.to_dict() for r in self.rules],
        }

    @staticmethod
    def from_dict(d: dict) -> "ScriptedScenario":
        if d.get("schema") != "scenario_v1":
            raise PreconditionError(f"unsupported scenario schema {d.get('schema')!r}")
        return ScriptedScenario(
            rules=[ScriptRule.from_dict(r) for r in d.get("rules", [])],
            default=d.get("default", ""),
            name=d.get("name", "scenario"),
        )

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2), encoding="utf-8")

    @staticmethod
    def load(path: Path) -> "ScriptedScenario":
        return ScriptedScenario.from_dict(json.loads(path.read_text(encoding="utf-8")))
