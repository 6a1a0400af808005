"""Uniform chat-backend abstraction: scripted + HTTP backends, prompt
templates, token accounting, and the append-only gateway audit file."""

from .types import ChatRequest, ChatResponse, ScriptRule, ScriptedScenario, TokenUsage
from .tokens import count_tokens
from .templates import render_prompt
from .backends import Gateway, HttpBackend, ScriptedBackend, complete, complete_json

__all__ = [
    "ChatRequest",
    "ChatResponse",
    "TokenUsage",
    "ScriptRule",
    "ScriptedScenario",
    "count_tokens",
    "render_prompt",
    "Gateway",
    "HttpBackend",
    "ScriptedBackend",
    "complete",
    "complete_json",
]
