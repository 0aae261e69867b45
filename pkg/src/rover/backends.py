"""Model backends: a live chat-completions client and a deterministic
replay backend for tests and offline reproduction."""

import json
import os
from dataclasses import dataclass, field
from typing import List, Optional, Union

from .errors import BackendFailure, ReplayExhausted

API_BASE_ENV = "ROVER_API_BASE"
API_KEY_ENV = "ROVER_API_KEY"


@dataclass
class Usage:
    tokens_in: int = 0
    tokens_out: int = 0


@dataclass
class ToolRequest:
    tool: str
    args: dict
    usage: Usage = field(default_factory=Usage)


@dataclass
class FinalText:
    content: str
    usage: Usage = field(default_factory=Usage)


Reply = Union[ToolRequest, FinalText]


class ModelBackend:
    """One chat turn: messages in, either a tool request or text out."""

    def chat(self, messages: List[dict], tools: Optional[dict] = None) -> Reply:
        raise NotImplementedError


def _estimate_tokens(messages) -> int:
    chars = sum(len(str(m.get("content", ""))) for m in messages)
    return max(1, chars // 4)


class ReplayBackend(ModelBackend):
    """Plays back a scripted list of responses.

    Script: a JSON list of entries, `{"type": "tool", "tool": ..,
    "args": {..}}` or `{"type": "text", "content": ".."}`, optionally
    carrying `tokens_in`/`tokens_out`. Requesting more responses than
    scripted is an error -- a replay that drifts from the recorded run
    must fail loudly, not improvise.
    """

    def __init__(self, script):
        if isinstance(script, str):
            with open(script, encoding="utf-8") as fh:
                script = json.load(fh)
        if not isinstance(script, list):
            raise BackendFailure("replay script must be a JSON list")
        self.entries = script
        self.cursor = 0
        self.calls = 0

    def chat(self, messages, tools=None) -> Reply:
        if self.cursor >= len(self.entries):
            raise ReplayExhausted(
                f"replay script exhausted after {self.cursor} responses"
            )
        entry = self.entries[self.cursor]
        self.cursor += 1
        self.calls += 1
        t_in = entry.get("tokens_in", _estimate_tokens(messages))
        if entry.get("type") == "tool":
            usage = Usage(t_in, entry.get("tokens_out", 16))
            return ToolRequest(entry["tool"], entry.get("args", {}), usage)
        content = entry.get("content", "")
        usage = Usage(t_in, entry.get("tokens_out", max(1, len(content) // 4)))
        return FinalText(content, usage)


class LiveBackend(ModelBackend):
    """Chat-completions client. Base URL and key come from the
    ROVER_API_BASE / ROVER_API_KEY environment variables."""

    MAX_ATTEMPTS = 3

    def __init__(self, model_id: str, temperature: float = 0.2,
                 timeout: int = 120):
        base = os.environ.get(API_BASE_ENV, "").rstrip("/")
        if not base:
            raise BackendFailure(f"{API_BASE_ENV} is not set")
        self.url = base + "/chat/completions"
        self.key = os.environ.get(API_KEY_ENV, "")
        self.model_id = model_id
        self.temperature = temperature
        self.timeout = timeout

    def _tool_schemas(self, tools):
        out = []
        for name, spec in (tools or {}).items():
            props = {
                arg: {"type": "integer" if typ is int else "string"}
                for arg, typ in spec["args"].items()
            }
            out.append({
                "type": "function",
                "function": {
                    "name": name,
                    "description": spec["doc"],
                    "parameters": {
                        "type": "object",
                        "properties": props,
                        "required": list(props),
                    },
                },
            })
        return out

    def chat(self, messages, tools=None) -> Reply:
        import requests

        body = {
            "model": self.model_id,
            "temperature": self.temperature,
            "messages": messages,
        }
        if tools:
            body["tools"] = self._tool_schemas(tools)
        headers = {"Content-Type": "application/json"}
        if self.key:
            headers["Authorization"] = f"Bearer {self.key}"

        last_err = None
        for _ in range(self.MAX_ATTEMPTS):
            try:
                resp = requests.post(
                    self.url, json=body, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_err = exc
                continue
            if resp.status_code >= 500:
                last_err = BackendFailure(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise BackendFailure(
                    f"api error {resp.status_code}: {resp.text[:500]}"
                )
            return self._parse(resp.json())
        raise BackendFailure(f"backend unreachable: {last_err}")

    def _parse(self, data) -> Reply:
        try:
            choice = data["choices"][0]["message"]
        except (KeyError, IndexError, TypeError):
            raise BackendFailure("malformed chat-completions response")
        usage_raw = data.get("usage") or {}
        usage = Usage(
            usage_raw.get("prompt_tokens", 0),
            usage_raw.get("completion_tokens", 0),
        )
        calls = choice.get("tool_calls") or []
        if calls:
            fn = calls[0].get("function", {})
            try:
                args = json.loads(fn.get("arguments") or "{}")
            except json.JSONDecodeError:
                args = {}
            return ToolRequest(fn.get("name", ""), args, usage)
        content = choice.get("content") or ""
        # models sometimes write the tool call as plain JSON text
        stripped = content.strip()
        if stripped.startswith("{") and '"tool"' in stripped:
            try:
                obj = json.loads(stripped)
                if isinstance(obj, dict) and "tool" in obj:
                    return ToolRequest(
                        obj["tool"], obj.get("args", {}), usage
                    )
            except json.JSONDecodeError:
                pass
        return FinalText(content, usage)
