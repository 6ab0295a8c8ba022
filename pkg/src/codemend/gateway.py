"""Uniform completion interface over interchangeable model backends.

Three backend families share one contract: live HTTP chat endpoints,
scripted response sequences for deterministic tests, and record/replay
traces. Scripted elapsed times come from the script itself so
time-dependent routing stays testable.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Protocol


class GatewayError(Exception):
    """Base class for gateway failures."""


class OverlongPrompt(GatewayError):
    """Total prompt content exceeds the model's input limit."""


class MemoryOverCapacity(GatewayError):
    """More dialogue pairs supplied than the configured memory capacity."""


class BackendUnavailable(GatewayError):
    """Live backend failed after the configured retries."""


class ScriptExhausted(GatewayError):
    """A scripted sequence ran out; this signals a test-harness bug."""


class ReplayMismatch(GatewayError):
    """Replay saw a request that does not match the recorded trace."""


class ChatRole(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class AgentRole(str, Enum):
    CORRECTION = "correction"
    INTERPRETATION = "interpretation"
    ANNOTATION = "annotation"
    TEST_GENERATION = "test_generation"
    TEST_JUDGMENT = "test_judgment"


@dataclass(frozen=True)
class ChatTurn:
    role: ChatRole
    content: str

    def __post_init__(self) -> None:
        if self.role in (ChatRole.USER, ChatRole.ASSISTANT) and not self.content:
            raise GatewayError(f"{self.role.value} turn must have content")


@dataclass(frozen=True)
class PromptBundle:
    agent_role: AgentRole
    turns: tuple[ChatTurn, ...]
    model: str

    def total_chars(self) -> int:
        return sum(len(t.content) for t in self.turns)


@dataclass(frozen=True)
class Completion:
    text: str
    elapsed_s: float


_PROMPT_CACHE: dict[AgentRole, str] = {}


def system_prompt(role: AgentRole) -> str:
    """Load the role's system prompt from the packaged prompts directory."""
    if role not in _PROMPT_CACHE:
        ref = resources.files("codemend").joinpath(f"prompts/{role.value}.txt")
        _PROMPT_CACHE[role] = ref.read_text(encoding="utf-8").strip()
    return _PROMPT_CACHE[role]


def build_prompt(
    role: AgentRole,
    memory: list[tuple[str, str]],
    task_payload: str,
    model: str,
    memory_capacity: int = 3,
    input_limit: int | None = None,
) -> PromptBundle:
    """Assemble system prompt + memory pairs (oldest first) + the request.

    Raises MemoryOverCapacity when more pairs are supplied than fit, and
    OverlongPrompt when total content exceeds the model's input limit.
    """
    if len(memory) > memory_capacity:
        raise MemoryOverCapacity(
            f"{len(memory)} pairs supplied, capacity is {memory_capacity}"
        )
    turns = [ChatTurn(ChatRole.SYSTEM, system_prompt(role))]
    for user_text, assistant_text in memory:
        turns.append(ChatTurn(ChatRole.USER, user_text))
        turns.append(ChatTurn(ChatRole.ASSISTANT, assistant_text))
    turns.append(ChatTurn(ChatRole.USER, task_payload))
    bundle = PromptBundle(agent_role=role, turns=tuple(turns), model=model)
    if input_limit is not None and bundle.total_chars() > input_limit:
        raise OverlongPrompt(
            f"prompt is {bundle.total_chars()} chars, limit is {input_limit}"
        )
    return bundle


def request_digest(bundle: PromptBundle) -> str:
    """Stable digest of a bundle for trace matching."""
    canonical = json.dumps(
        {
            "model": bundle.model,
            "agent_role": bundle.agent_role.value,
            "turns": [[t.role.value, t.content] for t in bundle.turns],
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class CompletionBackend(Protocol):
    def complete(self, bundle: PromptBundle, conversation_id: str) -> Completion: ...


def complete(
    bundle: PromptBundle, backend: CompletionBackend, conversation_id: str = "default"
) -> Completion:
    """Run one completion through whichever backend is configured."""
    return backend.complete(bundle, conversation_id)


@dataclass(frozen=True)
class ScriptedResponse:
    text: str
    elapsed_s: float = 0.0


class ScriptedBackend:
    """Deterministic stand-in model serving pre-authored responses.

    Scripts are keyed by (model, agent_role); either key may be the
    wildcard "*". Each conversation walks its own cursor through the
    matching sequence, so interleaved sessions stay independent.
    """

    def __init__(self):
        self._scripts: dict[tuple[str, str, str], list[ScriptedResponse]] = {}
        self._cursors: dict[tuple[str, tuple[str, str, str]], int] = {}
        self._lock = threading.Lock()

    def add_script(
        self,
        role: AgentRole | str,
        responses: list[ScriptedResponse | tuple[str, float] | str],
        model: str = "*",
        conversation_id: str = "*",
    ) -> None:
        role_key = role.value if isinstance(role, AgentRole) else role
        normalized: list[ScriptedResponse] = []
        for item in responses:
            if isinstance(item, ScriptedResponse):
                normalized.append(item)
            elif isinstance(item, str):
                normalized.append(ScriptedResponse(item))
            else:
                normalized.append(ScriptedResponse(*item))
        self._scripts[(conversation_id, model, role_key)] = normalized

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        """Load scripts from a JSON file (see README for the schema)."""
        backend = cls()
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        for script in data["scripts"]:
            backend.add_script(
                role=script["role"],
                responses=[
                    ScriptedResponse(r["text"], float(r.get("elapsed_s", 0.0)))
                    for r in script["responses"]
                ],
                model=script.get("model", "*"),
                conversation_id=script.get("conversation", "*"),
            )
        return backend

    def _resolve(self, conversation_id: str, model: str, role: str) -> tuple[str, str, str]:
        for key in (
            (conversation_id, model, role),
            (conversation_id, "*", role),
            ("*", model, role),
            ("*", "*", role),
        ):
            if key in self._scripts:
                return key
        raise ScriptExhausted(
            f"no script for role={role} model={model} conversation={conversation_id}"
        )

    def complete(self, bundle: PromptBundle, conversation_id: str) -> Completion:
        with self._lock:
            key = self._resolve(conversation_id, bundle.model, bundle.agent_role.value)
            cursor_key = (conversation_id, key)
            index = self._cursors.get(cursor_key, 0)
            sequence = self._scripts[key]
            if index >= len(sequence):
                raise ScriptExhausted(
                    f"script for {key} exhausted after {len(sequence)} responses "
                    f"(conversation {conversation_id})"
                )
            self._cursors[cursor_key] = index + 1
            scripted = sequence[index]
            return Completion(text=scripted.text, elapsed_s=scripted.elapsed_s)


@dataclass
class HttpBackendConfig:
    endpoints: dict[str, str]
    api_keys: dict[str, str] = field(default_factory=dict)
    temperature: float = 0.0
    timeout_s: float = 60.0
    retries: int = 2
    backoff_s: float = 0.5


class HttpBackend:
    """POST {model, messages} to a chat endpoint, read {content} back.

    Vendor adapters are expected to normalize to this shape server-side;
    retries with linear backoff, then BackendUnavailable.
    """

    def __init__(self, config: HttpBackendConfig):
        self.config = config

    def complete(self, bundle: PromptBundle, conversation_id: str) -> Completion:
        endpoint = self.config.endpoints.get(bundle.model)
        if endpoint is None:
            raise BackendUnavailable(f"no endpoint configured for model {bundle.model}")
        body = json.dumps(
            {
                "model": bundle.model,
                "temperature": self.config.temperature,
                "messages": [
                    {"role": t.role.value, "content": t.content} for t in bundle.turns
                ],
            }
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        api_key = self.config.api_keys.get(bundle.model)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error: Exception | None = None
        for attempt in range(self.config.retries + 1):
            if attempt:
                time.sleep(self.config.backoff_s * attempt)
            start = time.perf_counter()
            try:
                req = urllib.request.Request(endpoint, data=body, headers=headers)
                with urllib.request.urlopen(req, timeout=self.config.timeout_s) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
                elapsed = time.perf_counter() - start
                return Completion(text=payload["content"], elapsed_s=elapsed)
            except (urllib.error.URLError, OSError, KeyError, json.JSONDecodeError) as exc:
                last_error = exc
        raise BackendUnavailable(
            f"model {bundle.model} unreachable after {self.config.retries + 1} attempts: {last_error}"
        )


class RecordingBackend:
    """Wrap a backend and append each completion to a JSONL trace file."""

    def __init__(self, inner: CompletionBackend, trace_path: str | Path):
        self.inner = inner
        self.trace_path = Path(trace_path)
        self._lock = threading.Lock()

    def complete(self, bundle: PromptBundle, conversation_id: str) -> Completion:
        result = self.inner.complete(bundle, conversation_id)
        entry = {
            "conversation_id": conversation_id,
            "model": bundle.model,
            "agent_role": bundle.agent_role.value,
            "request_digest": request_digest(bundle),
            "response": result.text,
            "elapsed_s": result.elapsed_s,
        }
        with self._lock:
            with self.trace_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True, ensure_ascii=False) + "\n")
        return result


class ReplayBackend:
    """Serve a recorded trace back, verifying each request digest.

    Entries replay in per-conversation order; a digest, model or role
    mismatch means the engine diverged from the recorded run.
    """

    def __init__(self, trace_path: str | Path):
        self._queues: dict[str, list[dict]] = {}
        self._lock = threading.Lock()
        for line_no, line in enumerate(
            Path(trace_path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise GatewayError(f"trace line {line_no} is not valid JSON: {exc}") from exc
            self._queues.setdefault(entry["conversation_id"], []).append(entry)

    def pending(self) -> int:
        with self._lock:
            return sum(len(q) for q in self._queues.values())

    def complete(self, bundle: PromptBundle, conversation_id: str) -> Completion:
        with self._lock:
            queue = self._queues.get(conversation_id)
            if not queue:
                raise ReplayMismatch(f"trace has no entries left for {conversation_id}")
            entry = queue.pop(0)
        if entry["model"] != bundle.model or entry["agent_role"] != bundle.agent_role.value:
            raise ReplayMismatch(
                f"recorded ({entry['model']}, {entry['agent_role']}) vs "
                f"requested ({bundle.model}, {bundle.agent_role.value})"
            )
        digest = request_digest(bundle)
        if entry["request_digest"] != digest:
            raise ReplayMismatch(
                f"request digest {digest[:12]} diverges from recorded "
                f"{entry['request_digest'][:12]} in {conversation_id}"
            )
        return Completion(text=entry["response"], elapsed_s=float(entry["elapsed_s"]))
