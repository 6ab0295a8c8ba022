"""Session state machine: correct, test, interpret, reselect, retry.

One session repairs one task. The main agent drives worker agents over
the message platform, feeds failures back through memory, asks the
routing policy for the next model, and gives up when the loop budget is
spent. With scripted backends the whole run is deterministic: event
elapsed times come from the gateway (sandbox wall-clock stays inside the
test outcome), and message timestamps are logical ticks.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .acl import AMS_NAME, AgentId, AgentPlatform, Performative
from .config import AppConfig
from .corpus import TaskRecord
from .gateway import (
    AgentRole,
    BackendUnavailable,
    CompletionBackend,
    build_prompt,
    complete,
)
from .policy import RewardLedger, initial_model_by_length, select_model
from .sandbox import (
    SandboxExecutor,
    SandboxSpawnFailure,
    TestOutcome,
    extract_error_message,
)
from .verdicts import UserTestVerdicts, VerdictSource

MAIN_AGENT = "main_agent"
CORRECT_AGENT = "correct_agent"
TEST_AGENT = "test_agent"
INTERPRET_AGENT = "interpret_agent"
ANNOTATE_AGENT = "annotate_agent"

WORKER_AGENTS = (CORRECT_AGENT, TEST_AGENT, INTERPRET_AGENT, ANNOTATE_AGENT)

_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_+-]*)\n(.*?)```", re.DOTALL)


class SessionState(str, Enum):
    INIT = "init"
    CORRECTING = "correcting"
    TESTING = "testing"
    INTERPRETING = "interpreting"
    SELECTING = "selecting"
    ANNOTATING = "annotating"
    DONE_SUCCESS = "done_success"
    DONE_FAILURE = "done_failure"


ALLOWED_TRANSITIONS: frozenset[tuple[SessionState, SessionState]] = frozenset(
    {
        (SessionState.INIT, SessionState.CORRECTING),
        (SessionState.CORRECTING, SessionState.TESTING),
        (SessionState.CORRECTING, SessionState.DONE_FAILURE),
        (SessionState.TESTING, SessionState.ANNOTATING),
        (SessionState.TESTING, SessionState.INTERPRETING),
        (SessionState.TESTING, SessionState.DONE_FAILURE),
        (SessionState.INTERPRETING, SessionState.SELECTING),
        (SessionState.INTERPRETING, SessionState.DONE_FAILURE),
        (SessionState.SELECTING, SessionState.CORRECTING),
        (SessionState.ANNOTATING, SessionState.DONE_SUCCESS),
    }
)


def payload_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def strip_code_fences(text: str) -> str:
    """Pull code out of a fenced block when the model wrapped its answer."""
    match = _FENCE_RE.search(text)
    if match:
        return match.group(1).strip("\n")
    return text


@dataclass(frozen=True)
class SessionEvent:
    state_from: SessionState
    state_to: SessionState
    agent: str
    model: str
    elapsed_s: float
    payload_digest: str
    note: str = ""

    def to_record(self) -> dict:
        record = {
            "state_from": self.state_from.value,
            "state_to": self.state_to.value,
            "agent": self.agent,
            "model": self.model,
            "elapsed_s": self.elapsed_s,
            "payload_digest": self.payload_digest,
        }
        if self.note:
            record["note"] = self.note
        return record


@dataclass
class CorrectionSession:
    """One task's loop state."""

    task: TaskRecord
    config: AppConfig
    state: SessionState = SessionState.INIT
    loop_count: int = 0
    memory: deque[tuple[str, str]] = field(default_factory=deque)
    current_model: str = ""
    history: list[SessionEvent] = field(default_factory=list)
    cumulative_elapsed: float = 0.0
    models_used: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.memory = deque(self.memory, maxlen=self.config.session.memory_capacity)

    def append_memory(self, pair: tuple[str, str]) -> None:
        """Append one dialogue pair, evicting the oldest beyond capacity."""
        user_text, assistant_text = pair
        if not user_text or not assistant_text:
            raise ValueError("memory pair must have non-empty sides")
        self.memory.append(pair)

    def transition(
        self,
        to: SessionState,
        agent: str,
        model: str,
        elapsed_s: float,
        payload: str,
        note: str = "",
    ) -> None:
        if (self.state, to) not in ALLOWED_TRANSITIONS:
            raise RuntimeError(f"illegal transition {self.state.value} -> {to.value}")
        self.history.append(
            SessionEvent(
                state_from=self.state,
                state_to=to,
                agent=agent,
                model=model,
                elapsed_s=elapsed_s,
                payload_digest=payload_digest(payload),
                note=note,
            )
        )
        self.state = to

    def export_history(self) -> str:
        return "\n".join(json.dumps(e.to_record(), sort_keys=True) for e in self.history)


@dataclass(frozen=True)
class SessionResult:
    task_id: str
    status: SessionState
    loop_count: int
    final_code: str | None
    corrected_code: str | None
    models_used: tuple[str, ...]
    cumulative_elapsed: float
    history: tuple[SessionEvent, ...]
    last_outcome: TestOutcome | None

    @property
    def solved(self) -> bool:
        return self.status is SessionState.DONE_SUCCESS

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "status": self.status.value,
            "loops": self.loop_count,
            "solved": self.solved,
            "final_code": self.final_code,
            "models_used": list(self.models_used),
            "elapsed_s": self.cumulative_elapsed,
        }


def _prepare_platform(platform: AgentPlatform | None) -> AgentPlatform:
    if platform is None:
        platform = AgentPlatform.bootstrap()
    have = set(platform.table.entries)
    for name in (MAIN_AGENT, *WORKER_AGENTS):
        if name not in have:
            platform.register(AgentId(name))
    return platform


def annotate(
    code: str,
    model: str,
    backend: CompletionBackend,
    config: AppConfig,
    conversation_id: str,
) -> tuple[str, float, str]:
    """Add explanatory comments; degrade to the plain code on failure."""
    try:
        bundle = build_prompt(
            AgentRole.ANNOTATION,
            memory=[],
            task_payload=code,
            model=model,
            memory_capacity=config.session.memory_capacity,
            input_limit=config.input_limit(model),
        )
        result = complete(bundle, backend, conversation_id)
        return result.text, result.elapsed_s, ""
    except BackendUnavailable as exc:
        return code, 0.0, f"annotation degraded: {exc}"


def run_session(
    task: TaskRecord,
    config: AppConfig,
    backend: CompletionBackend,
    executor: SandboxExecutor,
    platform: AgentPlatform | None = None,
    ledger: RewardLedger | None = None,
    verdict_source: VerdictSource | None = None,
) -> SessionResult:
    """Drive one task through the correction loop to success or failure.

    The test agent's verdicts default to the task's own assert lists run
    in the sandbox; model-generated tests or direct model judgment plug
    in through ``verdict_source`` behind the same interface.
    """
    platform = _prepare_platform(platform)
    ledger = ledger if ledger is not None else RewardLedger()
    for model_id in config.profiles:
        ledger.register(model_id)
    source = verdict_source or UserTestVerdicts(executor, config.sandbox)

    session = CorrectionSession(task=task, config=config)
    conversation = task.task_id
    max_loops = config.session.max_loops

    def hop(sender: str, receiver: str, performative: Performative, payload: str) -> None:
        platform.send(sender, receiver, performative, conversation, payload_digest(payload))

    model = initial_model_by_length(
        len(task.error_code), config.thresholds, config.ranking
    )
    session.current_model = model
    payload = (
        f"Task: {task.description}\n\nBroken code:\n{task.error_code}\n\n"
        "Return the corrected code."
    )
    session.transition(SessionState.CORRECTING, MAIN_AGENT, model, 0.0, payload)

    candidate = ""
    outcome: TestOutcome | None = None

    while True:
        # Correction attempt on the current model.
        try:
            bundle = build_prompt(
                AgentRole.CORRECTION,
                memory=list(session.memory),
                task_payload=payload,
                model=model,
                memory_capacity=config.session.memory_capacity,
                input_limit=config.input_limit(model),
            )
            hop(MAIN_AGENT, CORRECT_AGENT, Performative.REQUEST, payload)
            completion = complete(bundle, backend, conversation)
            hop(CORRECT_AGENT, MAIN_AGENT, Performative.INFORM, completion.text)
        except BackendUnavailable as exc:
            session.transition(
                SessionState.DONE_FAILURE, CORRECT_AGENT, model, 0.0, str(exc),
                note=f"backend unavailable: {exc}",
            )
            break
        candidate = strip_code_fences(completion.text)
        session.loop_count += 1
        session.models_used.append(model)
        session.cumulative_elapsed += completion.elapsed_s
        ledger.add_elapsed(model, completion.elapsed_s)
        session.transition(
            SessionState.TESTING, CORRECT_AGENT, model, completion.elapsed_s, candidate
        )

        # Test round in the sandbox.
        try:
            hop(MAIN_AGENT, TEST_AGENT, Performative.REQUEST, candidate)
            verdicts = source.verdict(task, candidate, conversation)
            outcome = verdicts.outcome
            verdict_note = (
                f"basic={'pass' if outcome.basic_all_passed else 'fail'},"
                f"challenge={'pass' if outcome.challenge_all_passed else 'fail'}"
            )
            hop(
                TEST_AGENT,
                MAIN_AGENT,
                Performative.INFORM if outcome.all_passed else Performative.FAILURE,
                verdict_note,
            )
        except SandboxSpawnFailure as exc:
            session.transition(
                SessionState.DONE_FAILURE, TEST_AGENT, model, 0.0, str(exc),
                note=f"sandbox spawn failure: {exc}",
            )
            break
        ledger.apply_test_reward(model, outcome.basic_all_passed, outcome.challenge_all_passed)

        if outcome.all_passed:
            session.transition(SessionState.ANNOTATING, TEST_AGENT, model, 0.0, verdict_note)
            hop(MAIN_AGENT, ANNOTATE_AGENT, Performative.REQUEST, candidate)
            annotated, elapsed, warning = annotate(candidate, model, backend, config, conversation)
            if warning:
                hop(ANNOTATE_AGENT, MAIN_AGENT, Performative.FAILURE, warning)
            else:
                hop(ANNOTATE_AGENT, MAIN_AGENT, Performative.INFORM, annotated)
            session.cumulative_elapsed += elapsed
            if not warning:
                ledger.add_elapsed(model, elapsed)
            session.transition(
                SessionState.DONE_SUCCESS, ANNOTATE_AGENT, model, elapsed, annotated,
                note=warning,
            )
            ledger.record_loops(model, session.loop_count)
            return _result(session, final_code=annotated, corrected=candidate, outcome=outcome)

        if session.loop_count >= max_loops:
            session.transition(
                SessionState.DONE_FAILURE, TEST_AGENT, model, 0.0, verdict_note,
                note=f"loop budget of {max_loops} exhausted",
            )
            ledger.record_loops(model, session.loop_count)
            break

        # Rubber-duck step: explain the failure, remember it, reselect.
        feedback = extract_error_message(outcome, verdicts.cases)
        session.transition(SessionState.INTERPRETING, TEST_AGENT, model, 0.0, feedback)
        interp_payload = (
            f"Code under review:\n{candidate}\n\nTest feedback:\n{feedback}\n\n"
            "Explain what the code does and where it goes wrong."
        )
        try:
            bundle = build_prompt(
                AgentRole.INTERPRETATION,
                memory=list(session.memory),
                task_payload=interp_payload,
                model=model,
                memory_capacity=config.session.memory_capacity,
                input_limit=config.input_limit(model),
            )
            hop(MAIN_AGENT, INTERPRET_AGENT, Performative.REQUEST, interp_payload)
            interpretation = complete(bundle, backend, conversation)
            hop(INTERPRET_AGENT, MAIN_AGENT, Performative.INFORM, interpretation.text)
        except BackendUnavailable as exc:
            session.transition(
                SessionState.DONE_FAILURE, INTERPRET_AGENT, model, 0.0, str(exc),
                note=f"backend unavailable: {exc}",
            )
            break
        session.cumulative_elapsed += interpretation.elapsed_s
        ledger.add_elapsed(model, interpretation.elapsed_s)
        session.append_memory(
            (
                f"Attempt {session.loop_count} code:\n{candidate}\n\nTest feedback:\n{feedback}",
                interpretation.text,
            )
        )
        session.transition(
            SessionState.SELECTING, INTERPRET_AGENT, model, interpretation.elapsed_s,
            interpretation.text,
        )

        previous = model
        model = select_model(
            code_length=len(candidate),
            run_time=session.cumulative_elapsed,
            recent=previous,
            profiles=config.profiles,
            weights=config.weights,
            tie_break=config.tie_break,
        )
        session.current_model = model
        payload = (
            f"Task: {task.description}\n\nThe previous attempt failed.\n{feedback}\n\n"
            "Return the corrected code."
        )
        session.transition(
            SessionState.CORRECTING, MAIN_AGENT, model, 0.0, payload,
            note=f"selected {model} (was {previous})",
        )

    return _result(session, final_code=None, corrected=candidate or None, outcome=outcome)


def _result(
    session: CorrectionSession,
    final_code: str | None,
    corrected: str | None,
    outcome: TestOutcome | None,
) -> SessionResult:
    return SessionResult(
        task_id=session.task.task_id,
        status=session.state,
        loop_count=session.loop_count,
        final_code=final_code,
        corrected_code=corrected,
        models_used=tuple(session.models_used),
        cumulative_elapsed=session.cumulative_elapsed,
        history=tuple(session.history),
        last_outcome=outcome,
    )
