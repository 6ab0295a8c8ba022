"""The three verdict sources the test agent can use.

User-supplied asserts run fully in the sandbox; model-generated tests and
direct model judgment are thin gateway calls shaped into the same outcome
structure so the orchestrator never cares which source produced it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from .corpus import TaskRecord
from .gateway import AgentRole, CompletionBackend, build_prompt, complete
from .sandbox import (
    CaseResult,
    SandboxExecutor,
    SandboxPolicy,
    TestCase,
    TestOutcome,
    Tier,
    Verdict,
    evaluate,
)


@dataclass(frozen=True)
class VerdictBundle:
    outcome: TestOutcome
    cases: list[TestCase]


class VerdictSource(Protocol):
    def verdict(self, task: TaskRecord, code: str, conversation_id: str) -> VerdictBundle: ...


@dataclass
class UserTestVerdicts:
    """Run the task's own basic and challenge asserts."""

    executor: SandboxExecutor
    policy: SandboxPolicy

    def verdict(self, task: TaskRecord, code: str, conversation_id: str) -> VerdictBundle:
        cases = task.basic_cases() + task.challenge_cases()
        return VerdictBundle(evaluate(code, cases, self.policy, self.executor), cases)


@dataclass
class GeneratedTestVerdicts:
    """Ask a model for asserts, then run them as basic-tier cases."""

    backend: CompletionBackend
    executor: SandboxExecutor
    policy: SandboxPolicy
    model: str

    def verdict(self, task: TaskRecord, code: str, conversation_id: str) -> VerdictBundle:
        bundle = build_prompt(
            AgentRole.TEST_GENERATION,
            memory=[],
            task_payload=f"Task: {task.description}\n\nFunction under test:\n{code}",
            model=self.model,
        )
        result = complete(bundle, self.backend, conversation_id)
        cases = [
            TestCase(line.strip(), Tier.BASIC)
            for line in result.text.splitlines()
            if line.strip().startswith("assert")
        ]
        if not cases:
            # Degenerate generation: treat as a single failed round.
            outcome = TestOutcome(
                per_case=(CaseResult(0, Tier.BASIC, Verdict.RUNTIME_ERROR, "no tests generated"),),
                basic_all_passed=False,
                challenge_all_passed=True,
                elapsed=result.elapsed_s,
            )
            return VerdictBundle(outcome, [TestCase("assert False", Tier.BASIC)])
        return VerdictBundle(evaluate(code, cases, self.policy, self.executor), cases)


@dataclass
class JudgmentVerdicts:
    """Have a model judge correctness directly (PASS/FAIL first line)."""

    backend: CompletionBackend
    model: str

    def verdict(self, task: TaskRecord, code: str, conversation_id: str) -> VerdictBundle:
        bundle = build_prompt(
            AgentRole.TEST_JUDGMENT,
            memory=[],
            task_payload=f"Task: {task.description}\n\nCandidate:\n{code}",
            model=self.model,
        )
        result = complete(bundle, self.backend, conversation_id)
        first_line = result.text.strip().splitlines()[0].strip().upper() if result.text.strip() else ""
        passed = first_line.startswith("PASS")
        synthetic = TestCase("assert model_judgment == 'PASS'", Tier.BASIC)
        per_case = CaseResult(
            index=0,
            tier=Tier.BASIC,
            verdict=Verdict.PASS if passed else Verdict.ASSERTION_FAILED,
            message="" if passed else result.text.strip()[:500],
        )
        outcome = TestOutcome(
            per_case=(per_case,),
            basic_all_passed=passed,
            challenge_all_passed=True,
            elapsed=result.elapsed_s,
        )
        return VerdictBundle(outcome, [synthetic])
