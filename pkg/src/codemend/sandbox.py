"""Sandboxed execution of candidate code against tiered assert lists.

The host side: builds the pipe-protocol request, drives an executor
(subprocess shim for isolation, in-process stand-in for deterministic
tests) and shapes the reply into structured verdicts. The wire format is
line-delimited JSON, documented bit-exactly in the README.
"""

from __future__ import annotations

import json
import subprocess
import sys
import time
import traceback
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

VERDICT_VOCABULARY = ("pass", "assertion_failed", "runtime_error", "timeout")


class SandboxError(Exception):
    """Base class for sandbox failures."""


class SandboxSpawnFailure(SandboxError):
    """The interpreter process could not be started (environment problem)."""


class ShimProtocolError(SandboxError):
    """The shim reply violated the pipe protocol."""


class NoFailure(SandboxError):
    """Error-message extraction on an all-pass outcome."""


class Tier(str, Enum):
    BASIC = "basic"
    CHALLENGE = "challenge"


class Verdict(str, Enum):
    PASS = "pass"
    ASSERTION_FAILED = "assertion_failed"
    RUNTIME_ERROR = "runtime_error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class

    expression: str
    tier: Tier

    def __post_init__(self) -> None:
        if not self.expression.lstrip().startswith("assert"):
            raise SandboxError(f"test expression must be an assert: {self.expression!r}")


@dataclass(frozen=True)
class CaseResult:
    index: int
    tier: Tier
    verdict: Verdict
    message: str = ""


@dataclass(frozen=True)
class SandboxPolicy:
    per_case_timeout: float = 10.0
    total_timeout: float = 60.0
    output_byte_cap: int = 4096
    restrict: bool = True

    def __post_init__(self) -> None:
        if self.per_case_timeout <= 0 or self.total_timeout <= 0 or self.output_byte_cap <= 0:
            raise SandboxError("sandbox limits must be positive")
        if self.per_case_timeout > self.total_timeout:
            raise SandboxError("per_case_timeout must not exceed total_timeout")


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # not a pytest class

    per_case: tuple[CaseResult, ...]
    basic_all_passed: bool
    challenge_all_passed: bool
    elapsed: float

    @property
    def all_passed(self) -> bool:
        return self.basic_all_passed and self.challenge_all_passed


class SandboxExecutor(Protocol):
    """Runs one protocol request, returns raw result dicts per case."""

    def run(self, request: dict, policy: SandboxPolicy) -> list[dict]: ...


def build_request(code: str, cases: list[TestCase], policy: SandboxPolicy) -> dict:
    return {
        "code": code,
        "cases": [{"expr": c.expression, "tier": c.tier.value} for c in cases],
        "timeout_s": policy.per_case_timeout,
        "restrict": policy.restrict,
    }


def evaluate(
    code: str,
    cases: list[TestCase],
    policy: SandboxPolicy,
    executor: SandboxExecutor,
) -> TestOutcome:
    """Run every case against the code in a fresh namespace per case."""
    if not code:
        raise SandboxError("code must be non-empty")
    if not cases:
        raise SandboxError("at least one test case is required")

    request = build_request(code, cases, policy)
    start = time.perf_counter()
    raw_results = executor.run(request, policy)
    elapsed = time.perf_counter() - start

    per_case = _shape_results(raw_results, cases, policy)
    basic = [r for r in per_case if r.tier is Tier.BASIC]
    challenge = [r for r in per_case if r.tier is Tier.CHALLENGE]
    return TestOutcome(
        per_case=tuple(per_case),
        basic_all_passed=all(r.verdict is Verdict.PASS for r in basic),
        challenge_all_passed=all(r.verdict is Verdict.PASS for r in challenge),
        elapsed=elapsed,
    )


def _shape_results(
    raw_results: list[dict], cases: list[TestCase], policy: SandboxPolicy
) -> list[CaseResult]:
    if len(raw_results) != len(cases):
        raise ShimProtocolError(
            f"shim returned {len(raw_results)} results for {len(cases)} cases"
        )
    shaped: list[CaseResult] = []
    for i, (raw, case) in enumerate(zip(raw_results, cases)):
        try:
            index = int(raw["index"])
            verdict = Verdict(raw["verdict"])
            message = str(raw.get("message", ""))
        except (KeyError, ValueError, TypeError) as exc:
            raise ShimProtocolError(f"malformed result at position {i}: {raw!r}") from exc
        if index != i:
            raise ShimProtocolError(f"result index {index} out of order at position {i}")
        shaped.append(
            CaseResult(
                index=i,
                tier=case.tier,
                verdict=verdict,
                message=message[: policy.output_byte_cap],
            )
        )
    return shaped


def extract_error_message(outcome: TestOutcome, cases: list[TestCase]) -> str:
    """Feedback block for the first failing case: its assert plus message."""
    for result in outcome.per_case:
        if result.verdict is not Verdict.PASS:
            case = cases[result.index]
            block = [
                f"Failing test: {case.expression}",
                f"Verdict: {result.verdict.value}",
            ]
            if result.message:
                block.append(f"Error: {result.message}")
            return "\n".join(block)
    raise NoFailure("every case passed; nothing to extract")


class SubprocessExecutor:
    """Spawn the sandbox shim, write one request line, read one reply line.

    The shim command comes from configuration (see resolve_shim_command);
    the host enforces the total timeout by killing the process, in which
    case every case reports timeout (the single-line protocol carries no
    partial results).
    """

    def __init__(self, shim_cmd: list[str] | None = None):
        self.shim_cmd = shim_cmd

    def run(self, request: dict, policy: SandboxPolicy) -> list[dict]:
        cmd = self.shim_cmd or resolve_shim_command()
        try:
            proc = subprocess.Popen(
                cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
        except OSError as exc:
            raise SandboxSpawnFailure(f"cannot start shim {cmd}: {exc}") from exc
        try:
            stdout, stderr = proc.communicate(
                json.dumps(request) + "\n", timeout=policy.total_timeout
            )
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            return [
                {
                    "index": i,
                    "verdict": "timeout",
                    "message": f"total sandbox budget of {policy.total_timeout}s exceeded",
                }
                for i in range(len(request["cases"]))
            ]

        line = stdout.strip().splitlines()
        if not line:
            raise ShimProtocolError(
                f"shim produced no reply (exit {proc.returncode}, stderr: {stderr.strip()[:200]})"
            )
        try:
            reply = json.loads(line[-1])
        except json.JSONDecodeError as exc:
            raise ShimProtocolError(f"shim reply is not JSON: {line[-1][:200]}") from exc
        if "error" in reply:
            raise ShimProtocolError(f"shim reported: {reply['error']}")
        if "results" not in reply or not isinstance(reply["results"], list):
            raise ShimProtocolError(f"shim reply missing results list: {reply}")
        return reply["results"]


def resolve_shim_command() -> list[str]:
    """Locate the shim: CODEMEND_SHIM env var, else the installed module."""
    import importlib.util
    import os
    import shlex

    env_cmd = os.environ.get("CODEMEND_SHIM")
    if env_cmd:
        return shlex.split(env_cmd)
    if importlib.util.find_spec("codemend_shim") is not None:
        return [sys.executable, "-m", "codemend_shim"]
    raise SandboxSpawnFailure(
        "no sandbox shim found: set CODEMEND_SHIM or install the codemend-shim package"
    )


class InProcessExecutor:
    """Protocol-compatible stand-in that runs cases in this interpreter.

    No isolation and no timeout enforcement; intended for deterministic
    tests and fast scripted benches only. Follows the same semantics as
    the shim: fresh namespace per case, AssertionError -> assertion_failed,
    anything else -> runtime_error, code-level compile errors mark every
    case with the same message.
    """

    def run(self, request: dict, policy: SandboxPolicy) -> list[dict]:
        code = request["code"]
        cases = request["cases"]
        try:
            compiled = compile(code, "<candidate>", "exec")
        except (SyntaxError, ValueError) as exc:
            message = traceback.format_exception_only(type(exc), exc)[-1].strip()
            return [
                {"index": i, "verdict": "runtime_error", "message": message}
                for i in range(len(cases))
            ]

        results = []
        for i, case in enumerate(cases):
            namespace: dict = {}
            try:
                exec(compiled, namespace)
                exec(compile(case["expr"], "<case>", "exec"), namespace)
            except AssertionError as exc:
                detail = str(exc)
                results.append(
                    {
                        "index": i,
                        "verdict": "assertion_failed",
                        "message": f"AssertionError{': ' + detail if detail else ''}",
                    }
                )
            except BaseException as exc:
                message = traceback.format_exception_only(type(exc), exc)[-1].strip()
                results.append({"index": i, "verdict": "runtime_error", "message": message})
            else:
                results.append({"index": i, "verdict": "pass", "message": ""})
        return results


@dataclass
class ScriptedExecutor:
    """Canned verdicts for orchestration tests; no code is executed.

    ``decide`` maps the candidate code to a (basic_passed, challenge_passed)
    pair; individual case verdicts are synthesized from it.
    """

    decide: "CodeJudgment"
    fail_message: str = "AssertionError"

    def run(self, request: dict, policy: SandboxPolicy) -> list[dict]:
        basic_ok, challenge_ok = self.decide(request["code"])
        results = []
        for i, case in enumerate(request["cases"]):
            ok = basic_ok if case["tier"] == "basic" else challenge_ok
            results.append(
                {
                    "index": i,
                    "verdict": "pass" if ok else "assertion_failed",
                    "message": "" if ok else self.fail_message,
                }
            )
        return results


class CodeJudgment(Protocol):
    def __call__(self, code: str) -> tuple[bool, bool]: ...
