"""One-shot assert runner behind a line-delimited JSON pipe.

Reads exactly one request line from stdin, evaluates every case against
the submitted code in a fresh namespace, and writes exactly one response
line to stdout. A malformed request produces a protocol-error response,
never a silent exit. Candidate output is swallowed so the reply line
stays the only thing on the pipe.

Request:  {"code": str, "cases": [{"expr": str, "tier": str}, ...],
           "timeout_s": number, "restrict": bool (optional, default true)}
Response: {"results": [{"index": int, "verdict": str, "message": str}, ...]}
      or  {"error": {"type": "protocol_error", "message": str}}

Verdicts: pass | assertion_failed | runtime_error | timeout. The alarm
timer bounds each case on its own, so one hung case does not starve the
rest; the host's total-budget kill remains the backstop.
"""

from __future__ import annotations

import builtins
import io
import json
import signal
import sys
import traceback

MESSAGE_CAP = 65536

VERDICT_PASS = "pass"
VERDICT_ASSERTION_FAILED = "assertion_failed"
VERDICT_RUNTIME_ERROR = "runtime_error"
VERDICT_TIMEOUT = "timeout"

# Top-level modules with network reach, refused under restrict (best-effort,
# not a security boundary).
BLOCKED_MODULES = frozenset(
    {
        "socket", "ssl", "http", "urllib", "ftplib", "smtplib", "poplib",
        "imaplib", "telnetlib", "xmlrpc", "requests", "asyncio",
    }
)


class _CaseTimeout(Exception):
    pass


class ProtocolError(Exception):
    pass


class _ImportGate:
    def find_spec(self, fullname, path=None, target=None):
        if fullname.split(".", 1)[0] in BLOCKED_MODULES:
            raise ImportError(f"import of {fullname!r} is disabled in the sandbox")
        return None


def _guarded_open(original_open):
    def guarded(file, mode="r", *args, **kwargs):
        if any(flag in mode for flag in ("w", "a", "x", "+")):
            raise PermissionError("file writes are disabled in the sandbox")
        return original_open(file, mode, *args, **kwargs)

    return guarded


def apply_restrictions() -> None:
    """Best-effort network/write lockdown for the candidate code."""
    for name in list(sys.modules):
        if name.split(".", 1)[0] in BLOCKED_MODULES:
            del sys.modules[name]
    sys.meta_path.insert(0, _ImportGate())
    builtins.open = _guarded_open(builtins.open)


def _exception_message(exc: BaseException) -> str:
    text = traceback.format_exception_only(type(exc), exc)[-1].strip()
    return text[:MESSAGE_CAP]


def parse_request(line: str) -> dict:
    """Validate the request shape; raise ProtocolError on any violation."""
    if not line.strip():
        raise ProtocolError("empty request line")
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"request is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ProtocolError("request must be a JSON object")
    code = data.get("code")
    if not isinstance(code, str) or not code:
        raise ProtocolError("request.code must be a non-empty string")
    cases = data.get("cases")
    if not isinstance(cases, list):
        raise ProtocolError("request.cases must be a list")
    for i, case in enumerate(cases):
        if not isinstance(case, dict) or not isinstance(case.get("expr"), str):
            raise ProtocolError(f"request.cases[{i}] must be an object with a string expr")
        if not isinstance(case.get("tier", "basic"), str):
            raise ProtocolError(f"request.cases[{i}].tier must be a string")
    timeout_s = data.get("timeout_s")
    if not isinstance(timeout_s, (int, float)) or isinstance(timeout_s, bool) or timeout_s <= 0:
        raise ProtocolError("request.timeout_s must be a positive number")
    restrict = data.get("restrict", True)
    if not isinstance(restrict, bool):
        raise ProtocolError("request.restrict must be a boolean")
    return {"code": code, "cases": cases, "timeout_s": float(timeout_s), "restrict": restrict}


def _run_case(compiled, expr: str, timeout_s: float) -> tuple[str, str]:
    """Execute code + one assert in a fresh namespace under an alarm."""

    def on_alarm(signum, frame):
        raise _CaseTimeout()

    previous_handler = signal.signal(signal.SIGALRM, on_alarm)
    signal.setitimer(signal.ITIMER_REAL, timeout_s)
    namespace: dict = {}
    try:
        exec(compiled, namespace)
        exec(compile(expr, "<case>", "exec"), namespace)
    except AssertionError as exc:
        detail = str(exc)
        return VERDICT_ASSERTION_FAILED, f"AssertionError{': ' + detail if detail else ''}"
    except _CaseTimeout:
        return VERDICT_TIMEOUT, f"case exceeded {timeout_s}s"
    except SyntaxError as exc:
        return VERDICT_RUNTIME_ERROR, _exception_message(exc)
    except BaseException as exc:  # noqa: BLE001 - anything the candidate throws
        return VERDICT_RUNTIME_ERROR, _exception_message(exc)
    else:
        return VERDICT_PASS, ""
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, previous_handler)


def run_shim(request: dict) -> dict:
    """Evaluate every case; the response always mirrors the case count."""
    code = request["code"]
    cases = request["cases"]
    timeout_s = request["timeout_s"]

    try:
        compiled = compile(code, "<candidate>", "exec")
    except (SyntaxError, ValueError) as exc:
        message = _exception_message(exc)
        return {
            "results": [
                {"index": i, "verdict": VERDICT_RUNTIME_ERROR, "message": message}
                for i in range(len(cases))
            ]
        }

    results = []
    for i, case in enumerate(cases):
        verdict, message = _run_case(compiled, case["expr"], timeout_s)
        results.append({"index": i, "verdict": verdict, "message": message[:MESSAGE_CAP]})
    return {"results": results}


def main() -> int:
    real_stdout = sys.stdout
    line = sys.stdin.readline()
    try:
        request = parse_request(line)
    except ProtocolError as exc:
        real_stdout.write(
            json.dumps({"error": {"type": "protocol_error", "message": str(exc)}}) + "\n"
        )
        real_stdout.flush()
        return 0

    if request["restrict"]:
        apply_restrictions()

    # Candidate prints must not leak onto the protocol channel.
    sys.stdout = io.StringIO()
    sys.stderr = io.StringIO()
    try:
        response = run_shim(request)
    finally:
        sys.stdout = real_stdout
        sys.stderr = sys.__stderr__

    real_stdout.write(json.dumps(response) + "\n")
    real_stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
