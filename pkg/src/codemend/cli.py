"""Operator entry points: correct, bench, calibrate, replay, serve.

Configuration precedence is flags over environment (CODEMEND_*) over the
config file. Exit codes: 0 success, 1 operational failure (including a
session that exhausts its loop budget), 2 configuration error. Fatal
errors print one JSON object to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
from dataclasses import replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .acl import AgentPlatform
from .bench import BenchError, BenchReport, calibrate_from_reports, render_table, run_bench
from .config import AppConfig, ConfigError, SessionSettings, dump_profiles, load_config
from .corpus import CorpusError, TaskRecord, load_corpus, load_mini_corpus, parse_corpus
from .gateway import (
    GatewayError,
    HttpBackend,
    HttpBackendConfig,
    RecordingBackend,
    ReplayBackend,
    ReplayMismatch,
    ScriptedBackend,
)
from .orchestrator import run_session
from .sandbox import InProcessExecutor, SandboxError, SubprocessExecutor

ENV_PREFIX = "CODEMEND_"


class CliError(Exception):
    """Operator-facing failure; exit_code picks the shell status."""

    def __init__(self, message: str, exit_code: int = 1, kind: str = "error"):
        super().__init__(message)
        self.exit_code = exit_code
        self.kind = kind


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name)


def _pick(flag_value, env_name: str, fallback):
    if flag_value is not None:
        return flag_value
    env_value = _env(env_name)
    if env_value is not None:
        return env_value
    return fallback


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codemend", description="Multi-agent code correction engine"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="config file (JSON); defaults to the shipped config")
        p.add_argument("--backend", choices=["live", "scripted", "replay"])
        p.add_argument("--model", help="pin every call to one model (fixed-model mode)")
        p.add_argument("--max-loops", type=int, dest="max_loops")
        p.add_argument("--memory", type=int, help="memory capacity in dialogue pairs")
        p.add_argument("--out", help="output directory")
        p.add_argument("--script", help="scripted backend responses (JSON)")
        p.add_argument("--trace", help="trace file for replay mode")
        p.add_argument("--record", help="record completions to this trace file")
        p.add_argument(
            "--sandbox", choices=["shim", "inprocess"], default="shim",
            help="test executor: the isolated shim subprocess or in-process (dev only)",
        )

    p_correct = sub.add_parser("correct", help="repair one task")
    common(p_correct)
    p_correct.add_argument("--task", help="task record (JSON file)")
    p_correct.add_argument("--code", help="inline broken code")
    p_correct.add_argument("--code-file", dest="code_file", help="broken code file")
    p_correct.add_argument(
        "--tests", help="test file: JSON with test_list/challenge_test_list, or assert lines"
    )
    p_correct.add_argument("--description", default="", help="task description")

    p_bench = sub.add_parser("bench", help="run the benchmark over a corpus")
    common(p_bench)
    p_bench.add_argument("--corpus", help="corpus JSONL; defaults to the shipped mini corpus")
    p_bench.add_argument("--method", default="e-rl", help="'e-rl' or 'fixed:<model>'")
    p_bench.add_argument("--workers", type=int, default=None)
    p_bench.add_argument("--checkpoint", help="checkpoint file for resumable runs")

    p_cal = sub.add_parser("calibrate", help="derive model profiles from bench reports")
    p_cal.add_argument(
        "--report", action="append", required=True, metavar="MODEL=PATH",
        help="fixed-model bench report, repeatable",
    )
    p_cal.add_argument("--stability", type=float, default=0.9)
    p_cal.add_argument("--out", help="output directory")

    p_replay = sub.add_parser("replay", help="re-run tasks against a recorded trace")
    common(p_replay)
    p_replay.add_argument("--corpus", help="corpus JSONL; defaults to the shipped mini corpus")
    p_replay.add_argument("--task", help="single task record (JSON file)")

    p_serve = sub.add_parser("serve", help="HTTP service: POST /correct, GET /healthz")
    common(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--max-sessions", type=int, default=4, dest="max_sessions")

    return parser


def resolve_config(args: argparse.Namespace) -> AppConfig:
    config_path = _pick(getattr(args, "config", None), "CONFIG", None)
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        raise CliError(str(exc), exit_code=2, kind="config") from exc
    max_loops = _pick(getattr(args, "max_loops", None), "MAX_LOOPS", None)
    memory = _pick(getattr(args, "memory", None), "MEMORY", None)
    if max_loops is not None or memory is not None:
        config.session = SessionSettings(
            max_loops=int(max_loops) if max_loops is not None else config.session.max_loops,
            memory_capacity=int(memory) if memory is not None else config.session.memory_capacity,
        )
    return config


def build_backend(args: argparse.Namespace, config: AppConfig):
    mode = _pick(getattr(args, "backend", None), "BACKEND", "scripted")
    if mode == "scripted":
        script = _pick(getattr(args, "script", None), "SCRIPT", None)
        if not script:
            raise CliError("scripted backend needs --script", exit_code=2, kind="config")
        try:
            backend = ScriptedBackend.from_file(script)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise CliError(f"bad script file {script}: {exc}", exit_code=2, kind="config") from exc
    elif mode == "replay":
        trace = _pick(getattr(args, "trace", None), "TRACE", None)
        if not trace:
            raise CliError("replay backend needs --trace", exit_code=2, kind="config")
        try:
            backend = ReplayBackend(trace)
        except (OSError, GatewayError) as exc:
            raise CliError(f"bad trace file {trace}: {exc}", exit_code=2, kind="config") from exc
    elif mode == "live":
        if not config.endpoints:
            raise CliError(
                "live backend needs endpoints in the config file", exit_code=2, kind="config"
            )
        api_keys = {
            model: os.environ[f"{model.upper()}_API_KEY"]
            for model in config.endpoints
            if f"{model.upper()}_API_KEY" in os.environ
        }
        backend = HttpBackend(HttpBackendConfig(endpoints=config.endpoints, api_keys=api_keys))
    else:
        raise CliError(f"unknown backend mode {mode!r}", exit_code=2, kind="config")

    record = _pick(getattr(args, "record", None), "RECORD", None)
    if record:
        backend = RecordingBackend(backend, record)
    return backend


def build_executor(args: argparse.Namespace):
    if getattr(args, "sandbox", "shim") == "inprocess":
        return InProcessExecutor()
    return SubprocessExecutor()


def _out_dir(args: argparse.Namespace) -> Path | None:
    out = _pick(getattr(args, "out", None), "OUT", None)
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def load_task(args: argparse.Namespace) -> TaskRecord:
    if args.task:
        path = Path(args.task)
        if not path.exists():
            raise CliError(f"task file not found: {path}", exit_code=2, kind="config")
        records = parse_corpus(path.read_text(encoding="utf-8"))
        if len(records) != 1:
            raise CliError(f"task file must hold exactly one record, got {len(records)}",
                           exit_code=2, kind="config")
        return records[0]

    if args.code and args.code_file:
        raise CliError("give --code or --code-file, not both", exit_code=2, kind="config")
    if args.code_file:
        path = Path(args.code_file)
        if not path.exists():
            raise CliError(f"code file not found: {path}", exit_code=2, kind="config")
        code = path.read_text(encoding="utf-8")
        task_id = path.stem
    elif args.code:
        code = args.code
        task_id = "inline"
    else:
        raise CliError("need --task, --code or --code-file", exit_code=2, kind="config")

    if not args.tests:
        raise CliError("need --tests with --code/--code-file", exit_code=2, kind="config")
    tests_path = Path(args.tests)
    if not tests_path.exists():
        raise CliError(f"tests file not found: {tests_path}", exit_code=2, kind="config")
    text = tests_path.read_text(encoding="utf-8")
    if tests_path.suffix == ".json":
        data = json.loads(text)
        test_list = data["test_list"]
        challenge = data.get("challenge_test_list", [])
    else:
        test_list = [line.strip() for line in text.splitlines() if line.strip().startswith("assert")]
        challenge = []
    if not test_list:
        raise CliError("tests file holds no assert lines", exit_code=2, kind="config")
    return TaskRecord(
        task_id=task_id,
        description=args.description,
        error_code=code,
        test_list=tuple(test_list),
        challenge_test_list=tuple(challenge),
    )


def load_corpus_arg(args: argparse.Namespace) -> list[TaskRecord]:
    corpus_path = _pick(getattr(args, "corpus", None), "CORPUS", None)
    try:
        if corpus_path is None:
            return load_mini_corpus()
        return load_corpus(corpus_path)
    except CorpusError as exc:
        raise CliError(str(exc), exit_code=2, kind="config") from exc


def _session_config(args: argparse.Namespace, config: AppConfig) -> AppConfig:
    model = _pick(getattr(args, "model", None), "MODEL", None)
    if model is None:
        return config
    from .bench import fixed_model_config

    try:
        return fixed_model_config(config, model)
    except Exception as exc:
        raise CliError(str(exc), exit_code=2, kind="config") from exc


def cmd_correct(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    session_config = _session_config(args, config)
    task = load_task(args)
    backend = build_backend(args, config)
    executor = build_executor(args)
    platform = AgentPlatform.bootstrap()
    result = run_session(task, session_config, backend=backend, executor=executor,
                         platform=platform)

    out = _out_dir(args)
    if out:
        (out / "result.json").write_text(
            json.dumps(result.to_record(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        history = "\n".join(json.dumps(e.to_record(), sort_keys=True) for e in result.history)
        (out / "history.jsonl").write_text(history + "\n", encoding="utf-8")
        (out / "messages.jsonl").write_text(platform.export_log() + "\n", encoding="utf-8")

    if result.solved:
        print(result.final_code)
        return 0
    print(json.dumps(result.to_record(), sort_keys=True), file=sys.stderr)
    return 1


def cmd_bench(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    corpus = load_corpus_arg(args)
    backend = build_backend(args, config)
    executor = build_executor(args)
    workers = int(_pick(args.workers, "WORKERS", 1))
    report = run_bench(
        corpus, config, method=args.method, backend=backend, executor=executor,
        workers=workers, checkpoint_path=args.checkpoint,
    )
    out = _out_dir(args)
    if out:
        (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
        (out / "report.txt").write_text(render_table([report]) + "\n", encoding="utf-8")
    print(render_table([report]))
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    reports: dict[str, BenchReport] = {}
    for item in args.report:
        if "=" not in item:
            raise CliError(f"--report wants MODEL=PATH, got {item!r}", exit_code=2, kind="config")
        model, path = item.split("=", 1)
        if not Path(path).exists():
            raise CliError(f"report not found: {path}", exit_code=2, kind="config")
        reports[model] = BenchReport.load(path)
    try:
        profiles = calibrate_from_reports(reports, stability=args.stability)
    except Exception as exc:
        raise CliError(f"calibration failed: {exc}", exit_code=1) from exc
    payload = json.dumps({"profiles": dump_profiles(profiles)}, sort_keys=True, indent=2)
    out = _out_dir(args)
    if out:
        (out / "profiles.json").write_text(payload + "\n", encoding="utf-8")
    print(payload)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    args.backend = "replay"
    config = resolve_config(args)
    backend = build_backend(args, config)
    executor = build_executor(args)
    session_config = _session_config(args, config)
    if args.task:
        tasks = [load_task(args)]
    else:
        tasks = load_corpus_arg(args)
    try:
        for task in tasks:
            run_session(task, session_config, backend=backend, executor=executor)
    except ReplayMismatch as exc:
        raise CliError(f"replay diverged: {exc}", exit_code=1, kind="replay") from exc
    inner = backend
    while isinstance(inner, RecordingBackend):
        inner = inner.inner
    pending = inner.pending()
    if pending:
        raise CliError(f"trace has {pending} unconsumed completions", exit_code=1, kind="replay")
    print(json.dumps({"replay": "ok", "tasks": len(tasks)}))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    session_config = _session_config(args, config)
    backend = build_backend(args, config)
    executor = build_executor(args)
    gate = threading.BoundedSemaphore(args.max_sessions)
    counter = {"n": 0}
    counter_lock = threading.Lock()

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *log_args):  # quiet server
            pass

        def _reply(self, status: int, payload: dict) -> None:
            body = json.dumps(payload, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/healthz":
                self._reply(200, {"status": "ok"})
            else:
                self._reply(404, {"error": {"type": "not_found", "message": self.path}})

        def do_POST(self):
            if self.path != "/correct":
                self._reply(404, {"error": {"type": "not_found", "message": self.path}})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                data = json.loads(self.rfile.read(length).decode("utf-8"))
                task = TaskRecord(
                    task_id=data["task_id"],
                    description=data.get("description", ""),
                    error_code=data["error_code"],
                    test_list=tuple(data["test_list"]),
                    challenge_test_list=tuple(data.get("challenge_test_list", [])),
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                self._reply(400, {"error": {"type": "bad_request", "message": str(exc)}})
                return
            with counter_lock:
                counter["n"] += 1
                seq = counter["n"]
            scoped = replace(task, task_id=f"{task.task_id}@{seq}")
            with gate:
                try:
                    result = run_session(
                        scoped, session_config, backend=backend, executor=executor
                    )
                except (GatewayError, SandboxError) as exc:
                    self._reply(500, {"error": {"type": type(exc).__name__, "message": str(exc)}})
                    return
            record = result.to_record()
            record["task_id"] = task.task_id
            self._reply(200, record)

    server = ThreadingHTTPServer((args.host, args.port), Handler)
    print(json.dumps({"serving": f"http://{args.host}:{server.server_address[1]}"}))
    sys.stdout.flush()
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


COMMANDS = {
    "correct": cmd_correct,
    "bench": cmd_bench,
    "calibrate": cmd_calibrate,
    "replay": cmd_replay,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(json.dumps({"error": {"type": exc.kind, "message": str(exc)}}), file=sys.stderr)
        return exc.exit_code
    except (GatewayError, SandboxError, CorpusError, BenchError) as exc:
        print(
            json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
