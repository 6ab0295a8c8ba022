"""Benchmark execution over a corpus, report aggregation and calibration.

Reports separate successes-per-loop from the failure column; the text
table folds failures into the last loop column (a budget-exhausted run
is what that column counts). Per-task rows carry the reward deltas so a
resumed bench rebuilds the identical report.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import AppConfig
from .corpus import TaskRecord
from .gateway import CompletionBackend
from .orchestrator import SessionResult, run_session
from .policy import LlmProfile, RewardLedger, calibrate_profiles
from .sandbox import SandboxExecutor


class BenchError(Exception):
    pass


@dataclass
class BenchReport:
    method: str
    corpus_size: int
    max_loops: int
    loop_histogram: dict[int, int]
    failures: int
    average_running_time: float
    accuracy: float
    rows: list[dict] = field(default_factory=list)
    cumulative_reward: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "corpus_size": self.corpus_size,
            "max_loops": self.max_loops,
            "loop_histogram": {str(k): v for k, v in sorted(self.loop_histogram.items())},
            "failures": self.failures,
            "average_running_time": self.average_running_time,
            "accuracy": self.accuracy,
            "cumulative_reward": {k: self.cumulative_reward[k] for k in sorted(self.cumulative_reward)},
            "rows": self.rows,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "BenchReport":
        return cls(
            method=data["method"],
            corpus_size=int(data["corpus_size"]),
            max_loops=int(data["max_loops"]),
            loop_histogram={int(k): int(v) for k, v in data["loop_histogram"].items()},
            failures=int(data["failures"]),
            average_running_time=float(data["average_running_time"]),
            accuracy=float(data["accuracy"]),
            rows=list(data.get("rows", [])),
            cumulative_reward={k: float(v) for k, v in data.get("cumulative_reward", {}).items()},
        )

    @classmethod
    def load(cls, path: str | Path) -> "BenchReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def task_ids(self) -> list[str]:
        return [row["task_id"] for row in self.rows]


def render_table(reports: list[BenchReport]) -> str:
    """Aligned text table; the last loop column includes failed runs."""
    if not reports:
        return ""
    max_loops = max(r.max_loops for r in reports)
    loop_headers = [f"{i} loop" + ("s" if i > 1 else "") for i in range(1, max_loops + 1)]
    headers = ["Method", *loop_headers, "Average running time (s)", "Accuracy (%)"]
    rows = []
    for report in reports:
        cells = [report.method]
        for i in range(1, max_loops + 1):
            count = report.loop_histogram.get(i, 0)
            if i == max_loops:
                count += report.failures
            cells.append(str(count))
        cells.append(f"{report.average_running_time:.1f}")
        cells.append(f"{report.accuracy * 100:.2f}")
        rows.append(cells)
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for cells in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)))
    return "\n".join(lines)


def fixed_model_config(config: AppConfig, model: str) -> AppConfig:
    """Pin every routing decision to one model."""
    if model not in config.profiles:
        raise BenchError(f"model {model!r} has no profile")
    return AppConfig(
        ranking=[model, model, model],
        weights=config.weights,
        thresholds=config.thresholds,
        profiles={model: config.profiles[model]},
        session=config.session,
        sandbox=config.sandbox,
        input_limits=config.input_limits,
        endpoints=config.endpoints,
        tie_break=[model],
    )


def _session_row(result: SessionResult, rewards: dict[str, float]) -> dict:
    return {
        "task_id": result.task_id,
        "loops": result.loop_count,
        "elapsed": result.cumulative_elapsed,
        "solved": result.solved,
        "models_used": list(result.models_used),
        "rewards": {k: rewards[k] for k in sorted(rewards)},
    }


def aggregate(method: str, rows: list[dict], corpus_size: int, max_loops: int) -> BenchReport:
    """Fold per-task rows into a report; order-independent (sorted by id)."""
    rows = sorted(rows, key=lambda r: r["task_id"])
    histogram = {i: 0 for i in range(1, max_loops + 1)}
    failures = 0
    reward_totals: dict[str, float] = {}
    for row in rows:
        if row["solved"]:
            histogram[row["loops"]] += 1
        else:
            failures += 1
        for model_id, delta in row.get("rewards", {}).items():
            reward_totals[model_id] = reward_totals.get(model_id, 0.0) + delta
    solved = sum(histogram.values())
    if solved + failures != len(rows):
        raise BenchError("histogram mass does not match row count")
    total_elapsed = sum(row["elapsed"] for row in rows)
    return BenchReport(
        method=method,
        corpus_size=corpus_size,
        max_loops=max_loops,
        loop_histogram=histogram,
        failures=failures,
        average_running_time=total_elapsed / len(rows) if rows else 0.0,
        accuracy=solved / corpus_size if corpus_size else 0.0,
        rows=rows,
        cumulative_reward=reward_totals,
    )


def run_bench(
    corpus: list[TaskRecord],
    config: AppConfig,
    method: str,
    backend: CompletionBackend,
    executor: SandboxExecutor,
    workers: int = 1,
    checkpoint_path: str | Path | None = None,
    history_dir: str | Path | None = None,
) -> BenchReport:
    """Run every task through a session and aggregate the report.

    ``method`` is "e-rl" or "fixed:<model>". A per-task crash lands in the
    failure column instead of aborting the bench. With a checkpoint path,
    completed rows are persisted as JSONL and skipped on resume. With a
    history dir, each session's event log is written as
    ``<task_id>.history.jsonl``.
    """
    if method == "e-rl":
        session_config = config
    elif method.startswith("fixed:"):
        session_config = fixed_model_config(config, method.split(":", 1)[1])
    else:
        raise BenchError(f"unknown method {method!r} (want 'e-rl' or 'fixed:<model>')")

    done_rows: list[dict] = []
    done_ids: set[str] = set()
    checkpoint = Path(checkpoint_path) if checkpoint_path else None
    if checkpoint and checkpoint.exists():
        for line in checkpoint.read_text(encoding="utf-8").splitlines():
            if line.strip():
                row = json.loads(line)
                done_rows.append(row)
                done_ids.add(row["task_id"])

    pending = [task for task in corpus if task.task_id not in done_ids]
    checkpoint_lock = threading.Lock()
    histories = Path(history_dir) if history_dir else None
    if histories:
        histories.mkdir(parents=True, exist_ok=True)

    def run_one(task: TaskRecord) -> dict:
        shard = RewardLedger()
        try:
            result = run_session(
                task, session_config, backend=backend, executor=executor, ledger=shard
            )
            row = _session_row(result, shard.scores)
            if histories:
                lines = "\n".join(json.dumps(e.to_record(), sort_keys=True) for e in result.history)
                (histories / f"{task.task_id}.history.jsonl").write_text(
                    lines + "\n", encoding="utf-8"
                )
        except Exception as exc:  # one broken task must not sink the bench
            row = {
                "task_id": task.task_id,
                "loops": 0,
                "elapsed": 0.0,
                "solved": False,
                "models_used": [],
                "rewards": {},
                "error": f"{type(exc).__name__}: {exc}",
            }
        if checkpoint:
            with checkpoint_lock:
                with checkpoint.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
        return row

    if workers <= 1:
        new_rows = [run_one(task) for task in pending]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            new_rows = list(pool.map(run_one, pending))

    return aggregate(
        method, done_rows + new_rows, corpus_size=len(corpus),
        max_loops=session_config.session.max_loops,
    )


def calibrate_from_reports(
    reports: dict[str, BenchReport],
    stability: dict[str, float] | float = 0.9,
) -> dict[str, LlmProfile]:
    """Per-model profiles from one fixed-model report per model."""
    cumulative = {}
    for model_id, report in reports.items():
        cumulative[model_id] = report.cumulative_reward.get(model_id, 0.0)
    average_times = {m: r.average_running_time for m, r in reports.items()}
    task_ids = {m: r.task_ids() for m, r in reports.items()}
    return calibrate_profiles(cumulative, average_times, task_ids, stability=stability)
