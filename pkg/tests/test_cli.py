from __future__ import annotations

import json
import math
import subprocess
import sys
import urllib.error
import urllib.request

import pytest

from codemend.bench import run_bench
from codemend.cli import main
from codemend.corpus import load_mini_corpus
from codemend.sandbox import InProcessExecutor

from conftest import make_solving_backend
from reference_solutions import SOLUTIONS


def write_script(path, corrections, interpretations=0, annotation="# annotated\n"):
    scripts = [
        {
            "role": "correction",
            "responses": [{"text": text, "elapsed_s": 1.0} for text in corrections],
        },
        {"role": "annotation", "responses": [{"text": annotation, "elapsed_s": 1.0}]},
    ]
    if interpretations:
        scripts.append(
            {
                "role": "interpretation",
                "responses": [{"text": "analysis", "elapsed_s": 1.0}] * interpretations,
            }
        )
    path.write_text(json.dumps({"scripts": scripts}), encoding="utf-8")
    return path


def write_task(path, task):
    path.write_text(json.dumps(task.to_record()) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def remove_occ_files(tmp_path, tasks_by_id, solutions):
    task = tasks_by_id["remove_occ"]
    task_file = write_task(tmp_path / "task.jsonl", task)
    solution = solutions["remove_occ"]
    script = write_script(
        tmp_path / "script.json", [solution], annotation=solution + "# notes\n"
    )
    return task_file, script


class TestCorrect:
    def test_solving_run_exits_zero(self, remove_occ_files, tmp_path, capsys):
        task_file, script = remove_occ_files
        out = tmp_path / "out"
        code = main([
            "correct", "--task", str(task_file), "--script", str(script),
            "--backend", "scripted", "--sandbox", "inprocess", "--out", str(out),
        ])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "def remove_Occ" in stdout
        result = json.loads((out / "result.json").read_text())
        assert result["solved"] is True
        assert (out / "history.jsonl").exists()
        assert (out / "messages.jsonl").exists()

    def test_always_fail_exits_one_with_five_loops(self, tmp_path, tasks_by_id, capsys):
        task_file = write_task(tmp_path / "task.jsonl", tasks_by_id["remove_occ"])
        script = write_script(
            tmp_path / "script.json",
            ["def remove_Occ(s, ch):\n    return s\n"] * 5,
            interpretations=4,
        )
        out = tmp_path / "out"
        code = main([
            "correct", "--task", str(task_file), "--script", str(script),
            "--backend", "scripted", "--sandbox", "inprocess", "--out", str(out),
        ])
        assert code == 1
        result = json.loads((out / "result.json").read_text())
        assert result["loops"] == 5
        assert result["solved"] is False

    def test_missing_config_exits_two(self, remove_occ_files, tmp_path, capsys):
        task_file, script = remove_occ_files
        code = main([
            "correct", "--task", str(task_file), "--script", str(script),
            "--config", str(tmp_path / "missing.json"),
        ])
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert "missing.json" in err["error"]["message"]

    def test_inline_code_with_test_file(self, tmp_path, solutions, capsys):
        tests_file = tmp_path / "tests.txt"
        tests_file.write_text("assert gcd(12, 8) == 4\nassert gcd(7, 3) == 1\n")
        script = write_script(tmp_path / "script.json", [solutions["gcd"]])
        code = main([
            "correct", "--code", "def gcd(a, b):\n    return a\n",
            "--tests", str(tests_file), "--script", str(script),
            "--backend", "scripted", "--sandbox", "inprocess",
        ])
        assert code == 0

    def test_idempotent_output_directory(self, remove_occ_files, tmp_path, capsys):
        task_file, script = remove_occ_files
        out = tmp_path / "out"

        def run_once():
            code = main([
                "correct", "--task", str(task_file), "--script", str(script),
                "--backend", "scripted", "--sandbox", "inprocess", "--out", str(out),
            ])
            assert code == 0
            return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

        assert run_once() == run_once()

    def test_env_var_beaten_by_flag(self, tmp_path, tasks_by_id, monkeypatch):
        task_file = write_task(tmp_path / "task.jsonl", tasks_by_id["remove_occ"])
        script = write_script(
            tmp_path / "script.json",
            ["def remove_Occ(s, ch):\n    return s\n"] * 3,
            interpretations=2,
        )
        out = tmp_path / "out"
        monkeypatch.setenv("CODEMEND_MAX_LOOPS", "1")
        code = main([
            "correct", "--task", str(task_file), "--script", str(script),
            "--backend", "scripted", "--sandbox", "inprocess",
            "--max-loops", "3", "--out", str(out),
        ])
        assert code == 1
        assert json.loads((out / "result.json").read_text())["loops"] == 3

    def test_env_var_beats_config_default(self, tmp_path, tasks_by_id, monkeypatch):
        task_file = write_task(tmp_path / "task.jsonl", tasks_by_id["remove_occ"])
        script = write_script(
            tmp_path / "script.json", ["def remove_Occ(s, ch):\n    return s\n"]
        )
        out = tmp_path / "out"
        monkeypatch.setenv("CODEMEND_MAX_LOOPS", "1")
        code = main([
            "correct", "--task", str(task_file), "--script", str(script),
            "--backend", "scripted", "--sandbox", "inprocess", "--out", str(out),
        ])
        assert code == 1
        assert json.loads((out / "result.json").read_text())["loops"] == 1

    def test_max_loops_override(self, tmp_path, tasks_by_id, capsys):
        task_file = write_task(tmp_path / "task.jsonl", tasks_by_id["remove_occ"])
        script = write_script(
            tmp_path / "script.json",
            ["def remove_Occ(s, ch):\n    return s\n"] * 2,
            interpretations=1,
        )
        out = tmp_path / "out"
        code = main([
            "correct", "--task", str(task_file), "--script", str(script),
            "--backend", "scripted", "--sandbox", "inprocess",
            "--max-loops", "2", "--out", str(out),
        ])
        assert code == 1
        assert json.loads((out / "result.json").read_text())["loops"] == 2


class TestBenchCommand:
    def test_bench_writes_report(self, tmp_path, capsys):
        corpus = load_mini_corpus()[:3]
        corpus_file = tmp_path / "corpus.jsonl"
        corpus_file.write_text(
            "\n".join(json.dumps(t.to_record()) for t in corpus) + "\n", encoding="utf-8"
        )
        scripts = []
        for task in corpus:
            scripts.append({
                "role": "correction", "conversation": task.task_id,
                "responses": [{"text": SOLUTIONS[task.task_id], "elapsed_s": 2.0}],
            })
            scripts.append({
                "role": "annotation", "conversation": task.task_id,
                "responses": [{"text": SOLUTIONS[task.task_id], "elapsed_s": 1.0}],
            })
        script_file = tmp_path / "script.json"
        script_file.write_text(json.dumps({"scripts": scripts}))
        out = tmp_path / "out"
        code = main([
            "bench", "--corpus", str(corpus_file), "--script", str(script_file),
            "--backend", "scripted", "--sandbox", "inprocess", "--out", str(out),
        ])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["accuracy"] == 1.0
        assert report["loop_histogram"]["1"] == 3
        table = (out / "report.txt").read_text()
        assert "Accuracy (%)" in table
        assert "e-rl" in table


class TestCalibrateCommand:
    def test_profiles_normalize_pre_logistic(self, config, tmp_path, capsys):
        corpus = load_mini_corpus()[:4]
        paths = {}
        for model, misses in (("ernie", 0), ("llama", 1), ("spark", 2)):
            backend = make_solving_backend(corpus, SOLUTIONS, wrong_attempts=misses)
            report = run_bench(
                corpus, config, f"fixed:{model}", backend, InProcessExecutor()
            )
            path = tmp_path / f"{model}.json"
            path.write_text(report.to_json())
            paths[model] = path
        out = tmp_path / "out"
        code = main([
            "calibrate",
            "--report", f"ernie={paths['ernie']}",
            "--report", f"llama={paths['llama']}",
            "--report", f"spark={paths['spark']}",
            "--out", str(out),
        ])
        assert code == 0
        profiles = json.loads((out / "profiles.json").read_text())["profiles"]
        # invert the logistic: share = 0.5 - ln(1/w - 1) / 2; shares sum to 1
        shares = [
            0.5 - math.log(1 / profiles[m]["reward_weight"] - 1) / 2
            for m in ("ernie", "llama", "spark")
        ]
        assert sum(shares) == pytest.approx(1.0, abs=1e-9)

    def test_bad_report_argument(self, capsys):
        assert main(["calibrate", "--report", "no-equals-sign"]) == 2


class TestReplayCommand:
    def record_run(self, tmp_path, tasks_by_id, solutions):
        task_file = write_task(tmp_path / "task.jsonl", tasks_by_id["fib"])
        solution = solutions["fib"]
        script = write_script(tmp_path / "script.json", [solution], annotation=solution)
        trace = tmp_path / "trace.jsonl"
        code = main([
            "correct", "--task", str(task_file), "--script", str(script),
            "--backend", "scripted", "--sandbox", "inprocess",
            "--record", str(trace),
        ])
        assert code == 0
        return task_file, trace

    def test_replay_round_trip(self, tmp_path, tasks_by_id, solutions, capsys):
        task_file, trace = self.record_run(tmp_path, tasks_by_id, solutions)
        capsys.readouterr()  # drop the recording run's output
        code = main([
            "replay", "--task", str(task_file), "--trace", str(trace),
            "--sandbox", "inprocess",
        ])
        assert code == 0
        assert json.loads(capsys.readouterr().out.splitlines()[-1])["replay"] == "ok"

    def test_tampered_trace_fails(self, tmp_path, tasks_by_id, solutions, capsys):
        task_file, trace = self.record_run(tmp_path, tasks_by_id, solutions)
        lines = [json.loads(l) for l in trace.read_text().splitlines()]
        lines[0]["response"] = "def fib(n):\n    return 99\n"
        trace.write_text("\n".join(json.dumps(l) for l in lines) + "\n")
        code = main([
            "replay", "--task", str(task_file), "--trace", str(trace),
            "--sandbox", "inprocess",
        ])
        assert code == 1

    def test_leftover_trace_entries_fail(self, tmp_path, tasks_by_id, solutions, capsys):
        task_file, trace = self.record_run(tmp_path, tasks_by_id, solutions)
        extra = {
            "conversation_id": "other-task", "model": "spark", "agent_role": "correction",
            "request_digest": "0" * 64, "response": "x", "elapsed_s": 1.0,
        }
        with trace.open("a") as fh:
            fh.write(json.dumps(extra) + "\n")
        code = main([
            "replay", "--task", str(task_file), "--trace", str(trace),
            "--sandbox", "inprocess",
        ])
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert "unconsumed" in err["error"]["message"]


class TestServeCommand:
    def test_post_correct_and_healthz(self, tmp_path, tasks_by_id, solutions):
        task = tasks_by_id["remove_occ"]
        solution = solutions["remove_occ"]
        script = write_script(
            tmp_path / "script.json", [solution], annotation=solution + "# served\n"
        )
        proc = subprocess.Popen(
            [
                sys.executable, "-m", "codemend.cli", "serve",
                "--script", str(script), "--backend", "scripted",
                "--sandbox", "inprocess", "--port", "0",
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            line = proc.stdout.readline()
            base = json.loads(line)["serving"]

            with urllib.request.urlopen(f"{base}/healthz", timeout=5) as resp:
                assert json.loads(resp.read()) == {"status": "ok"}

            body = json.dumps(task.to_record()).encode()
            req = urllib.request.Request(
                f"{base}/correct", data=body, headers={"Content-Type": "application/json"}
            )
            with urllib.request.urlopen(req, timeout=10) as resp:
                payload = json.loads(resp.read())
            assert payload["solved"] is True
            assert payload["loops"] == 1
            assert payload["task_id"] == "remove_occ"
            assert "def remove_Occ" in payload["final_code"]

            bad = urllib.request.Request(f"{base}/correct", data=b"{}",
                                         headers={"Content-Type": "application/json"})
            try:
                urllib.request.urlopen(bad, timeout=5)
                raise AssertionError("expected HTTP 400")
            except urllib.error.HTTPError as exc:
                assert exc.code == 400
        finally:
            proc.terminate()
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
