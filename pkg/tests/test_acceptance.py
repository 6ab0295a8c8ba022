"""Acceptance suite: one test per engine-level criterion, printed as it passes.

Every tolerance is pinned here. The sandbox side runs with the in-process
executor standing in for the isolation shim; the shim's own end-to-end
criteria live with the shim package.
"""

from __future__ import annotations

import random
import time

import pytest

from oracles import brute_force_select, logistic_oracle

from codemend.acl import AgentId, AgentPlatform, DuplicateName, Performative, UnknownReceiver
from codemend.bench import run_bench
from codemend.config import load_config
from codemend.corpus import TaskRecord, load_mini_corpus
from codemend.gateway import AgentRole, ScriptedBackend
from codemend.orchestrator import CorrectionSession, SessionState, run_session
from codemend.policy import (
    BASIC_FAIL_PENALTY,
    BASIC_PASS_POINTS,
    CHALLENGE_FAIL_PENALTY,
    CHALLENGE_PASS_POINTS,
    LlmProfile,
    ParameterWeights,
    RewardLedger,
    logistic_weight,
    normalize_linear,
    reward_delta,
    select_model,
)
from codemend.sandbox import InProcessExecutor, ScriptedExecutor

from conftest import make_solving_backend
from reference_solutions import SOLUTIONS

TABLE_ONE_ROWS = {
    "ernie": (337, 60, 26, 14, 265),
    "llama": (317, 81, 32, 21, 251),
    "spark": (319, 48, 14, 4, 317),
}


def passed(label: str) -> None:
    print(f"ACCEPTANCE PASS: {label}")


def test_linear_normalization_criterion():
    """1000 random positive triples: sum 1 within 1e-12, order kept, < 1 s."""
    rng = random.Random(1)
    start = time.perf_counter()
    for _ in range(1000):
        triple = [rng.uniform(1e-6, 1e6) for _ in range(3)]
        out = normalize_linear(triple)
        assert abs(sum(out) - 1.0) <= 1e-12
        for i in range(3):
            for j in range(3):
                if triple[i] > triple[j]:
                    assert out[i] > out[j]
    elapsed = time.perf_counter() - start
    assert normalize_linear([1, 1, 2]) == [0.25, 0.25, 0.5]
    assert elapsed < 1.0, f"took {elapsed:.3f}s"
    passed(f"linear normalization (1000 triples in {elapsed:.3f}s)")


def test_logistic_squash_criterion():
    """Midpoint exact, 0.731059 at 1.0 within 1e-6, symmetry within 1e-12."""
    assert abs(logistic_weight(0.5) - 0.5) <= 1e-12
    assert abs(logistic_weight(1.0) - 0.731059) <= 1e-6
    assert abs(logistic_weight(1.0) - logistic_oracle(1.0)) <= 1e-12
    rng = random.Random(2)
    for _ in range(1000):
        x = rng.uniform(-8.0, 9.0)
        assert abs(logistic_weight(x) + logistic_weight(1.0 - x) - 1.0) <= 1e-12
    passed("logistic squash (midpoint, 0.731059, symmetry over 1000 samples)")


def test_model_selection_criterion():
    """1000 randomized configs agree with the brute-force oracle, < 5 s."""
    rng = random.Random(3)
    start = time.perf_counter()
    checked = 0
    for round_no in range(1000):
        n = rng.randint(1, 5)
        if round_no % 10 == 7:
            # engineered ties: clone one profile across several ids
            base = (rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0), rng.uniform(0.1, 1.0))
            profiles = {f"m{i}": LlmProfile(f"m{i}", *base) for i in range(n)}
        else:
            profiles = {
                f"m{i}": LlmProfile(
                    f"m{i}", rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0),
                    rng.uniform(0.1, 1.0),
                )
                for i in range(n)
            }
        weights = ParameterWeights(
            length=rng.uniform(0, 0.01), reward=rng.uniform(0, 2),
            time=rng.uniform(0, 2), run_time=rng.uniform(0, 0.1),
        )
        code_length = rng.randint(0, 2000)
        run_time = rng.uniform(0, 500)
        # exercise the stability penalty on most rounds
        recent = rng.choice([None, *profiles]) if round_no % 3 else sorted(profiles)[0]
        expected = brute_force_select(code_length, run_time, recent, profiles, weights)
        assert select_model(code_length, run_time, recent, profiles, weights) == expected
        checked += 1
    elapsed = time.perf_counter() - start
    assert checked == 1000
    assert elapsed < 5.0, f"took {elapsed:.3f}s"
    passed(f"model selection vs brute-force oracle (1000 configs in {elapsed:.3f}s)")


def test_reward_mechanism_criterion():
    """Point values per tier and fold/ledger replay equality."""
    assert BASIC_PASS_POINTS == 2.0
    assert CHALLENGE_PASS_POINTS == 3.0
    assert BASIC_FAIL_PENALTY == 0.5
    assert CHALLENGE_FAIL_PENALTY == 0.2
    assert reward_delta(True, True) == 5.0
    assert reward_delta(False, False) == pytest.approx(-0.7)
    assert reward_delta(True, False) == pytest.approx(1.8)
    assert reward_delta(False, True) == pytest.approx(2.5)

    rng = random.Random(4)
    for _ in range(100):
        ledger = RewardLedger()
        ledger.register("m")
        outcomes = [(rng.random() < 0.5, rng.random() < 0.5) for _ in range(rng.randint(0, 40))]
        deltas = [ledger.apply_test_reward("m", b, c) for b, c in outcomes]
        assert ledger.scores["m"] == pytest.approx(sum(deltas))
        assert ledger.scores["m"] == pytest.approx(
            sum(reward_delta(b, c) for b, c in outcomes)
        )
    passed("reward mechanism (+2/+3/-0.5/-0.2, replay equality over 100 sequences)")


def test_loop_budget_and_memory_criterion(config):
    """Always-fail backend: done_failure after exactly 5 attempts; memory <= 3."""
    corpus = load_mini_corpus()
    task = next(t for t in corpus if t.task_id == "remove_occ")
    backend = ScriptedBackend()
    backend.add_script(
        AgentRole.CORRECTION,
        [("def remove_Occ(s, ch):\n    return s\n", 1.0)] * 5,
        conversation_id=task.task_id,
    )
    backend.add_script(
        AgentRole.INTERPRETATION, [("not it", 1.0)] * 4, conversation_id=task.task_id
    )
    result = run_session(task, config, backend, InProcessExecutor())
    assert result.status is SessionState.DONE_FAILURE
    assert result.loop_count == 5
    corrections = sum(1 for e in result.history if e.state_to is SessionState.TESTING)
    test_rounds = corrections
    assert corrections == 5 and test_rounds == 5

    session = CorrectionSession(task=task, config=load_config())
    for i in range(10):
        session.append_memory((f"u{i}", f"a{i}"))
        assert len(session.memory) <= 3
    assert list(session.memory) == [(f"u{i}", f"a{i}") for i in (7, 8, 9)]
    passed("loop budget 5 and memory capacity 3 (10 appends keep the last 3)")


def test_bench_determinism_criterion(config, tmp_path):
    """Two scripted mini-corpus benches: byte-identical reports and histories."""
    corpus = load_mini_corpus()
    assert len(corpus) == 20

    def one_run(tag: str):
        backend = make_solving_backend(corpus, SOLUTIONS, wrong_attempts=1)
        history_dir = tmp_path / tag
        report = run_bench(
            corpus, config, "e-rl", backend, InProcessExecutor(),
            workers=2, history_dir=history_dir,
        )
        histories = {
            p.name: p.read_bytes() for p in sorted(history_dir.glob("*.history.jsonl"))
        }
        return report.to_json().encode(), histories

    report_a, hist_a = one_run("a")
    report_b, hist_b = one_run("b")
    assert report_a == report_b
    assert hist_a.keys() == hist_b.keys() and len(hist_a) == 20
    for name in hist_a:
        assert hist_a[name] == hist_b[name], name
    passed("bench determinism (byte-identical reports and 20 session histories)")


def _loop_schedule_bench(config, model: str, row: tuple[int, int, int, int, int]):
    """Scripted 702-task bench succeeding at the row's per-loop counts."""
    plan: list[int | None] = []
    for loops, count in zip((1, 2, 3, 4), row[:4]):
        plan += [loops] * count
    plan += [None] * row[4]
    assert len(plan) == 702

    tasks = []
    backend = ScriptedBackend()
    for i, target in enumerate(plan):
        task_id = f"t{i:04d}"
        tasks.append(
            TaskRecord(
                task_id=task_id, description="", error_code="def f():\n    return 0\n",
                test_list=("assert f() == 1",), challenge_test_list=("assert f() == 2",),
            )
        )
        if target is None:
            backend.add_script(
                AgentRole.CORRECTION, [("miss", 1.0)] * 5, conversation_id=task_id
            )
            backend.add_script(
                AgentRole.INTERPRETATION, [("analysis", 1.0)] * 4, conversation_id=task_id
            )
        else:
            backend.add_script(
                AgentRole.CORRECTION,
                [("miss", 1.0)] * (target - 1) + [("hit", 1.0)],
                conversation_id=task_id,
            )
            if target > 1:
                backend.add_script(
                    AgentRole.INTERPRETATION, [("analysis", 1.0)] * (target - 1),
                    conversation_id=task_id,
                )
            backend.add_script(
                AgentRole.ANNOTATION, [("hit  # annotated", 1.0)], conversation_id=task_id
            )
    executor = ScriptedExecutor(decide=lambda code: ("hit" in code, "hit" in code))
    return run_bench(tasks, config, f"fixed:{model}", backend, executor)


def test_loop_count_bookkeeping_criterion(config):
    """Scripted replays reproduce all three per-model loop rows exactly."""
    reports = {}
    for model, row in TABLE_ONE_ROWS.items():
        report = _loop_schedule_bench(config, model, row)
        assert report.loop_histogram == {1: row[0], 2: row[1], 3: row[2], 4: row[3], 5: 0}
        assert report.failures == row[4]
        assert report.accuracy == (702 - row[4]) / 702
        assert sum(report.loop_histogram.values()) == sum(row[:4])
        reports[model] = report
    expected_successes = {m: sum(r[:4]) for m, r in TABLE_ONE_ROWS.items()}
    assert expected_successes == {"ernie": 437, "llama": 451, "spark": 385}

    # calibration over the three rows: shares normalize then squash
    from codemend.bench import calibrate_from_reports

    profiles = calibrate_from_reports(reports, stability=0.9)
    rewards = {m: reports[m].cumulative_reward[m] for m in reports}
    shares = normalize_linear([rewards[m] for m in sorted(rewards)])
    for share, model in zip(shares, sorted(rewards)):
        assert profiles[model].reward_weight == pytest.approx(logistic_weight(share))
    assert (
        profiles["llama"].reward_weight
        > profiles["ernie"].reward_weight
        > profiles["spark"].reward_weight
    )
    passed("per-loop bookkeeping (three scripted 702-task rows reproduced and calibrated)")


def test_registration_scenario_criterion():
    """Failed third registration changes nothing; retry succeeds; log counts."""
    platform = AgentPlatform.bootstrap()
    platform.register(AgentId("agent_1"))
    platform.register(AgentId("agent_2"))
    version_before = platform.table.version
    delivered = len(platform.message_log)

    with pytest.raises(DuplicateName):
        platform.register(AgentId("agent_2"))  # third agent picks a taken name
    assert platform.table.version == version_before
    with pytest.raises(UnknownReceiver):
        platform.send("agent_1", "agent_3", Performative.REQUEST, "c", "hello")

    platform.register(AgentId("agent_3"))  # second attempt with a fresh name
    delivered += 2  # table updates to agent_1 and agent_2
    assert platform.table.version == version_before + 1
    receipt = platform.send("agent_1", "agent_3", Performative.REQUEST, "c", "hello")
    delivered += 1
    assert receipt.delivered
    receipt = platform.send("agent_2", "agent_3", Performative.INFORM, "c", "welcome")
    delivered += 1
    assert receipt.delivered

    assert len(platform.message_log) == delivered
    passed("registration retry scenario and message-log accounting")
