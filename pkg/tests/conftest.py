from __future__ import annotations

import pytest

from codemend.config import load_config
from codemend.corpus import load_mini_corpus
from codemend.gateway import AgentRole, ScriptedBackend
from codemend.policy import LlmProfile

from reference_solutions import SOLUTIONS


@pytest.fixture()
def config():
    """Shipped defaults with a known, asymmetric profile trio."""
    cfg = load_config()
    cfg.profiles = {
        "ernie": LlmProfile("ernie", reward_weight=0.9, time_weight=0.99, stability=0.9),
        "llama": LlmProfile("llama", reward_weight=0.6, time_weight=0.6, stability=0.9),
        "spark": LlmProfile("spark", reward_weight=0.3, time_weight=0.2, stability=0.9),
    }
    return cfg


@pytest.fixture()
def mini_corpus():
    return load_mini_corpus()


@pytest.fixture()
def tasks_by_id(mini_corpus):
    return {task.task_id: task for task in mini_corpus}


@pytest.fixture()
def solutions():
    return SOLUTIONS


def make_solving_backend(corpus, solutions, wrong_attempts: int = 0, elapsed: float = 1.0):
    """Scripted backend that solves each task after `wrong_attempts` misses."""
    backend = ScriptedBackend()
    for task in corpus:
        responses = [("def broken():\n    pass", elapsed)] * wrong_attempts
        responses.append((solutions[task.task_id], elapsed))
        backend.add_script(AgentRole.CORRECTION, responses, conversation_id=task.task_id)
        backend.add_script(
            AgentRole.INTERPRETATION,
            [("the code does not satisfy the tests", elapsed)] * max(1, wrong_attempts),
            conversation_id=task.task_id,
        )
        backend.add_script(
            AgentRole.ANNOTATION,
            [(solutions[task.task_id] + "\n# reviewed: straightforward fix", elapsed)],
            conversation_id=task.task_id,
        )
    return backend
