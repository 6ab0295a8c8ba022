"""Multi-agent code correction loop with reinforcement-driven model routing."""

from .acl import AclMessage, AgentId, AgentPlatform, Performative
from .bench import BenchReport, run_bench
from .config import AppConfig, load_config
from .corpus import TaskRecord, length_distribution, load_corpus, load_mini_corpus
from .gateway import (
    AgentRole,
    Completion,
    PromptBundle,
    ScriptedBackend,
    build_prompt,
    complete,
)
from .orchestrator import SessionResult, SessionState, run_session
from .policy import (
    LlmProfile,
    ParameterWeights,
    RewardLedger,
    calibrate_profiles,
    initial_model_by_length,
    logistic_weight,
    normalize_linear,
    select_model,
)
from .sandbox import SandboxPolicy, TestCase, TestOutcome, evaluate

__version__ = "0.1.0"

__all__ = [
    "AclMessage",
    "AgentId",
    "AgentPlatform",
    "AgentRole",
    "AppConfig",
    "BenchReport",
    "Completion",
    "LlmProfile",
    "ParameterWeights",
    "Performative",
    "PromptBundle",
    "RewardLedger",
    "SandboxPolicy",
    "ScriptedBackend",
    "SessionResult",
    "SessionState",
    "TaskRecord",
    "TestCase",
    "TestOutcome",
    "build_prompt",
    "calibrate_profiles",
    "complete",
    "evaluate",
    "initial_model_by_length",
    "length_distribution",
    "load_config",
    "load_corpus",
    "load_mini_corpus",
    "logistic_weight",
    "normalize_linear",
    "run_bench",
    "run_session",
    "select_model",
]
