"""Configuration loading for policy, session and sandbox settings.

A single JSON file carries everything an operator can tune; every value
has a shipped default (data/default_config.json). Precedence is handled
by the CLI: flags over environment over file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .policy import LlmProfile, ParameterWeights, logistic_weight
from .sandbox import SandboxPolicy


class ConfigError(Exception):
    """Configuration file missing, unreadable or inconsistent."""


@dataclass(frozen=True)
class SessionSettings:
    max_loops: int = 5
    memory_capacity: int = 3

    def __post_init__(self) -> None:
        if self.max_loops < 1:
            raise ConfigError(f"max_loops must be >= 1, got {self.max_loops}")
        if self.memory_capacity < 1:
            raise ConfigError(f"memory_capacity must be >= 1, got {self.memory_capacity}")


@dataclass
class AppConfig:
    ranking: list[str]
    weights: ParameterWeights
    thresholds: tuple[int, int]
    profiles: dict[str, LlmProfile]
    session: SessionSettings
    sandbox: SandboxPolicy
    input_limits: dict[str, int] = field(default_factory=dict)
    endpoints: dict[str, str] = field(default_factory=dict)
    tie_break: list[str] = field(default_factory=list)

    def input_limit(self, model: str) -> int | None:
        return self.input_limits.get(model)


def _neutral_profile(model_id: str, stability: float) -> LlmProfile:
    # Uncalibrated default: every model gets the equal-share weight.
    share = logistic_weight(1.0 / 3.0)
    return LlmProfile(model_id=model_id, reward_weight=share, time_weight=share, stability=stability)


def config_from_dict(data: dict) -> AppConfig:
    try:
        models = data.get("models", {})
        ranking = list(models.get("ranking", ["spark", "llama", "ernie"]))
        stability = {str(k): float(v) for k, v in models.get("stability", {}).items()}
        pw = data.get("parameter_weights", {})
        weights = ParameterWeights(
            length=float(pw.get("length", 0.001)),
            reward=float(pw.get("reward", 1.0)),
            time=float(pw.get("time", 1.0)),
            run_time=float(pw.get("run_time", 0.01)),
        )
        t1, t2 = data.get("length_thresholds", [95, 115])
        profiles: dict[str, LlmProfile] = {}
        for model_id, raw in data.get("profiles", {}).items():
            profiles[model_id] = LlmProfile(
                model_id=model_id,
                reward_weight=float(raw["reward_weight"]),
                time_weight=float(raw["time_weight"]),
                stability=float(raw.get("stability", stability.get(model_id, 0.9))),
            )
        for model_id in ranking:
            if model_id not in profiles:
                profiles[model_id] = _neutral_profile(model_id, stability.get(model_id, 0.9))
        session_raw = data.get("session", {})
        session = SessionSettings(
            max_loops=int(session_raw.get("max_loops", 5)),
            memory_capacity=int(session_raw.get("memory_capacity", 3)),
        )
        sandbox_raw = data.get("sandbox", {})
        sandbox = SandboxPolicy(
            per_case_timeout=float(sandbox_raw.get("per_case_timeout", 10.0)),
            total_timeout=float(sandbox_raw.get("total_timeout", 60.0)),
            output_byte_cap=int(sandbox_raw.get("output_byte_cap", 4096)),
            restrict=bool(sandbox_raw.get("restrict", True)),
        )
        return AppConfig(
            ranking=ranking,
            weights=weights,
            thresholds=(int(t1), int(t2)),
            profiles=profiles,
            session=session,
            sandbox=sandbox,
            input_limits={k: int(v) for k, v in models.get("input_limits", {}).items()},
            endpoints={str(k): str(v) for k, v in data.get("endpoints", {}).items()},
            tie_break=list(data.get("tie_break", sorted(ranking))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad configuration value: {exc}") from exc


def load_config(path: str | Path | None = None) -> AppConfig:
    """Load a config file, or the shipped defaults when path is None."""
    if path is None:
        text = resources.files("codemend").joinpath("data/default_config.json").read_text("utf-8")
    else:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        text = p.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def dump_profiles(profiles: dict[str, LlmProfile]) -> dict:
    """Profile map in the config file's profiles schema."""
    return {
        model_id: {
            "reward_weight": prof.reward_weight,
            "time_weight": prof.time_weight,
            "stability": prof.stability,
        }
        for model_id, prof in sorted(profiles.items())
    }
