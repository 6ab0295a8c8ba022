"""Model routing policy: reward bookkeeping, weight normalization and selection.

The policy scores each candidate model from calibrated profile weights plus
the live session signals (code length, accumulated run time, incumbent
model) and picks the argmax. Profiles come out of fixed-model benchmark
runs via :func:`calibrate_profiles`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class PolicyError(Exception):
    """Base class for policy failures."""


class NonPositiveInput(PolicyError):
    """Linear normalization requires strictly positive inputs."""


class InvalidThresholds(PolicyError):
    """Length thresholds must satisfy t1 < t2."""


class UnknownModel(PolicyError):
    """Ledger update for a model that was never registered."""


class EmptyProfiles(PolicyError):
    """Selection requires at least one model profile."""


class MismatchedCorpora(PolicyError):
    """Calibration reports must cover the same task set."""


# Reward deltas per test tier (pass reward, fail penalty).
BASIC_PASS_POINTS = 2.0
CHALLENGE_PASS_POINTS = 3.0
BASIC_FAIL_PENALTY = 0.5
CHALLENGE_FAIL_PENALTY = 0.2


@dataclass(frozen=True)
class LlmProfile:
    """Calibrated per-model weights feeding the selection score."""

    model_id: str
    reward_weight: float
    time_weight: float
    stability: float = 0.9

    def __post_init__(self) -> None:
        if not 0.0 <= self.reward_weight <= 1.0:
            raise PolicyError(f"reward_weight out of [0,1]: {self.reward_weight}")
        if not 0.0 <= self.time_weight <= 1.0:
            raise PolicyError(f"time_weight out of [0,1]: {self.time_weight}")
        if not 0.0 < self.stability <= 1.0:
            raise PolicyError(f"stability out of (0,1]: {self.stability}")


@dataclass(frozen=True)
class ParameterWeights:
    """Global term weights for the selection score."""

    length: float = 0.001
    reward: float = 1.0
    time: float = 1.0
    run_time: float = 0.01

    def __post_init__(self) -> None:
        values = (self.length, self.reward, self.time, self.run_time)
        if any(v < 0 for v in values):
            raise PolicyError(f"parameter weights must be non-negative: {values}")
        if not any(v > 0 for v in values):
            raise PolicyError("at least one parameter weight must be positive")


def normalize_linear(values: Sequence[float]) -> list[float]:
    """Normalize positive values to proportions that sum to 1.

    Order-preserving: a larger input maps to a larger output.
    """
    if not values:
        raise NonPositiveInput("cannot normalize an empty sequence")
    if any(v <= 0 for v in values):
        raise NonPositiveInput(f"all values must be > 0, got {list(values)}")
    total = sum(values)
    return [v / total for v in values]


def logistic_weight(x: float) -> float:
    """Squash a normalized share through a logistic centered at 0.5."""
    if not math.isfinite(x):
        raise PolicyError(f"logistic_weight needs a finite input, got {x}")
    return 1.0 / (1.0 + math.exp(-2.0 * (x - 0.5)))


@dataclass
class RewardLedger:
    """Per-model cumulative reward, elapsed time and loop-count bookkeeping.

    Scores change only through :meth:`apply_test_reward`; elapsed and loop
    histograms have their own recorders so replaying an outcome sequence
    reproduces the score exactly.
    """

    scores: dict[str, float] = field(default_factory=dict)
    elapsed: dict[str, float] = field(default_factory=dict)
    loop_histogram: dict[str, dict[int, int]] = field(default_factory=dict)

    def register(self, model_id: str) -> None:
        self.scores.setdefault(model_id, 0.0)
        self.elapsed.setdefault(model_id, 0.0)
        self.loop_histogram.setdefault(model_id, {})

    def apply_test_reward(self, model_id: str, basic_passed: bool, challenge_passed: bool) -> float:
        """Apply one test round's reward delta; returns the delta."""
        if model_id not in self.scores:
            raise UnknownModel(model_id)
        delta = BASIC_PASS_POINTS if basic_passed else -BASIC_FAIL_PENALTY
        delta += CHALLENGE_PASS_POINTS if challenge_passed else -CHALLENGE_FAIL_PENALTY
        self.scores[model_id] += delta
        return delta

    def add_elapsed(self, model_id: str, seconds: float) -> None:
        if model_id not in self.elapsed:
            raise UnknownModel(model_id)
        self.elapsed[model_id] += seconds

    def record_loops(self, model_id: str, loops: int) -> None:
        if model_id not in self.loop_histogram:
            raise UnknownModel(model_id)
        hist = self.loop_histogram[model_id]
        hist[loops] = hist.get(loops, 0) + 1

    def merge(self, other: "RewardLedger") -> None:
        """Fold another ledger shard in (bench aggregation)."""
        for model_id, score in other.scores.items():
            self.register(model_id)
            self.scores[model_id] += score
        for model_id, secs in other.elapsed.items():
            self.register(model_id)
            self.elapsed[model_id] += secs
        for model_id, hist in other.loop_histogram.items():
            self.register(model_id)
            mine = self.loop_histogram[model_id]
            for loops, count in hist.items():
                mine[loops] = mine.get(loops, 0) + count


def reward_delta(basic_passed: bool, challenge_passed: bool) -> float:
    """The per-round reward delta without touching a ledger."""
    delta = BASIC_PASS_POINTS if basic_passed else -BASIC_FAIL_PENALTY
    delta += CHALLENGE_PASS_POINTS if challenge_passed else -CHALLENGE_FAIL_PENALTY
    return delta


def initial_model_by_length(
    code_length: int,
    thresholds: tuple[int, int],
    ranking: Sequence[str],
) -> str:
    """Route by input size: short -> fastest, medium -> middle, long -> strongest.

    ``ranking`` is ordered fastest to strongest.
    """
    t1, t2 = thresholds
    if t1 >= t2:
        raise InvalidThresholds(f"need t1 < t2, got ({t1}, {t2})")
    if len(ranking) != 3:
        raise PolicyError(f"ranking needs exactly 3 models, got {len(ranking)}")
    if code_length <= t1:
        return ranking[0]
    if code_length <= t2:
        return ranking[1]
    return ranking[2]


def select_model(
    code_length: int,
    run_time: float,
    recent: str | None,
    profiles: Mapping[str, LlmProfile],
    weights: ParameterWeights,
    tie_break: Sequence[str] | None = None,
) -> str:
    """Pick the model with the highest composite score.

    Per model: length and run-time terms scale with the model's reward
    weight, the reward term adds, the time and run-time terms subtract.
    The incumbent's score is multiplied by its stability factor. Ties
    break by lexicographic model id, or by position in ``tie_break``
    when a custom order is configured.
    """
    if not profiles:
        raise EmptyProfiles("no model profiles configured")
    if run_time < 0:
        raise PolicyError(f"run_time must be >= 0, got {run_time}")

    if tie_break:
        order = {model_id: i for i, model_id in enumerate(tie_break)}
        resolution = sorted(profiles, key=lambda m: (order.get(m, len(order)), m))
    else:
        resolution = sorted(profiles)

    best_id: str | None = None
    best_score = -math.inf
    for model_id in resolution:
        prof = profiles[model_id]
        len_w = code_length * weights.length * prof.reward_weight
        rew_w = weights.reward * prof.reward_weight
        time_w = weights.time * prof.time_weight
        rt_w = weights.run_time * run_time * prof.reward_weight
        score = len_w + rew_w - time_w - rt_w
        if model_id == recent:
            score *= prof.stability
        if score > best_score:
            best_id = model_id
            best_score = score
    assert best_id is not None
    return best_id


def calibrate_profiles(
    cumulative_rewards: Mapping[str, float],
    average_times: Mapping[str, float],
    task_ids: Mapping[str, Iterable[str]],
    stability: Mapping[str, float] | float = 0.9,
) -> dict[str, LlmProfile]:
    """Derive per-model profiles from fixed-model benchmark totals.

    Reward and time shares are linearly normalized across models, then
    squashed through the logistic. All reports must cover the same task
    set; stability comes from configuration.
    """
    models = sorted(cumulative_rewards)
    if sorted(average_times) != models or sorted(task_ids) != models:
        raise MismatchedCorpora("reports do not cover the same model set")
    task_sets = {m: frozenset(task_ids[m]) for m in models}
    reference = task_sets[models[0]]
    for model_id, tasks in task_sets.items():
        if tasks != reference:
            raise MismatchedCorpora(
                f"report for {model_id} covers a different task set "
                f"({len(tasks)} vs {len(reference)} tasks)"
            )

    reward_shares = normalize_linear([cumulative_rewards[m] for m in models])
    time_shares = normalize_linear([average_times[m] for m in models])

    profiles: dict[str, LlmProfile] = {}
    for i, model_id in enumerate(models):
        stab = stability[model_id] if isinstance(stability, Mapping) else stability
        profiles[model_id] = LlmProfile(
            model_id=model_id,
            reward_weight=logistic_weight(reward_shares[i]),
            time_weight=logistic_weight(time_shares[i]),
            stability=stab,
        )
    return profiles
