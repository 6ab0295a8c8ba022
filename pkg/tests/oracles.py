"""Independent oracles the suites check implementations against."""

from __future__ import annotations

from decimal import Decimal, getcontext

getcontext().prec = 50


def logistic_oracle(x: float) -> float:
    """High-precision evaluation of 1 / (1 + e^(-2(x - 0.5)))."""
    exponent = Decimal(-2) * (Decimal(x) - Decimal("0.5"))
    return float(1 / (1 + exponent.exp()))


def brute_force_score(code_length, run_time, recent, prof, weights) -> float:
    score = (
        code_length * weights.length * prof.reward_weight
        + weights.reward * prof.reward_weight
        - weights.time * prof.time_weight
        - weights.run_time * run_time * prof.reward_weight
    )
    if prof.model_id == recent:
        score *= prof.stability
    return score


def brute_force_select(code_length, run_time, recent, profiles, weights) -> str:
    """Enumerate every per-model score, then argmax with lexicographic ties."""
    scores = {
        model_id: brute_force_score(code_length, run_time, recent, prof, weights)
        for model_id, prof in profiles.items()
    }
    best = max(scores.values())
    return min(m for m, s in scores.items() if s == best)
