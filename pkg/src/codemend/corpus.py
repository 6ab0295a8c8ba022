"""Task corpus loading and length statistics.

The corpus is line-delimited JSON, one record per task: an error code to
repair plus two tiers of assert lists. Loads are all-or-nothing; any
malformed line fails the whole file with its line number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .sandbox import TestCase, Tier

REQUIRED_FIELDS = ("task_id", "description", "error_code", "test_list", "challenge_test_list")


class CorpusError(Exception):
    """Base class for corpus problems."""


class ParseError(CorpusError):
    """A line is not valid JSON."""


class SchemaError(CorpusError):
    """A record is missing or violates a field contract."""


class EmptyCorpus(CorpusError):
    """Statistics requested over zero tasks."""


@dataclass(frozen=True)
class TaskRecord:
    task_id: str
    description: str
    error_code: str
    test_list: tuple[str, ...]
    challenge_test_list: tuple[str, ...]

    def basic_cases(self) -> list[TestCase]:
        return [TestCase(expr, Tier.BASIC) for expr in self.test_list]

    def challenge_cases(self) -> list[TestCase]:
        return [TestCase(expr, Tier.CHALLENGE) for expr in self.challenge_test_list]

    def all_cases(self) -> list[TestCase]:
        return self.basic_cases() + self.challenge_cases()

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "description": self.description,
            "error_code": self.error_code,
            "test_list": list(self.test_list),
            "challenge_test_list": list(self.challenge_test_list),
        }


def _validate_record(data: dict, line_no: int) -> TaskRecord:
    for name in REQUIRED_FIELDS:
        if name not in data:
            raise SchemaError(f"line {line_no}: missing field {name!r}")
    if not isinstance(data["task_id"], str) or not data["task_id"]:
        raise SchemaError(f"line {line_no}: task_id must be a non-empty string")
    if not isinstance(data["error_code"], str) or not data["error_code"]:
        raise SchemaError(f"line {line_no}: error_code must be non-empty")
    if not isinstance(data["test_list"], list) or not data["test_list"]:
        raise SchemaError(f"line {line_no}: test_list must be a non-empty list")
    if not isinstance(data["challenge_test_list"], list):
        raise SchemaError(f"line {line_no}: challenge_test_list must be a list")
    for tier_name in ("test_list", "challenge_test_list"):
        for expr in data[tier_name]:
            if not isinstance(expr, str) or not expr.lstrip().startswith("assert"):
                raise SchemaError(
                    f"line {line_no}: {tier_name} entry must start with assert: {expr!r}"
                )
    return TaskRecord(
        task_id=data["task_id"],
        description=str(data.get("description", "")),
        error_code=data["error_code"],
        test_list=tuple(data["test_list"]),
        challenge_test_list=tuple(data["challenge_test_list"]),
    )


def parse_corpus(text: str) -> list[TaskRecord]:
    """Parse corpus JSONL; reject everything if any line is bad."""
    records: list[TaskRecord] = []
    seen: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {line_no}: not valid JSON ({exc.msg})") from exc
        record = _validate_record(data, line_no)
        if record.task_id in seen:
            raise SchemaError(f"line {line_no}: duplicate task_id {record.task_id!r}")
        seen.add(record.task_id)
        records.append(record)
    return records


def load_corpus(path: str | Path) -> list[TaskRecord]:
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    return parse_corpus(path.read_text(encoding="utf-8"))


def load_mini_corpus() -> list[TaskRecord]:
    """The hand-validated mini corpus shipped with the package."""
    text = resources.files("codemend").joinpath("data/mini_corpus.jsonl").read_text("utf-8")
    return parse_corpus(text)


def percentile_nearest_rank(sorted_values: list[int], q: float) -> int:
    """Nearest-rank percentile over pre-sorted values (rank = ceil(q*n))."""
    if not sorted_values:
        raise EmptyCorpus("no values")
    n = len(sorted_values)
    rank = max(1, math.ceil(q * n))
    return sorted_values[min(rank, n) - 1]


@dataclass(frozen=True)
class LengthDistribution:
    histogram: dict[str, int]
    thresholds: tuple[int, int]
    bin_width: int


def length_distribution(corpus: list[TaskRecord], bin_width: int = 100) -> LengthDistribution:
    """Character-length histogram plus the (p33, p66) routing thresholds."""
    if not corpus:
        raise EmptyCorpus("cannot compute a length distribution over zero tasks")
    lengths = sorted(len(t.error_code) for t in corpus)
    histogram: dict[str, int] = {}
    for length in lengths:
        lo = (length // bin_width) * bin_width
        label = f"{lo}-{lo + bin_width - 1}"
        histogram[label] = histogram.get(label, 0) + 1
    p33 = percentile_nearest_rank(lengths, 0.33)
    p66 = percentile_nearest_rank(lengths, 0.66)
    return LengthDistribution(histogram=histogram, thresholds=(p33, p66), bin_width=bin_width)
