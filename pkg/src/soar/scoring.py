"""Scoring, recommendation, submission filtering, and score succession.

The score is the cube root of sota_count squared times novel_count: the
squared factor weights the state-of-the-art count twice, and a zero in
either count zeroes the whole score.  Display strings carry a cosmetic
"/10" suffix and are never clamped.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .model import Recommendation, SoarScore, TermCountReport, Verdict, _cube_root

DEFAULT_THRESHOLD = 5.0


def format_display(value: float) -> str:
    """Render a score with one decimal digit, half-up, plus the suffix."""
    quantized = Decimal(str(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return f"{quantized}/10"


def soar_score(counts: TermCountReport) -> SoarScore:
    """Combine the term counts into the scalar score and its display string."""
    product = counts.sota_count * counts.sota_count * counts.novel_count
    value = _cube_root(product)
    return SoarScore(value=value, display=format_display(value), counts=counts)


def recommend(score: SoarScore, threshold: float = DEFAULT_THRESHOLD) -> Recommendation:
    """Read iff the score reaches the threshold; ties read."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    verdict = Verdict.READ if score.value >= threshold else Verdict.DONT_READ
    return Recommendation(verdict=verdict, threshold=threshold, score_value=score.value)


@dataclass(frozen=True)
class ThresholdPolicy:
    """Accept every submission scoring at least min_score."""

    min_score: float

    def __post_init__(self) -> None:
        if self.min_score < 0:
            raise ValueError("min_score must be non-negative")


@dataclass(frozen=True)
class TopKPolicy:
    """Accept the k highest scores; earlier submission wins ties."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")


FilterPolicy = ThresholdPolicy | TopKPolicy


def filter_submissions(
    scored: Sequence[tuple[str, SoarScore]], policy: FilterPolicy
) -> list[str]:
    """Apply an acceptance policy to (id, score) pairs.

    Threshold mode preserves input order.  Top-k output is sorted by
    descending value, then input position; a k larger than the input
    returns everything.
    """
    ids = [sid for sid, _ in scored]
    if len(set(ids)) != len(ids):
        raise ValueError("submission ids must be unique")
    if isinstance(policy, ThresholdPolicy):
        return [sid for sid, score in scored if score.value >= policy.min_score]
    ranked = sorted(
        enumerate(scored), key=lambda item: (-item[1][1].value, item[0])
    )
    return [sid for _, (sid, _) in ranked[: policy.k]]


@dataclass(frozen=True)
class SuccessionEvent:
    """A submission that strictly beat every score before it."""

    index: int
    score_value: float


def sota_succession(chronological_scores: Iterable[float]) -> list[SuccessionEvent]:
    """Strict running-maximum positions of a chronological score history.

    The first entry is always an event; afterwards only values strictly
    above the current best qualify, so the next event depends only on the
    current best.
    """
    events: list[SuccessionEvent] = []
    best: float | None = None
    for index, value in enumerate(chronological_scores):
        if value < 0:
            raise ValueError(f"scores must be non-negative, got {value!r} at {index}")
        if best is None or value > best:
            events.append(SuccessionEvent(index=index, score_value=value))
            best = value
    return events
