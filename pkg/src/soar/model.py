"""Shared data model: documents, term counts, scores, and recommendations.

Every type here is an immutable dataclass, validated on construction and
safe to share across threads.  Serialization uses the same JSON key names
the HTTP service emits, so cached and served objects round-trip cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

RELATED_WORK_PHRASE = "related work"
BIBLIOGRAPHY_PHRASES = ("references", "bibliography")


class SourceKind(str, Enum):
    PLAIN_TEXT = "plain_text"
    LATEX_SOURCE = "latex_source"
    ABSTRACT_ONLY = "abstract_only"


class SectionKind(str, Enum):
    RELATED_WORK = "related_work"
    BIBLIOGRAPHY = "bibliography"
    OTHER = "other"


class Verdict(str, Enum):
    READ = "read"
    DONT_READ = "dont_read"


def classify_section_title(title: str) -> SectionKind:
    """Map a heading title to a section kind.

    A title naming related work always wins over the bibliography names,
    so the related-work rule stays an iff.
    """
    folded = title.casefold()
    if RELATED_WORK_PHRASE in folded:
        return SectionKind.RELATED_WORK
    if any(phrase in folded for phrase in BIBLIOGRAPHY_PHRASES):
        return SectionKind.BIBLIOGRAPHY
    return SectionKind.OTHER


@dataclass(frozen=True, slots=True)
class Token:
    """A single normalized word with its byte offset into the raw source."""

    text: str
    byte_offset: int

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("token text must be non-empty")
        if len(self.text.split()) != 1:
            raise ValueError(f"token text contains whitespace: {self.text!r}")
        if self.text != self.text.casefold():
            raise ValueError(f"token text not case-folded: {self.text!r}")
        if self.byte_offset < 0:
            raise ValueError("byte_offset must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {"text": self.text, "byte_offset": self.byte_offset}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Token":
        return cls(text=data["text"], byte_offset=data["byte_offset"])


@dataclass(frozen=True, slots=True)
class SectionSpan:
    """A half-open token range [start, end) belonging to one section."""

    title: str
    kind: SectionKind
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")
        is_related = RELATED_WORK_PHRASE in self.title.casefold()
        if is_related != (self.kind is SectionKind.RELATED_WORK):
            raise ValueError(
                f"section kind {self.kind.value!r} inconsistent with title {self.title!r}"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "kind": self.kind.value,
            "start": self.start,
            "end": self.end,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SectionSpan":
        return cls(
            title=data["title"],
            kind=SectionKind(data["kind"]),
            start=data["start"],
            end=data["end"],
        )


@dataclass(frozen=True)
class Document:
    """Normalized token stream plus section structure for one manuscript."""

    tokens: tuple[Token, ...]
    sections: tuple[SectionSpan, ...]
    source_kind: SourceKind
    origin: str | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "sections", tuple(self.sections))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        n = len(self.tokens)
        previous_end = 0
        for span in self.sections:
            if span.start < previous_end:
                raise ValueError("section spans overlap or are unsorted")
            if span.end > n:
                raise ValueError("section span exceeds token count")
            previous_end = span.end

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    def section_tokens(self, span: SectionSpan) -> tuple[Token, ...]:
        return self.tokens[span.start : span.end]

    def to_dict(self) -> dict[str, Any]:
        return {
            "tokens": [t.to_dict() for t in self.tokens],
            "sections": [s.to_dict() for s in self.sections],
            "source_kind": self.source_kind.value,
            "origin": self.origin,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Document":
        return cls(
            tokens=tuple(Token.from_dict(t) for t in data["tokens"]),
            sections=tuple(SectionSpan.from_dict(s) for s in data["sections"]),
            source_kind=SourceKind(data["source_kind"]),
            origin=data.get("origin"),
            warnings=tuple(data.get("warnings", ())),
        )


@dataclass(frozen=True, slots=True)
class SectionTermCounts:
    """Raw per-section term counts, indexed into Document.sections."""

    section: int
    sota: int
    novel: int

    def to_dict(self) -> dict[str, int]:
        return {"section": self.section, "sota": self.sota, "novel": self.novel}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SectionTermCounts":
        return cls(section=data["section"], sota=data["sota"], novel=data["novel"])


@dataclass(frozen=True)
class TermCountReport:
    """Headline and excluded term counts with per-section attribution."""

    sota_count: int
    novel_count: int
    excluded_sota: int = 0
    excluded_novel: int = 0
    per_section: tuple[SectionTermCounts, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_section", tuple(self.per_section))
        for name in ("sota_count", "novel_count", "excluded_sota", "excluded_novel"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "sota": self.sota_count,
            "novel": self.novel_count,
            "excluded_sota": self.excluded_sota,
            "excluded_novel": self.excluded_novel,
            "per_section": [row.to_dict() for row in self.per_section],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TermCountReport":
        return cls(
            sota_count=data["sota"],
            novel_count=data["novel"],
            excluded_sota=data.get("excluded_sota", 0),
            excluded_novel=data.get("excluded_novel", 0),
            per_section=tuple(
                SectionTermCounts.from_dict(row) for row in data.get("per_section", ())
            ),
        )


def _cube_root(product: int) -> float:
    """Cube root that is exact for perfect cubes (so (k, k) scores k)."""
    if product == 0:
        return 0.0
    guess = round(product ** (1.0 / 3.0))
    for candidate in (guess, guess - 1, guess + 1):
        if candidate >= 0 and candidate**3 == product:
            return float(candidate)
    return product ** (1.0 / 3.0)


@dataclass(frozen=True)
class SoarScore:
    """The scalar score, its display string, and the counts it came from."""

    value: float
    display: str
    counts: TermCountReport

    def __post_init__(self) -> None:
        if not self.display.endswith("/10"):
            raise ValueError(f"display must end with '/10': {self.display!r}")
        expected = _cube_root(
            self.counts.sota_count * self.counts.sota_count * self.counts.novel_count
        )
        tolerance = 1e-12 * max(1.0, abs(expected))
        if abs(self.value - expected) > tolerance:
            raise ValueError(
                f"score value {self.value!r} does not match counts "
                f"({self.counts.sota_count}, {self.counts.novel_count})"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "score": self.value,
            "display": self.display,
            "counts": self.counts.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SoarScore":
        return cls(
            value=data["score"],
            display=data["display"],
            counts=TermCountReport.from_dict(data["counts"]),
        )


@dataclass(frozen=True, slots=True)
class Recommendation:
    """Binary read/don't-read verdict with the threshold that produced it."""

    verdict: Verdict
    threshold: float
    score_value: float

    def __post_init__(self) -> None:
        should_read = self.score_value >= self.threshold
        if should_read != (self.verdict is Verdict.READ):
            raise ValueError(
                f"verdict {self.verdict.value} inconsistent with "
                f"score {self.score_value} and threshold {self.threshold}"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "recommendation": self.verdict.value,
            "threshold": self.threshold,
            "score": self.score_value,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Recommendation":
        return cls(
            verdict=Verdict(data["recommendation"]),
            threshold=data["threshold"],
            score_value=data["score"],
        )
