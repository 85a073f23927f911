"""Count canonical "state-of-the-art" and "novel" occurrences.

Counting runs section by section: the headline counts are the sums over
non-excluded sections, matches inside excluded sections are tallied
separately, and a phrase never spans a section boundary.  That keeps the
counts invariant under reordering whole sections.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .model import Document, SectionKind, SectionTermCounts, TermCountReport, Token

SOTA_CANONICAL = "state-of-the-art"
SOTA_SEQUENCE = ("state", "of", "the", "art")
NOVEL_WORD = "novel"

# Unicode dashes folded to "-" before comparing against the canonical term.
_DASH_TRANSLATION = str.maketrans(
    {c: "-" for c in "‐‑‒–—―−"}
)

_NOVEL_MAX_LEN = 9
_NOVEL_STOP_PREFIXES = ("novelist", "novella")


class SotaVariants(str, Enum):
    HYPHENATED_ONLY = "hyphenated"
    HYPHENATED_AND_SPACED = "both"


class NovelMorphology(str, Enum):
    EXACT_WORD_ONLY = "exact"
    INCLUDE_DERIVED_FORMS = "derived"


DEFAULT_EXCLUDED_KINDS = frozenset({SectionKind.RELATED_WORK, SectionKind.BIBLIOGRAPHY})


@dataclass(frozen=True)
class MatchConfig:
    """Which term variants count and which section kinds are excluded."""

    sota_variants: SotaVariants = SotaVariants.HYPHENATED_AND_SPACED
    novel_morphology: NovelMorphology = NovelMorphology.EXACT_WORD_ONLY
    excluded_kinds: frozenset[SectionKind] = DEFAULT_EXCLUDED_KINDS

    def __post_init__(self) -> None:
        object.__setattr__(self, "excluded_kinds", frozenset(self.excluded_kinds))

    def cache_token(self) -> str:
        """Stable string form, used in cache keys."""
        kinds = ",".join(sorted(k.value for k in self.excluded_kinds))
        return f"{self.sota_variants.value}:{self.novel_morphology.value}:{kinds}"


def _texts(tokens: Sequence[Token] | Sequence[str]) -> list[str]:
    return [t.text if isinstance(t, Token) else t for t in tokens]


def count_sota(tokens: Sequence[Token] | Sequence[str], config: MatchConfig | None = None) -> int:
    """Non-overlapping matches of the canonical state-of-the-art term.

    Scans left to right; an overlapping candidate resolves to the
    earliest start.  Tokens must already be case-folded.
    """
    cfg = config or MatchConfig()
    spaced = cfg.sota_variants is SotaVariants.HYPHENATED_AND_SPACED
    texts = _texts(tokens)
    n = len(texts)
    count = 0
    i = 0
    while i < n:
        tok = texts[i]
        if tok.startswith("state"):
            if tok == SOTA_CANONICAL or tok.translate(_DASH_TRANSLATION) == SOTA_CANONICAL:
                count += 1
                i += 1
                continue
            if (
                spaced
                and tok == "state"
                and i + 4 <= n
                and texts[i + 1] == "of"
                and texts[i + 2] == "the"
                and texts[i + 3] == "art"
            ):
                count += 1
                i += 4
                continue
        i += 1
    return count


def count_novel(tokens: Sequence[Token] | Sequence[str], config: MatchConfig | None = None) -> int:
    """Occurrences of "novel", optionally with short derived forms."""
    cfg = config or MatchConfig()
    derived = cfg.novel_morphology is NovelMorphology.INCLUDE_DERIVED_FORMS
    count = 0
    for t in _texts(tokens):
        if t == NOVEL_WORD:
            count += 1
        elif (
            derived
            and len(t) <= _NOVEL_MAX_LEN
            and t.startswith(NOVEL_WORD)
            and not t.startswith(_NOVEL_STOP_PREFIXES)
        ):
            count += 1
    return count


def count_terms(doc: Document, config: MatchConfig | None = None) -> TermCountReport:
    """Count both terms per section and aggregate with exclusion bookkeeping."""
    cfg = config or MatchConfig()
    rows: list[SectionTermCounts] = []
    sota_in = novel_in = sota_ex = novel_ex = 0
    for index, span in enumerate(doc.sections):
        section_tokens = doc.tokens[span.start : span.end]
        sota = count_sota(section_tokens, cfg)
        novel = count_novel(section_tokens, cfg)
        rows.append(SectionTermCounts(section=index, sota=sota, novel=novel))
        if span.kind in cfg.excluded_kinds:
            sota_ex += sota
            novel_ex += novel
        else:
            sota_in += sota
            novel_in += novel
    return TermCountReport(
        sota_count=sota_in,
        novel_count=novel_in,
        excluded_sota=sota_ex,
        excluded_novel=novel_ex,
        per_section=tuple(rows),
    )
