"""Turn raw manuscript sources (plain text or LaTeX) into Documents.

The LaTeX path is a lexical pass, not a TeX engine: comments, math, and
markup are blanked out with equal-length whitespace so every surviving
character keeps its original position.  Token byte offsets therefore
always point into the unmodified source, which is what page overlays
need for highlighting.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass

from .model import (
    Document,
    SectionKind,
    SectionSpan,
    SourceKind,
    Token,
    classify_section_title,
)


class EmptyDocumentError(ValueError):
    """The source produced zero tokens."""


@dataclass(frozen=True)
class IngestConfig:
    """Knobs for the LaTeX lexical pass."""

    latex_strip_comments: bool = True
    latex_drop_citation_keys: bool = True
    heading_commands: tuple[str, ...] = ("section", "section*", "subsection", "chapter")

    def __post_init__(self) -> None:
        if not self.heading_commands:
            raise ValueError("heading_commands must be non-empty")


_WORD_RE = re.compile(r"\S+")
_LINE_RE = re.compile(r"[^\n]*\n?")

# Edge trim set: ASCII punctuation plus the usual typographic suspects.
_EDGE_PUNCT = string.punctuation + "\u2018\u2019\u201c\u201d\u00ab\u00bb\u2039\u203a\u201a\u201e\u2026\u2010\u2011\u2012\u2013\u2014\u2015\u2212\u00b7\u2022\u00bf\u00a1\u00a7\u00b6\u2020\u2021\u00b0\u2032\u2033"

_SECTION_NAMES = frozenset({"related work", "references", "bibliography"})
_MARKDOWN_HEADING_RE = re.compile(r"^#{1,6}\s+")
_NUMBERING_RE = re.compile(r"^(?:[0-9]+(?:\.[0-9]+)*|[ivxlcdm]+)[.):]?\s+", re.IGNORECASE)


def _plain_heading(line: str) -> tuple[str, SectionKind] | None:
    """Classify a line as a section heading, or return None.

    Only headings naming a known section (related work / references /
    bibliography) open spans; every other line is ordinary text.
    """
    stripped = line.strip()
    if not stripped:
        return None
    title: str | None = None
    md = _MARKDOWN_HEADING_RE.match(stripped)
    if md:
        title = stripped[md.end() :].strip()
    elif stripped == stripped.upper() and any(c.isalpha() for c in stripped):
        title = stripped
    else:
        bare = _NUMBERING_RE.sub("", stripped.rstrip(":").strip())
        if bare.casefold() in _SECTION_NAMES:
            title = stripped
    if title is None:
        return None
    folded = _NUMBERING_RE.sub("", title.rstrip(":")).strip().casefold()
    if "related work" in folded:
        return title, SectionKind.RELATED_WORK
    if "references" in folded or "bibliography" in folded:
        return title, SectionKind.BIBLIOGRAPHY
    return None


def _coerce_text(source: str | bytes) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8", errors="replace")
    return source


def _tokenize_region(text: str, offset: int, out: list[tuple[str, int]]) -> None:
    """Append (casefolded token, char position) pairs found in text."""
    for match in _WORD_RE.finditer(text):
        raw = match.group()
        left = raw.lstrip(_EDGE_PUNCT)
        core = left.rstrip(_EDGE_PUNCT)
        if not core:
            continue
        start = offset + match.start() + (len(raw) - len(left))
        out.append((core.casefold(), start))


def _char_to_byte_offsets(source: str, char_positions: list[int]) -> list[int]:
    """Convert sorted char positions into byte offsets into source."""
    if source.isascii():
        return char_positions
    offsets = []
    byte_pos = 0
    char_pos = 0
    for target in char_positions:
        byte_pos += len(source[char_pos:target].encode("utf-8"))
        char_pos = target
        offsets.append(byte_pos)
    return offsets


def _build_document(
    visible_text: str,
    raw_source: str,
    heading_events: list[tuple[int, str, SectionKind]],
    source_kind: SourceKind,
    origin: str | None,
    warnings: tuple[str, ...] = (),
) -> Document:
    """Shared back end: line-scan visible_text, merge heading events,
    assign tokens to spans, and map offsets back into raw_source."""
    events = list(heading_events)
    pieces: list[tuple[str, int]] = []
    for line_match in _LINE_RE.finditer(visible_text):
        line = line_match.group()
        if not line:
            continue
        heading = _plain_heading(line)
        if heading is not None:
            title, kind = heading
            events.append((line_match.start(), title, kind))
        else:
            _tokenize_region(line, line_match.start(), pieces)

    if not pieces:
        raise EmptyDocumentError("source contains zero tokens")

    byte_offsets = _char_to_byte_offsets(raw_source, [pos for _, pos in pieces])
    tokens = tuple(
        Token(text=text, byte_offset=boff)
        for (text, _), boff in zip(pieces, byte_offsets)
    )

    events.sort(key=lambda e: e[0])
    positions = [pos for _, pos in pieces]
    spans: list[SectionSpan] = []
    boundaries: list[tuple[int, str, SectionKind]] = []
    for char_pos, title, kind in events:
        boundaries.append((_bisect_positions(positions, char_pos), title, kind))

    if not boundaries or boundaries[0][0] > 0:
        first_end = boundaries[0][0] if boundaries else len(tokens)
        spans.append(SectionSpan(title="", kind=SectionKind.OTHER, start=0, end=first_end))
    for i, (start_idx, title, kind) in enumerate(boundaries):
        end_idx = boundaries[i + 1][0] if i + 1 < len(boundaries) else len(tokens)
        spans.append(SectionSpan(title=title, kind=kind, start=start_idx, end=end_idx))

    return Document(
        tokens=tokens,
        sections=tuple(spans),
        source_kind=source_kind,
        origin=origin,
        warnings=warnings,
    )


def _bisect_positions(positions: list[int], char_pos: int) -> int:
    """Index of the first token at or after char_pos."""
    lo, hi = 0, len(positions)
    while lo < hi:
        mid = (lo + hi) // 2
        if positions[mid] < char_pos:
            lo = mid + 1
        else:
            hi = mid
    return lo


def load_plain_text(source: str | bytes, *, origin: str | None = None) -> Document:
    """Tokenize plain text, opening sections at known heading lines."""
    text = _coerce_text(source)
    return _build_document(text, text, [], SourceKind.PLAIN_TEXT, origin)


def load_abstract(source: str | bytes, *, origin: str | None = None) -> Document:
    """Tokenize an abstract; same rules as plain text, tagged AbstractOnly."""
    text = _coerce_text(source)
    return _build_document(text, text, [], SourceKind.ABSTRACT_ONLY, origin)


# --- LaTeX lexical pass -------------------------------------------------

_MATH_ENVS = (
    "equation",
    "align",
    "alignat",
    "flalign",
    "eqnarray",
    "gather",
    "multline",
    "displaymath",
    "math",
)

# Commands whose arguments carry no prose: blanked together with their args.
_DROP_ARG_COMMANDS = frozenset(
    {
        "label",
        "ref",
        "eqref",
        "pageref",
        "autoref",
        "cref",
        "Cref",
        "vref",
        "url",
        "input",
        "include",
        "includegraphics",
        "includepdf",
        "usepackage",
        "RequirePackage",
        "documentclass",
        "bibliographystyle",
        "graphicspath",
        "setcounter",
        "addtocounter",
        "setlength",
        "addtolength",
        "vspace",
        "hspace",
        "newcommand",
        "renewcommand",
        "providecommand",
        "newenvironment",
        "renewenvironment",
        "newtheorem",
        "DeclareMathOperator",
        "definecolor",
        "hypersetup",
        "pagestyle",
        "thispagestyle",
        "epigraph",
        "bibitem",
    }
)

_DOLLAR_DISPLAY_RE = re.compile(r"(?<!\\)\$\$.*?(?<!\\)\$\$", re.DOTALL)
_DOLLAR_INLINE_RE = re.compile(r"(?<!\\)\$[^$]*?(?<!\\)\$", re.DOTALL)
_BRACKET_MATH_RE = re.compile(r"\\\[.*?\\\]|\\\(.*?\\\)", re.DOTALL)
_COMMAND_RE = re.compile(r"\\([a-zA-Z@]+)(\*?)")
_CONTROL_SYMBOL_RE = re.compile(r"\\[^a-zA-Z@\s]")
_LABEL_IN_TITLE_RE = re.compile(r"\\label\{[^{}]*\}")


class _Masker:
    """Equal-length whitespace masking over a mutable char buffer."""

    def __init__(self, text: str):
        self.chars = list(text)

    def blank(self, start: int, end: int) -> None:
        for i in range(start, end):
            if self.chars[i] != "\n":
                self.chars[i] = " "

    def text(self) -> str:
        return "".join(self.chars)


def _unescaped_percent(line: str) -> int | None:
    search_from = 0
    while True:
        idx = line.find("%", search_from)
        if idx < 0:
            return None
        backslashes = 0
        j = idx - 1
        while j >= 0 and line[j] == "\\":
            backslashes += 1
            j -= 1
        if backslashes % 2 == 0:
            return idx
        search_from = idx + 1


def _strip_comments(text: str) -> str:
    out_lines = []
    for line in text.split("\n"):
        cut = _unescaped_percent(line)
        if cut is not None:
            line = line[:cut] + " " * (len(line) - cut)
        out_lines.append(line)
    return "\n".join(out_lines)


def _find_balanced_brace(text: str, open_idx: int) -> int | None:
    """Given text[open_idx] == '{', return the index of its matching '}'."""
    depth = 0
    i = open_idx
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return None


def _consume_arguments(text: str, pos: int, max_groups: int = 3) -> int:
    """Skip past immediately adjacent [..] and {..} groups starting at pos.

    Adjacency (no blank between groups) keeps a following prose group,
    e.g. "\\cite{x} {text}", out of the consumed arguments.  Returns the
    first index after the consumed groups.
    """
    n = len(text)
    groups = 0
    while pos < n and groups < max_groups:
        if text[pos] == "[":
            close = text.find("]", pos + 1)
            if close < 0:
                break
            pos = close + 1
            groups += 1
        elif text[pos] == "{":
            close = _find_balanced_brace(text, pos)
            if close is None:
                break
            pos = close + 1
            groups += 1
        else:
            break
    return pos


def _clean_title(raw: str) -> str:
    title = _LABEL_IN_TITLE_RE.sub("", raw)
    title = _COMMAND_RE.sub(" ", title)
    title = title.replace("{", " ").replace("}", " ")
    return " ".join(title.split())


def load_latex(
    source: str | bytes,
    config: IngestConfig | None = None,
    *,
    origin: str | None = None,
) -> Document:
    """Tokenize LaTeX source without compiling it.

    Comments and math are dropped, sectioning commands become section
    boundaries, citation keys are discarded, and the visible text of all
    other commands is kept.  Unbalanced braces are reported as a Document
    warning, never a failure.
    """
    raw = _coerce_text(source)
    cfg = config or IngestConfig()
    warnings: list[str] = []

    text = _strip_comments(raw) if cfg.latex_strip_comments else raw

    open_braces = len(re.findall(r"(?<!\\)\{", text))
    close_braces = len(re.findall(r"(?<!\\)\}", text))
    if open_braces != close_braces:
        warnings.append(
            f"unbalanced braces: {open_braces} opening vs {close_braces} closing"
        )

    masker = _Masker(text)

    # Math environments, then display/inline math.
    env_alt = "|".join(_MATH_ENVS)
    env_open_re = re.compile(r"\\begin\{(" + env_alt + r")\*?\}")
    snapshot = masker.text()
    for m in env_open_re.finditer(snapshot):
        env = m.group(1)
        end_re = re.compile(r"\\end\{" + re.escape(env) + r"\*?\}")
        end_m = end_re.search(snapshot, m.end())
        if end_m:
            masker.blank(m.start(), end_m.end())
        else:
            warnings.append(f"unclosed math environment {env!r}")
            masker.blank(m.start(), len(snapshot))

    snapshot = masker.text()
    for pattern in (_BRACKET_MATH_RE, _DOLLAR_DISPLAY_RE, _DOLLAR_INLINE_RE):
        for m in pattern.finditer(snapshot):
            masker.blank(m.start(), m.end())
        snapshot = masker.text()

    # thebibliography environment: markers blanked, content becomes a
    # Bibliography section; text after \end{thebibliography} reverts.
    heading_events: list[tuple[int, str, SectionKind]] = []
    for m in re.finditer(r"\\begin\{thebibliography\}(\{[^{}]*\})?", snapshot):
        heading_events.append((m.start(), "References", SectionKind.BIBLIOGRAPHY))
        masker.blank(m.start(), m.end())
    for m in re.finditer(r"\\end\{thebibliography\}", snapshot):
        heading_events.append((m.end(), "", SectionKind.OTHER))
        masker.blank(m.start(), m.end())
    snapshot = masker.text()

    # Command walk: headings, citations, drop-arg commands, begin/end
    # markers, then generic command names.
    allowed_headings = set(cfg.heading_commands)
    for m in _COMMAND_RE.finditer(snapshot):
        if masker.chars[m.start()] != "\\":
            continue  # inside an already-blanked argument
        name, star = m.group(1), m.group(2)
        name_with_star = name + star
        after = m.end()

        if name_with_star in allowed_headings:
            k = after
            while k < len(snapshot) and snapshot[k] in " \t":
                k += 1
            if k < len(snapshot) and snapshot[k] == "[":
                close = snapshot.find("]", k + 1)
                if close >= 0:
                    k = close + 1
                    while k < len(snapshot) and snapshot[k] in " \t":
                        k += 1
            if k < len(snapshot) and snapshot[k] == "{":
                close = _find_balanced_brace(snapshot, k)
                if close is None:
                    title = _clean_title(snapshot[k + 1 : k + 81])
                    heading_events.append(
                        (m.start(), title, classify_section_title(title))
                    )
                    masker.blank(m.start(), len(snapshot))
                    break
                title = _clean_title(snapshot[k + 1 : close])
                heading_events.append((m.start(), title, classify_section_title(title)))
                masker.blank(m.start(), close + 1)
            else:
                masker.blank(m.start(), after)
            continue

        if name == "bibliography":
            end = _consume_arguments(snapshot, after, max_groups=1)
            heading_events.append((m.start(), "References", SectionKind.BIBLIOGRAPHY))
            masker.blank(m.start(), end)
            continue

        if "cite" in name.casefold() and cfg.latex_drop_citation_keys:
            end = _consume_arguments(snapshot, after)
            masker.blank(m.start(), end)
            continue

        if name == "href":
            k = after
            while k < len(snapshot) and snapshot[k] in " \t":
                k += 1
            if k < len(snapshot) and snapshot[k] == "{":
                close = _find_balanced_brace(snapshot, k)
                if close is not None:
                    masker.blank(m.start(), close + 1)
                    continue
            masker.blank(m.start(), after)
            continue

        if name in _DROP_ARG_COMMANDS:
            end = _consume_arguments(snapshot, after)
            masker.blank(m.start(), end)
            continue

        if name in ("begin", "end"):
            end = _consume_arguments(snapshot, after, max_groups=2)
            masker.blank(m.start(), end)
            continue

        # Generic command: drop the name, keep whatever braces follow.
        masker.blank(m.start(), after)

    snapshot = masker.text()
    for m in _CONTROL_SYMBOL_RE.finditer(snapshot):
        masker.blank(m.start(), m.start() + 1)

    visible = masker.text().replace("{", " ").replace("}", " ").replace("~", " ")

    return _build_document(
        visible,
        raw,
        heading_events,
        SourceKind.LATEX_SOURCE,
        origin,
        tuple(warnings),
    )


def effective_tokens(
    doc: Document, excluded_kinds: frozenset[SectionKind] | set[SectionKind]
) -> list[Token]:
    """Tokens of all sections whose kind is not excluded, in order."""
    allowed = {SectionKind.RELATED_WORK, SectionKind.BIBLIOGRAPHY}
    bad = set(excluded_kinds) - allowed
    if bad:
        raise ValueError(f"cannot exclude section kinds: {sorted(k.value for k in bad)}")
    out: list[Token] = []
    for span in doc.sections:
        if span.kind not in excluded_kinds:
            out.extend(doc.tokens[span.start : span.end])
    return out
