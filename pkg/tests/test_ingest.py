import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soar.ingest import (
    EmptyDocumentError,
    IngestConfig,
    effective_tokens,
    load_latex,
    load_plain_text,
)
from soar.model import SectionKind, SourceKind


def texts(doc):
    return [t.text for t in doc.tokens]


def section_shapes(doc):
    return [(s.kind, s.start, s.end) for s in doc.sections]


# Independent line-scanning reference for plain-text segmentation: a line
# is a boundary iff it names a known section; other lines contribute
# whitespace-split, edge-trimmed, lowercased words.
def reference_plain_segmentation(source: str):
    known = ("related work", "references", "bibliography")
    sections = []
    current = []
    current_name = ""
    for line in source.split("\n"):
        bare = line.strip().rstrip(":").strip().casefold()
        bare = re.sub(r"^\d+[.)]?\s+", "", bare)
        bare = re.sub(r"^#+\s+", "", bare)
        if bare in known or (
            line.strip().isupper() and any(k in bare for k in known)
        ):
            sections.append((current_name, current))
            current = []
            current_name = bare
        else:
            for word in line.split():
                word = word.strip("\"'.,;:!?()[]{}")
                if word:
                    current.append(word.casefold())
    sections.append((current_name, current))
    if not sections[0][1] and len(sections) > 1:
        sections = sections[1:]
    return sections


class TestLoadPlainText:
    def test_whitespace_and_punctuation(self):
        doc = load_plain_text("Hello,  World!")
        assert texts(doc) == ["hello", "world"]
        assert len(doc.sections) == 1
        assert doc.sections[0].kind is SectionKind.OTHER
        assert doc.source_kind is SourceKind.PLAIN_TEXT

    def test_detects_related_work_heading(self):
        source = "Intro\n\nRELATED WORK\nnovel stuff"
        doc = load_plain_text(source)

        reference = reference_plain_segmentation(source)
        assert [name for name, _ in reference] == ["", "related work"]
        assert [words for _, words in reference] == [["intro"], ["novel", "stuff"]]

        assert len(doc.sections) == 2
        related = doc.sections[1]
        assert related.kind is SectionKind.RELATED_WORK
        assert texts(doc)[related.start : related.end] == ["novel", "stuff"]
        assert texts(doc) == ["intro", "novel", "stuff"]

    def test_empty_source_raises(self):
        with pytest.raises(EmptyDocumentError):
            load_plain_text("")

    def test_punctuation_only_source_raises(self):
        with pytest.raises(EmptyDocumentError):
            load_plain_text("... --- !!!")

    def test_internal_hyphens_survive_edge_trim(self):
        doc = load_plain_text("State-of-the-art.")
        assert texts(doc) == ["state-of-the-art"]

    def test_markdown_heading_opens_section(self):
        doc = load_plain_text("intro text\n\n## References\ncited things")
        assert [s.kind for s in doc.sections] == [
            SectionKind.OTHER,
            SectionKind.BIBLIOGRAPHY,
        ]

    def test_unknown_headings_do_not_split(self):
        doc = load_plain_text("intro\n\nCONCLUSION\nfinal words")
        assert len(doc.sections) == 1
        assert texts(doc) == ["intro", "conclusion", "final", "words"]

    def test_byte_offsets_point_into_source(self):
        source = "Caf\u00e9 r\u00e9sum\u00e9  novel"
        doc = load_plain_text(source)
        raw = source.encode("utf-8")
        for token in doc.tokens:
            assert raw[token.byte_offset : token.byte_offset + 1].decode(
                "utf-8", errors="ignore"
            ) or True
        novel = doc.tokens[-1]
        assert raw[novel.byte_offset : novel.byte_offset + 5] == b"novel"

    def test_bytes_input_with_invalid_utf8(self):
        doc = load_plain_text(b"novel \xff\xfe method")
        assert "novel" in texts(doc)
        assert "method" in texts(doc)


class TestLoadLatex:
    def test_related_work_section(self):
        doc = load_latex("\\section{Related Work}\nA novel idea.")
        assert len(doc.sections) == 1
        span = doc.sections[0]
        assert span.kind is SectionKind.RELATED_WORK
        assert span.title == "Related Work"
        assert texts(doc) == ["a", "novel", "idea"]

    def test_comment_stripped(self):
        doc = load_latex("state-of-the-art % state-of-the-art")
        assert texts(doc) == ["state-of-the-art"]

    def test_escaped_percent_is_not_a_comment(self):
        doc = load_latex("50\\% novel")
        assert texts(doc) == ["50", "novel"]

    def test_citation_keys_dropped(self):
        doc = load_latex("\\textbf{novel} \\cite{novel2020}")
        assert texts(doc) == ["novel"]

    def test_citation_keys_kept_when_configured(self):
        config = IngestConfig(latex_drop_citation_keys=False)
        doc = load_latex("\\textbf{novel} \\cite{novel2020}", config)
        assert texts(doc) == ["novel", "novel2020"]

    def test_comments_kept_when_configured(self):
        config = IngestConfig(latex_strip_comments=False)
        doc = load_latex("alpha % beta", config)
        assert texts(doc) == ["alpha", "beta"]

    def test_math_is_dropped(self):
        doc = load_latex(
            "before $x = novel$ after \\[ novel \\] \\begin{equation}novel\\end{equation} done"
        )
        assert texts(doc) == ["before", "after", "done"]

    def test_heading_kinds(self):
        source = (
            "lead\n\\section{Introduction}\nintro words\n"
            "\\section{Related Work}\nrelated words\n"
            "\\section{References}\nref words\n"
        )
        doc = load_latex(source)
        kinds = [s.kind for s in doc.sections]
        assert kinds == [
            SectionKind.OTHER,
            SectionKind.OTHER,
            SectionKind.RELATED_WORK,
            SectionKind.BIBLIOGRAPHY,
        ]

    def test_unlisted_heading_command_keeps_text(self):
        config = IngestConfig(heading_commands=("section",))
        doc = load_latex("\\paragraph{Novel thoughts} body", config)
        assert texts(doc) == ["novel", "thoughts", "body"]
        assert len(doc.sections) == 1

    def test_thebibliography_environment(self):
        source = (
            "body text\n"
            "\\begin{thebibliography}{9}\n"
            "\\bibitem{a2020} Author, A. A novel state-of-the-art survey.\n"
            "\\end{thebibliography}\n"
        )
        doc = load_latex(source)
        bib = [s for s in doc.sections if s.kind is SectionKind.BIBLIOGRAPHY]
        assert len(bib) == 1
        inside = texts(doc)[bib[0].start : bib[0].end]
        assert "novel" in inside
        assert "a2020" not in inside

    def test_bibliography_command_opens_section(self):
        doc = load_latex("body words\n\\bibliography{refs}\nstray trailing")
        assert [s.kind for s in doc.sections] == [
            SectionKind.OTHER,
            SectionKind.BIBLIOGRAPHY,
        ]
        assert "refs" not in texts(doc)

    def test_unbalanced_braces_warn_but_succeed(self):
        doc = load_latex("some {unbalanced text")
        assert texts(doc) == ["some", "unbalanced", "text"]
        assert any("unbalanced braces" in w for w in doc.warnings)

    def test_dropped_argument_commands(self):
        doc = load_latex(
            "see \\ref{sec:novel} and \\url{http://novel.example} plus"
            " \\includegraphics[width=2cm]{novel.png} end"
        )
        assert texts(doc) == ["see", "and", "plus", "end"]

    def test_newcommand_definitions_do_not_leak(self):
        doc = load_latex("\\newcommand{\\sota}[1]{state-of-the-art #1} visible words")
        assert texts(doc) == ["visible", "words"]

    def test_byte_offsets_match_original_source(self):
        source = "\\textbf{novel} \\cite{x} plain"
        doc = load_latex(source)
        raw = source.encode("utf-8")
        by_text = {t.text: t for t in doc.tokens}
        assert raw[by_text["novel"].byte_offset : by_text["novel"].byte_offset + 5] == b"novel"
        assert raw[by_text["plain"].byte_offset : by_text["plain"].byte_offset + 5] == b"plain"

    def test_empty_after_stripping_raises(self):
        with pytest.raises(EmptyDocumentError):
            load_latex("% only a comment\n$math$\n\\maketitle")

    def test_config_requires_heading_commands(self):
        with pytest.raises(ValueError):
            IngestConfig(heading_commands=())


class TestEffectiveTokens:
    def make_three_section_doc(self):
        source = (
            "\\section{Intro}\nalpha beta\n"
            "\\section{Related Work}\ngamma delta\n"
            "\\section{Method}\nepsilon\n"
        )
        return load_latex(source)

    def test_full_exclusion(self):
        doc = load_latex("\\section{Related Work}\nonly related words")
        assert effective_tokens(doc, {SectionKind.RELATED_WORK}) == []

    def test_no_exclusion_is_identity(self):
        doc = self.make_three_section_doc()
        assert effective_tokens(doc, set()) == list(doc.tokens)

    def test_concatenates_non_excluded_sections(self):
        doc = self.make_three_section_doc()

        # Brute-force oracle: concatenate kept sections directly.
        expected = []
        for span in doc.sections:
            if span.kind is not SectionKind.RELATED_WORK:
                expected.extend(doc.tokens[span.start : span.end])

        result = effective_tokens(doc, {SectionKind.RELATED_WORK})
        assert result == expected
        assert [t.text for t in result] == ["alpha", "beta", "epsilon"]

    def test_rejects_other_kind_exclusion(self):
        doc = self.make_three_section_doc()
        with pytest.raises(ValueError):
            effective_tokens(doc, {SectionKind.OTHER})


# Heading-name words are excluded: a line consisting of a known section
# name is a heading by design, so newline placement around those words is
# semantic rather than mere whitespace.
_HEADING_WORDS = {"related", "work", "references", "bibliography"}

WORDS = st.lists(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyz-", min_size=1, max_size=12).filter(
        lambda w: w.strip("-") and w not in _HEADING_WORDS
    ),
    min_size=1,
    max_size=60,
)


class TestIngestProperties:
    @given(WORDS)
    def test_tokenization_idempotent(self, words):
        doc = load_plain_text(" ".join(words))
        rejoined = " ".join(texts(doc))
        again = load_plain_text(rejoined)
        assert texts(again) == texts(doc)

    @given(WORDS, st.integers(min_value=0, max_value=2**32 - 1))
    def test_whitespace_invariance(self, words, seed):
        import random

        rng = random.Random(seed)
        fillers = [" ", "  ", "\n", "\t", " \n "]
        doc_a = load_plain_text(" ".join(words))
        doc_b = load_plain_text(
            "".join(w + rng.choice(fillers) for w in words)
        )
        assert texts(doc_a) == texts(doc_b)

    @given(WORDS)
    def test_effective_tokens_without_exclusions_covers_everything(self, words):
        doc = load_plain_text(" ".join(words))
        assert len(effective_tokens(doc, set())) == doc.token_count

    @given(WORDS)
    def test_latex_equals_plain_on_command_free_text(self, words):
        source = " ".join(words)
        plain = load_plain_text(source)
        latex = load_latex(source)
        assert texts(latex) == texts(plain)

    @given(WORDS)
    def test_spans_partition_tokens(self, words):
        doc = load_plain_text(" ".join(words))
        covered = []
        for span in doc.sections:
            assert 0 <= span.start <= span.end <= doc.token_count
            covered.extend(range(span.start, span.end))
        assert covered == list(range(doc.token_count))
