"""Shared fixtures: a fixture manuscript, recorded arXiv responses, and an
offline fake HTTP session so the whole suite runs with the network down."""

from __future__ import annotations

import gzip
import io
import tarfile
import time

import pytest
import requests

from soar.arxiv import ArxivClient

# Counts outside excluded sections: 8 state-of-the-art (7 hyphenated plus
# one spaced), 1 novel.  Related work holds 2 sota / 1 novel, the
# bibliography 1 sota / 1 novel; none of those may count.
FIXTURE_TEX = r"""\documentclass{article}
\usepackage{amsmath}
% Draft for testing. This comment is novel and state-of-the-art.
\begin{document}
\title{A Thoroughly Modern Method}
\maketitle

\begin{abstract}
We present a state-of-the-art method for automated assessment.
\end{abstract}

\section{Introduction}
Our approach is state-of-the-art and improves on the state of the art.
The identity $x = \text{state-of-the-art}$ carries no weight here.

\section{Related Work}
Prior novel work is state-of-the-art \cite{prior2019}.
Everyone cites state-of-the-art results and their novelty.

\section{Method}
A novel combination of five state-of-the-art tricks: state-of-the-art alpha,
state-of-the-art beta, state-of-the-art gamma, and state-of-the-art delta.

\subsection{Complexity}
Linear, obviously.

\section*{Acknowledgements}
Thanks to the benchmark maintainers.

\begin{thebibliography}{9}
\bibitem{prior2019} Prior, A. (2019). A novel state-of-the-art survey.
\end{thebibliography}
\end{document}
"""

FIXTURE_EFFECTIVE_SOTA = 8
FIXTURE_EFFECTIVE_NOVEL = 1
FIXTURE_DISPLAY = "4.0/10"

FULL_SOURCE_ID = "2001.12345"
PDF_ONLY_ID = "2001.99999"
MISSING_ID = "2001.00001"

PDF_ONLY_ABSTRACT = "A novel state-of-the-art method."


def atom_feed(arxiv_id: str, title: str, abstract: str) -> str:
    return f"""<?xml version="1.0" encoding="UTF-8"?>
<feed xmlns="http://www.w3.org/2005/Atom">
  <title type="html">ArXiv Query: id_list={arxiv_id}</title>
  <id>http://arxiv.org/api/fixture</id>
  <updated>2020-01-15T00:00:00-05:00</updated>
  <entry>
    <id>http://arxiv.org/abs/{arxiv_id}v1</id>
    <updated>2020-01-15T13:00:00Z</updated>
    <published>2020-01-15T13:00:00Z</published>
    <title>{title}</title>
    <summary>
      {abstract}
    </summary>
    <author><name>A. Researcher</name></author>
    <category term="cs.DL" scheme="http://arxiv.org/schemas/atom"/>
  </entry>
</feed>
"""


def empty_atom_feed() -> str:
    return """<?xml version="1.0" encoding="UTF-8"?>
<feed xmlns="http://www.w3.org/2005/Atom">
  <title type="html">ArXiv Query: id_list=unknown</title>
  <id>http://arxiv.org/api/fixture</id>
  <updated>2020-01-15T00:00:00-05:00</updated>
</feed>
"""


def make_targz(files: dict[str, str]) -> bytes:
    buffer = io.BytesIO()
    with tarfile.open(fileobj=buffer, mode="w:gz") as tar:
        for name, text in files.items():
            data = text.encode("utf-8")
            info = tarfile.TarInfo(name=name)
            info.size = len(data)
            tar.addfile(info, io.BytesIO(data))
    return buffer.getvalue()


def make_gz(text: str) -> bytes:
    return gzip.compress(text.encode("utf-8"))


class FakeResponse:
    def __init__(self, status_code=200, content=b"", headers=None):
        self.status_code = status_code
        self.content = content
        self.headers = headers or {}

    @property
    def text(self):
        return self.content.decode("utf-8", errors="replace")


class FakeSession:
    """Replays recorded responses; raises on anything unrouted."""

    def __init__(self):
        self.metadata: dict[str, FakeResponse | Exception] = {}
        self.sources: dict[str, FakeResponse | Exception] = {}
        self.calls: list[tuple[str, str, float]] = []

    def route_metadata(self, arxiv_id, response):
        self.metadata[arxiv_id] = response

    def route_source(self, arxiv_id, response):
        self.sources[arxiv_id] = response

    def get(self, url, params=None, timeout=None):
        if "api/query" in url:
            arxiv_id = (params or {}).get("id_list", "")
            self.calls.append(("metadata", arxiv_id, time.monotonic()))
            result = self.metadata.get(arxiv_id)
        elif "/e-print/" in url:
            arxiv_id = url.rsplit("/e-print/", 1)[1]
            self.calls.append(("source", arxiv_id, time.monotonic()))
            result = self.sources.get(arxiv_id)
        else:
            raise AssertionError(f"unexpected request URL: {url}")
        if result is None:
            raise AssertionError(f"no recorded response for {url}")
        if isinstance(result, Exception):
            raise result
        return result


@pytest.fixture
def fake_session():
    session = FakeSession()
    session.route_metadata(
        FULL_SOURCE_ID,
        FakeResponse(
            content=atom_feed(
                FULL_SOURCE_ID,
                "A Thoroughly Modern Method",
                "We present a state-of-the-art method for automated assessment.",
            ).encode("utf-8")
        ),
    )
    session.route_source(
        FULL_SOURCE_ID,
        FakeResponse(
            content=make_targz({"main.tex": FIXTURE_TEX, "notes.tex": "scratch"}),
            headers={"Content-Type": "application/gzip"},
        ),
    )
    session.route_metadata(
        PDF_ONLY_ID,
        FakeResponse(
            content=atom_feed(
                PDF_ONLY_ID, "An Opaque Artifact", PDF_ONLY_ABSTRACT
            ).encode("utf-8")
        ),
    )
    session.route_source(
        PDF_ONLY_ID,
        FakeResponse(
            content=b"%PDF-1.5 fixture bytes",
            headers={"Content-Type": "application/pdf"},
        ),
    )
    session.route_metadata(
        MISSING_ID, FakeResponse(content=empty_atom_feed().encode("utf-8"))
    )
    session.route_source(MISSING_ID, FakeResponse(status_code=404))
    return session


@pytest.fixture
def offline_client(fake_session, tmp_path):
    return ArxivClient(
        session=fake_session, cache_dir=tmp_path / "cache", min_interval=0.0
    )


@pytest.fixture
def timeout_session():
    session = FakeSession()
    session.route_metadata(FULL_SOURCE_ID, requests.Timeout("simulated timeout"))
    session.route_source(FULL_SOURCE_ID, requests.Timeout("simulated timeout"))
    return session
