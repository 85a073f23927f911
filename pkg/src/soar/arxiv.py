"""arXiv metadata/source fetching and end-to-end paper scoring.

All outbound requests funnel through a single minimum-interval gate
(default 3 seconds, matching arXiv's API courtesy guidance), and scored
papers land in a disk cache keyed by id, match configuration, threshold,
and code version so rule changes invalidate naturally.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import os
import re
import tarfile
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any
from xml.etree import ElementTree

import requests

from .ingest import EmptyDocumentError, IngestConfig, load_abstract, load_latex
from .matcher import MatchConfig, count_terms
from .model import Recommendation, SoarScore, TermCountReport
from .scoring import DEFAULT_THRESHOLD, recommend, soar_score

METADATA_URL = "https://export.arxiv.org/api/query"
SOURCE_URL = "https://arxiv.org/e-print/"
CACHE_DIR_ENV = "SOAR_CACHE_DIR"
DEFAULT_MIN_INTERVAL = 3.0
DEFAULT_CACHE_TTL = 7 * 24 * 3600.0

_ATOM_NS = {"atom": "http://www.w3.org/2005/Atom"}

# New-style (2007+) and legacy identifier grammars, optional version suffix.
_NEW_ID_RE = re.compile(r"^\d{4}\.\d{4,5}(v\d+)?$")
_LEGACY_ID_RE = re.compile(r"^[a-z][a-z-]*(\.[A-Z]{2})?/\d{7}(v\d+)?$")


class ArxivError(Exception):
    """Base class for arXiv client failures."""


class InvalidIdError(ArxivError):
    """The identifier matches neither arXiv grammar."""


class NotFoundError(ArxivError):
    """arXiv does not know the identifier."""


class RateLimitedError(ArxivError):
    """Upstream asked us to back off."""

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class NetworkError(ArxivError):
    """Transport-level failure talking to arXiv."""


class MetadataParseError(ArxivError):
    """The metadata response was not parseable Atom."""


class ArchiveError(ArxivError):
    """The e-print archive was corrupt."""


def is_valid_id(arxiv_id: str) -> bool:
    return bool(_NEW_ID_RE.match(arxiv_id) or _LEGACY_ID_RE.match(arxiv_id))


def validate_id(arxiv_id: str) -> str:
    if not is_valid_id(arxiv_id):
        raise InvalidIdError(f"not an arXiv identifier: {arxiv_id!r}")
    return arxiv_id


class ScoredFrom(str, Enum):
    FULL_SOURCE = "full_source"
    ABSTRACT_ONLY = "abstract_only"


@dataclass(frozen=True)
class ArxivPaperRef:
    """Identifier plus the metadata needed to score and label a paper."""

    id: str
    title: str
    abstract: str
    source_available: bool = True

    def __post_init__(self) -> None:
        validate_id(self.id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "arxiv_id": self.id,
            "title": self.title,
            "abstract": self.abstract,
            "source_available": self.source_available,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ArxivPaperRef":
        return cls(
            id=data["arxiv_id"],
            title=data["title"],
            abstract=data["abstract"],
            source_available=data["source_available"],
        )


@dataclass(frozen=True)
class ScoredPaper:
    """A paper, its score, and which text the score came from."""

    ref: ArxivPaperRef
    score: SoarScore
    recommendation: Recommendation
    scored_from: ScoredFrom
    fetched_at: datetime

    def __post_init__(self) -> None:
        if self.scored_from is ScoredFrom.ABSTRACT_ONLY and self.ref.source_available:
            raise ValueError("abstract-only scoring implies the source was unavailable")

    def to_dict(self) -> dict[str, Any]:
        data = self.ref.to_dict()
        data["scored_from"] = self.scored_from.value
        data["fetched_at"] = self.fetched_at.strftime("%Y-%m-%dT%H:%M:%SZ")
        data.update(self.score.to_dict())
        data.update(self.recommendation.to_dict())
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScoredPaper":
        return cls(
            ref=ArxivPaperRef.from_dict(data),
            score=SoarScore.from_dict(data),
            recommendation=Recommendation.from_dict(data),
            scored_from=ScoredFrom(data["scored_from"]),
            fetched_at=datetime.strptime(
                data["fetched_at"], "%Y-%m-%dT%H:%M:%SZ"
            ).replace(tzinfo=timezone.utc),
        )


class MinIntervalLimiter:
    """Serializes callers so consecutive acquisitions are spaced apart."""

    def __init__(self, interval: float):
        self.interval = max(0.0, interval)
        self._lock = threading.Lock()
        self._next_at = 0.0

    def acquire(self) -> None:
        with self._lock:
            now = time.monotonic()
            if now < self._next_at:
                time.sleep(self._next_at - now)
                now = time.monotonic()
            self._next_at = now + self.interval


class DiskCache:
    """JSON documents named by a digest of their key, with a TTL.

    Reads are lock-free; writes go through a temp file and an atomic
    replace under a lock.
    """

    def __init__(self, directory: Path, ttl_seconds: float = DEFAULT_CACHE_TTL):
        self.directory = Path(directory)
        self.ttl_seconds = ttl_seconds
        self._write_lock = threading.Lock()
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        digest = hashlib.sha256(key.encode("utf-8")).hexdigest()
        return self.directory / f"{digest}.json"

    def get(self, key: str) -> dict[str, Any] | None:
        path = self._path(key)
        try:
            with open(path, encoding="utf-8") as fh:
                entry = json.load(fh)
        except (OSError, json.JSONDecodeError):
            return None
        if time.time() - entry.get("cached_at", 0.0) > self.ttl_seconds:
            return None
        return entry.get("payload")

    def put(self, key: str, payload: dict[str, Any]) -> None:
        path = self._path(key)
        entry = {"key": key, "cached_at": time.time(), "payload": payload}
        with self._write_lock:
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(entry, fh)
            os.replace(tmp, path)


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_DIR_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "soar"


def _collapse_whitespace(text: str) -> str:
    return " ".join(text.split())


def parse_metadata_feed(xml_text: str, arxiv_id: str) -> ArxivPaperRef:
    """Extract title and abstract for arxiv_id from an Atom feed."""
    try:
        root = ElementTree.fromstring(xml_text)
    except ElementTree.ParseError as exc:
        raise MetadataParseError(f"malformed metadata feed: {exc}") from exc
    entries = root.findall("atom:entry", _ATOM_NS)
    if not entries:
        raise NotFoundError(f"no metadata entry for {arxiv_id}")
    entry = entries[0]
    entry_id = entry.findtext("atom:id", default="", namespaces=_ATOM_NS)
    if "api/errors" in entry_id:
        raise NotFoundError(f"arXiv reported an error entry for {arxiv_id}")
    title = _collapse_whitespace(
        entry.findtext("atom:title", default="", namespaces=_ATOM_NS)
    )
    abstract = _collapse_whitespace(
        entry.findtext("atom:summary", default="", namespaces=_ATOM_NS)
    )
    return ArxivPaperRef(id=arxiv_id, title=title, abstract=abstract)


def select_main_tex(archive: bytes) -> str | None:
    """Pick the main .tex file out of a gzip (possibly tar) e-print blob.

    The main file is the .tex containing a \\documentclass, ties broken
    by largest size; a lone gzipped .tex is used directly.  Returns None
    when the archive holds no usable TeX.
    """
    try:
        inner = gzip.decompress(archive)
    except (OSError, EOFError) as exc:
        raise ArchiveError(f"could not decompress e-print: {exc}") from exc

    looks_like_tar = len(inner) > 262 and inner[257:262] == b"ustar"
    candidates: list[tuple[str, bytes]] = []
    try:
        with tarfile.open(fileobj=io.BytesIO(inner), mode="r:") as tar:
            for member in tar.getmembers():
                if not member.isfile() or not member.name.lower().endswith(".tex"):
                    continue
                extracted = tar.extractfile(member)
                if extracted is not None:
                    candidates.append((member.name, extracted.read()))
    except tarfile.TarError as exc:
        if looks_like_tar:
            raise ArchiveError(f"corrupt e-print tar: {exc}") from exc
        # Single gzipped file, not a tar.
        text = inner.decode("utf-8", errors="replace")
        return text if text.strip() else None

    if not candidates:
        return None
    with_class = [c for c in candidates if b"\\documentclass" in c[1]]
    pool = with_class or candidates
    pool.sort(key=lambda c: (-len(c[1]), c[0]))
    return pool[0][1].decode("utf-8", errors="replace")


class ArxivClient:
    """Fetches arXiv metadata and sources, scores them, and caches results."""

    def __init__(
        self,
        session: Any | None = None,
        cache_dir: Path | str | None = None,
        min_interval: float = DEFAULT_MIN_INTERVAL,
        ttl_seconds: float = DEFAULT_CACHE_TTL,
        timeout: float = 30.0,
        metadata_url: str = METADATA_URL,
        source_url: str = SOURCE_URL,
        ingest_config: IngestConfig | None = None,
    ):
        self.session = session if session is not None else requests.Session()
        self.cache = DiskCache(Path(cache_dir) if cache_dir else default_cache_dir(), ttl_seconds)
        self.limiter = MinIntervalLimiter(min_interval)
        self.timeout = timeout
        self.metadata_url = metadata_url
        self.source_url = source_url
        self.ingest_config = ingest_config or IngestConfig()

    def _get(self, url: str, params: dict[str, Any] | None = None) -> Any:
        self.limiter.acquire()
        try:
            response = self.session.get(url, params=params, timeout=self.timeout)
        except requests.RequestException as exc:
            raise NetworkError(f"request to {url} failed: {exc}") from exc
        if response.status_code == 404:
            raise NotFoundError(f"{url} returned 404")
        if response.status_code in (429, 503):
            retry_after = response.headers.get("Retry-After")
            raise RateLimitedError(
                f"{url} returned {response.status_code}",
                retry_after=float(retry_after) if retry_after else None,
            )
        if response.status_code != 200:
            raise NetworkError(f"{url} returned {response.status_code}")
        return response

    def fetch_metadata(self, arxiv_id: str) -> ArxivPaperRef:
        """Title and abstract for one identifier via the Atom API."""
        validate_id(arxiv_id)
        response = self._get(
            self.metadata_url, params={"id_list": arxiv_id, "max_results": 1}
        )
        return parse_metadata_feed(response.text, arxiv_id)

    def fetch_source(self, arxiv_id: str) -> str | None:
        """LaTeX source text, or None when only a PDF exists."""
        validate_id(arxiv_id)
        response = self._get(self.source_url + arxiv_id)
        blob: bytes = response.content
        content_type = response.headers.get("Content-Type", "")
        if blob.startswith(b"%PDF") or "pdf" in content_type:
            return None
        if blob.startswith(b"\x1f\x8b"):
            return select_main_tex(blob)
        # Some mirrors serve bare text.
        try:
            text = blob.decode("utf-8")
        except UnicodeDecodeError:
            return None
        return text if "\\documentclass" in text else None

    def _cache_key(self, arxiv_id: str, config: MatchConfig, threshold: float) -> str:
        from . import __version__

        return f"{arxiv_id}|{config.cache_token()}|{threshold!r}|{__version__}"

    def score_arxiv(
        self,
        arxiv_id: str,
        config: MatchConfig | None = None,
        threshold: float = DEFAULT_THRESHOLD,
    ) -> ScoredPaper:
        """Score a paper from its full source, falling back to the abstract.

        Results are cached; a cache hit issues no network traffic.
        """
        validate_id(arxiv_id)
        cfg = config or MatchConfig()
        key = self._cache_key(arxiv_id, cfg, threshold)
        cached = self.cache.get(key)
        if cached is not None:
            return ScoredPaper.from_dict(cached)

        metadata_error: ArxivError | None = None
        ref: ArxivPaperRef | None = None
        try:
            ref = self.fetch_metadata(arxiv_id)
        except (NetworkError, MetadataParseError) as exc:
            metadata_error = exc

        source: str | None = None
        try:
            source = self.fetch_source(arxiv_id)
        except (NetworkError, ArchiveError, NotFoundError):
            source = None

        if ref is None and source is None:
            raise NetworkError(
                f"both metadata and source fetch failed for {arxiv_id}: {metadata_error}"
            )
        if ref is None:
            ref = ArxivPaperRef(id=arxiv_id, title="", abstract="")

        report: TermCountReport
        if source is not None:
            scored_from = ScoredFrom.FULL_SOURCE
            ref = replace(ref, source_available=True)
            try:
                doc = load_latex(source, self.ingest_config, origin=f"arxiv:{arxiv_id}")
                report = count_terms(doc, cfg)
            except EmptyDocumentError:
                scored_from = ScoredFrom.ABSTRACT_ONLY
                ref = replace(ref, source_available=False)
                report = self._count_abstract(ref, cfg)
        else:
            scored_from = ScoredFrom.ABSTRACT_ONLY
            ref = replace(ref, source_available=False)
            report = self._count_abstract(ref, cfg)

        score = soar_score(report)
        paper = ScoredPaper(
            ref=ref,
            score=score,
            recommendation=recommend(score, threshold),
            scored_from=scored_from,
            fetched_at=datetime.now(timezone.utc).replace(microsecond=0),
        )
        self.cache.put(key, paper.to_dict())
        return paper

    def _count_abstract(self, ref: ArxivPaperRef, cfg: MatchConfig) -> TermCountReport:
        try:
            doc = load_abstract(ref.abstract, origin=f"arxiv:{ref.id}")
        except EmptyDocumentError:
            return TermCountReport(sota_count=0, novel_count=0)
        return count_terms(doc, cfg)
