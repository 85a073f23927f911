"""Stateless HTTP scoring service.

Endpoints:
    POST /v1/score                 score a raw text or LaTeX body
    GET  /v1/arxiv/{id}/score      score an arXiv paper
    POST /v1/arxiv/score/batch     score up to 50 arXiv ids, errors inline
    GET  /v1/health                liveness probe

Every response is JSON and carries an X-Service-Version header.  Shared
state is limited to the arXiv client's cache and rate limiter.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Literal

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .arxiv import (
    ArxivClient,
    ArxivError,
    InvalidIdError,
    NotFoundError,
    ScoredPaper,
    is_valid_id,
)
from .ingest import EmptyDocumentError, load_latex, load_plain_text
from .matcher import MatchConfig, NovelMorphology, SotaVariants, count_terms
from .model import SectionKind
from .scoring import DEFAULT_THRESHOLD, recommend, soar_score

VERSION_HEADER = "X-Service-Version"

ARXIV_ORIGINS = (
    "https://arxiv.org",
    "http://arxiv.org",
    "https://www.arxiv.org",
    "http://www.arxiv.org",
)

BATCH_LIMIT = 50


@dataclass(frozen=True)
class ServiceConfig:
    bind_address: str = "127.0.0.1:8472"
    default_threshold: float = DEFAULT_THRESHOLD
    max_body_bytes: int = 10_485_760
    cors_allowed_origins: tuple[str, ...] = ARXIV_ORIGINS

    def __post_init__(self) -> None:
        if self.max_body_bytes <= 0:
            raise ValueError("max_body_bytes must be positive")

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        return cls(
            bind_address=os.environ.get("SOAR_BIND", cls.bind_address),
            default_threshold=float(
                os.environ.get("SOAR_THRESHOLD", cls.default_threshold)
            ),
        )

    @property
    def host(self) -> str:
        return self.bind_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_address.rsplit(":", 1)[1])


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def _match_config(
    sota_variants: str, novel_morphology: str, exclude_bibliography: bool
) -> MatchConfig:
    excluded = {SectionKind.RELATED_WORK}
    if exclude_bibliography:
        excluded.add(SectionKind.BIBLIOGRAPHY)
    return MatchConfig(
        sota_variants=SotaVariants(sota_variants),
        novel_morphology=NovelMorphology(novel_morphology),
        excluded_kinds=frozenset(excluded),
    )


def score_response_body(score, recommendation) -> dict[str, Any]:
    """The canonical score JSON shape shared by service and CLI."""
    counts = score.counts
    return {
        "score": score.value,
        "display": score.display,
        "counts": {
            "sota": counts.sota_count,
            "novel": counts.novel_count,
            "excluded_sota": counts.excluded_sota,
            "excluded_novel": counts.excluded_novel,
        },
        "recommendation": recommendation.verdict.value,
        "threshold": recommendation.threshold,
    }


def scored_paper_body(paper: ScoredPaper) -> dict[str, Any]:
    body: dict[str, Any] = {
        "arxiv_id": paper.ref.id,
        "title": paper.ref.title,
        "scored_from": paper.scored_from.value,
        "fetched_at": paper.fetched_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    body.update(score_response_body(paper.score, paper.recommendation))
    return body


def create_app(
    config: ServiceConfig | None = None, client: ArxivClient | None = None
) -> FastAPI:
    cfg = config or ServiceConfig.from_env()
    arxiv_client = client if client is not None else ArxivClient()

    app = FastAPI(title="soar", version=__version__, docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cfg.cors_allowed_origins),
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def add_version_header(request: Request, call_next):
        response = await call_next(request)
        response.headers[VERSION_HEADER] = __version__
        return response

    @app.get("/v1/health")
    async def health() -> JSONResponse:
        return JSONResponse(content="ok")

    @app.post("/v1/score")
    async def score_text(
        request: Request,
        format: Literal["plain", "latex"] = "plain",
        threshold: float | None = None,
        sota_variants: Literal["hyphenated", "both"] = "both",
        novel_morphology: Literal["exact", "derived"] = "exact",
        exclude_bibliography: bool = True,
    ) -> JSONResponse:
        body = await request.body()
        if len(body) > cfg.max_body_bytes:
            return _error(413, "body_too_large", f"body exceeds {cfg.max_body_bytes} bytes")
        text = body.decode("utf-8", errors="replace")
        match_config = _match_config(sota_variants, novel_morphology, exclude_bibliography)
        effective_threshold = cfg.default_threshold if threshold is None else threshold
        try:
            doc = load_latex(text) if format == "latex" else load_plain_text(text)
        except EmptyDocumentError:
            return _error(400, "empty_document", "the document contains zero tokens")
        score = soar_score(count_terms(doc, match_config))
        recommendation = recommend(score, effective_threshold)
        return JSONResponse(content=score_response_body(score, recommendation))

    @app.get("/v1/arxiv/{arxiv_id:path}/score")
    async def score_arxiv_paper(
        arxiv_id: str, threshold: float | None = None
    ) -> JSONResponse:
        if not is_valid_id(arxiv_id):
            return _error(400, "invalid_id", f"malformed arXiv identifier: {arxiv_id!r}")
        effective_threshold = cfg.default_threshold if threshold is None else threshold
        try:
            paper = arxiv_client.score_arxiv(arxiv_id, threshold=effective_threshold)
        except NotFoundError as exc:
            return _error(404, "not_found", str(exc))
        except InvalidIdError as exc:
            return _error(400, "invalid_id", str(exc))
        except ArxivError as exc:
            return _error(502, "upstream_failure", str(exc))
        return JSONResponse(content=scored_paper_body(paper))

    @app.post("/v1/arxiv/score/batch")
    async def score_batch(
        request: Request, threshold: float | None = None
    ) -> JSONResponse:
        try:
            ids = await request.json()
        except Exception:
            return _error(400, "invalid_body", "body must be a JSON array of arXiv ids")
        if not isinstance(ids, list) or not all(isinstance(x, str) for x in ids):
            return _error(400, "invalid_body", "body must be a JSON array of arXiv ids")
        if len(ids) > BATCH_LIMIT:
            return _error(400, "too_many_ids", f"at most {BATCH_LIMIT} ids per batch")
        effective_threshold = cfg.default_threshold if threshold is None else threshold
        results: list[dict[str, Any]] = []
        for arxiv_id in ids:
            if not is_valid_id(arxiv_id):
                results.append({"id": arxiv_id, "error": "invalid_id"})
                continue
            try:
                paper = arxiv_client.score_arxiv(arxiv_id, threshold=effective_threshold)
            except NotFoundError:
                results.append({"id": arxiv_id, "error": "not_found"})
            except ArxivError:
                results.append({"id": arxiv_id, "error": "upstream_failure"})
            else:
                results.append(scored_paper_body(paper))
        return JSONResponse(content=results)

    return app
