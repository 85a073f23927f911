"""Command-line front door: score files and arXiv ids, filter submission
manifests, list score-succession events, and run the HTTP service.

Exit codes: 0 all targets succeeded, 1 any target or input failed,
2 environment failure (bad usage, bind failure).
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

from .arxiv import ArxivClient, ArxivError, is_valid_id
from .ingest import EmptyDocumentError, load_latex, load_plain_text
from .matcher import MatchConfig, NovelMorphology, SotaVariants, count_terms
from .model import Document, SectionKind, Verdict
from .scoring import (
    DEFAULT_THRESHOLD,
    ThresholdPolicy,
    TopKPolicy,
    filter_submissions,
    recommend,
    soar_score,
    sota_succession,
)
from .service import ServiceConfig, create_app, score_response_body

EXIT_OK = 0
EXIT_TARGET_FAILURE = 1
EXIT_ENVIRONMENT = 2


def _env_threshold() -> float:
    raw = os.environ.get("SOAR_THRESHOLD")
    if raw is None:
        return DEFAULT_THRESHOLD
    try:
        return float(raw)
    except ValueError:
        return DEFAULT_THRESHOLD


def _match_config(args: argparse.Namespace) -> MatchConfig:
    excluded = {SectionKind.RELATED_WORK}
    if not args.no_exclude_bibliography:
        excluded.add(SectionKind.BIBLIOGRAPHY)
    return MatchConfig(
        sota_variants=SotaVariants(args.sota_variants),
        novel_morphology=NovelMorphology(args.novel_morphology),
        excluded_kinds=frozenset(excluded),
    )


def _load_file(path: Path, format_override: str | None) -> Document:
    data = path.read_bytes()
    fmt = format_override or ("latex" if path.suffix.lower() == ".tex" else "plain")
    if fmt == "latex":
        return load_latex(data, origin=str(path))
    return load_plain_text(data, origin=str(path))


def _verdict_label(verdict: Verdict) -> str:
    return "READ" if verdict is Verdict.READ else "DON'T READ"


def _score_target(
    target: str,
    args: argparse.Namespace,
    config: MatchConfig,
    client: ArxivClient | None,
) -> dict[str, Any]:
    """Score one path or arXiv id into a CLI output record."""
    warnings: list[str] = []
    is_path = os.path.exists(target)
    if is_valid_id(target):
        if is_path:
            warnings.append("target matches an arXiv id but exists as a file; scored as a file")
        else:
            try:
                assert client is not None
                paper = client.score_arxiv(target, config, args.threshold)
            except ArxivError as exc:
                return {"target": target, "error": str(exc)}
            record: dict[str, Any] = {"target": target}
            record.update(score_response_body(paper.score, paper.recommendation))
            record["scored_from"] = paper.scored_from.value
            record["warnings"] = warnings
            return record
    path = Path(target)
    try:
        doc = _load_file(path, args.format)
    except OSError as exc:
        return {"target": target, "error": f"cannot read file: {exc}"}
    except EmptyDocumentError:
        return {"target": target, "error": "empty document"}
    warnings.extend(doc.warnings)
    score = soar_score(count_terms(doc, config))
    recommendation = recommend(score, args.threshold)
    record = {"target": target}
    record.update(score_response_body(score, recommendation))
    record["warnings"] = warnings
    return record


def cmd_score(args: argparse.Namespace) -> int:
    config = _match_config(args)
    needs_client = any(
        is_valid_id(t) and not os.path.exists(t) for t in args.targets
    )
    client = ArxivClient() if needs_client else None
    jobs = max(1, args.jobs)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        records = list(
            pool.map(lambda t: _score_target(t, args, config, client), args.targets)
        )
    failed = False
    for record in records:
        if args.json:
            print(json.dumps(record))
        elif "error" in record:
            print(f"{record['target']}  error: {record['error']}")
        else:
            verdict = Verdict(record["recommendation"])
            print(f"{record['target']}  {record['display']}  {_verdict_label(verdict)}")
        failed = failed or "error" in record
    return EXIT_TARGET_FAILURE if failed else EXIT_OK


def cmd_filter(args: argparse.Namespace) -> int:
    config = _match_config(args)
    entries: list[tuple[str, Path]] = []
    seen: set[str] = set()
    try:
        lines = Path(args.manifest).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_TARGET_FAILURE
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split(maxsplit=1)
        if len(parts) != 2:
            print(f"{args.manifest}:{lineno}: malformed manifest line", file=sys.stderr)
            return EXIT_TARGET_FAILURE
        sid, path = parts[0], parts[1].strip()
        if sid in seen:
            print(f"{args.manifest}:{lineno}: duplicate id {sid!r}", file=sys.stderr)
            return EXIT_TARGET_FAILURE
        seen.add(sid)
        entries.append((sid, Path(path)))

    scored = []
    for sid, path in entries:
        try:
            doc = _load_file(path, args.format)
        except (OSError, EmptyDocumentError) as exc:
            print(f"cannot score {sid} ({path}): {exc}", file=sys.stderr)
            return EXIT_TARGET_FAILURE
        scored.append((sid, soar_score(count_terms(doc, config))))

    policy = (
        TopKPolicy(k=args.top_k) if args.top_k is not None else ThresholdPolicy(args.min_score)
    )
    accepted = filter_submissions(scored, policy)
    by_id = dict(scored)
    for sid in accepted:
        if args.json:
            score = by_id[sid]
            print(json.dumps({"id": sid, "score": score.value, "display": score.display}))
        else:
            print(sid)
    return EXIT_OK


def cmd_succession(args: argparse.Namespace) -> int:
    try:
        lines = Path(args.scores).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"cannot read scores file: {exc}", file=sys.stderr)
        return EXIT_TARGET_FAILURE
    values: list[float] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            value = float(line.strip())
        except ValueError:
            print(f"{args.scores}:{lineno}: not a number", file=sys.stderr)
            return EXIT_TARGET_FAILURE
        if value < 0:
            print(f"{args.scores}:{lineno}: negative score", file=sys.stderr)
            return EXIT_TARGET_FAILURE
        values.append(value)
    for event in sota_succession(values):
        print(f"{event.index}\t{event.score_value}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    config = ServiceConfig(
        bind_address=args.bind, default_threshold=args.threshold
    )
    # Fail fast with a clear exit code when the port is taken.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((config.host, config.port))
        bound_port = probe.getsockname()[1]
    except OSError as exc:
        print(f"cannot bind {args.bind}: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    finally:
        probe.close()

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=bound_port, log_level="info")
    return EXIT_OK


def _add_match_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--sota-variants", choices=["hyphenated", "both"], default="both",
        help="count only the hyphenated term, or also the spaced phrase",
    )
    parser.add_argument(
        "--novel-morphology", choices=["exact", "derived"], default="exact",
        help="count the exact word only, or include short derived forms",
    )
    parser.add_argument(
        "--no-exclude-bibliography", action="store_true",
        help="count matches inside reference lists",
    )
    parser.add_argument(
        "--format", choices=["plain", "latex"], default=None,
        help="input format; default infers latex from a .tex extension",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soar", description="Deterministic manuscript scoring"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score files or arXiv ids")
    p_score.add_argument("targets", nargs="+", help="paths and/or arXiv ids")
    p_score.add_argument("--json", action="store_true", help="newline-delimited JSON output")
    p_score.add_argument("--threshold", type=float, default=_env_threshold())
    p_score.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_match_flags(p_score)
    p_score.set_defaults(func=cmd_score)

    p_filter = sub.add_parser("filter", help="filter a submission manifest")
    p_filter.add_argument("manifest", help="file of '<id> <path>' lines")
    p_filter.add_argument("--json", action="store_true")
    group = p_filter.add_mutually_exclusive_group(required=True)
    group.add_argument("--min-score", type=float, default=None)
    group.add_argument("--top-k", type=int, default=None)
    _add_match_flags(p_filter)
    p_filter.set_defaults(func=cmd_filter)

    p_succ = sub.add_parser("succession", help="strict running-maximum events")
    p_succ.add_argument("scores", help="file with one score per line, chronological")
    p_succ.set_defaults(func=cmd_succession)

    p_serve = sub.add_parser("serve", help="run the HTTP scoring service")
    p_serve.add_argument(
        "--bind", default=os.environ.get("SOAR_BIND", "127.0.0.1:8472")
    )
    p_serve.add_argument("--threshold", type=float, default=_env_threshold())
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
