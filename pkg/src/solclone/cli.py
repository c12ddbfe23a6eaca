"""Pipeline entry point: ingest -> extract -> embed -> pairs -> sample ->
review -> llm scan -> report, sharing one configuration.

Exit codes: 0 success, 2 config error, 3 missing prerequisite, 4 provider
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from . import corpus as corpus_mod
from . import embed as embed_mod
from . import extractor
from . import llmdoc
from . import pairs as pairs_mod
from . import report as report_render
from . import sampling
from .config import ConfigError, PipelineConfig, load_config
from .util import read_jsonl, read_jsonl_meta, write_json, write_jsonl

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_PROVIDER = 4


class MissingPrerequisite(Exception):
    def __init__(self, path: Path, hint: str):
        super().__init__(f"missing {path}; run `{hint}` first")
        self.path = path
        self.hint = hint


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise MissingPrerequisite(path, hint)
    return path


def _write_manifest(config: PipelineConfig, stage: str, artifacts: list[Path]) -> None:
    manifest = {
        "stage": stage,
        "config_hash": config.config_hash,
        "artifacts": [str(p) for p in artifacts],
    }
    if config.run_timestamp:
        manifest["timestamp"] = config.run_timestamp
    write_json(Path(config.out_dir) / "manifests" / f"{stage}.json", manifest)


def _provider_from_config(config: PipelineConfig):
    spec = config.provider
    kind = spec.get("kind", "stub")
    if kind == "stub":
        return llmdoc.StubProvider(model_id=spec.get("model_id", "stub-model"))
    if kind == "http":
        return llmdoc.HttpChatProvider(
            llmdoc.LlmProviderSpec(
                endpoint=spec["endpoint"],
                model_id=spec["model_id"],
                temperature=spec.get("temperature", 0.0),
                auth_env=spec.get("auth_env"),
            )
        )
    if kind == "replay":
        recordings = {}
        path = spec.get("recordings")
        if path and Path(path).exists():
            recordings = {r["key"]: r["response"] for r in read_jsonl(path)}
        return llmdoc.ReplayProvider(recordings, model_id=spec.get("model_id", "replay"))
    raise ConfigError(f"unknown provider kind {kind!r}")


def _load_functions(
    config: PipelineConfig, functions_path: Optional[str] = None
) -> list[extractor.FunctionRecord]:
    path = _require(
        Path(functions_path) if functions_path else config.path("functions.jsonl"), "extract"
    )
    return [extractor.FunctionRecord.from_json(rec) for rec in read_jsonl(path)]


def _embedder_specs(config: PipelineConfig) -> tuple[embed_mod.EmbedderSpec, embed_mod.EmbedderSpec]:
    return (
        embed_mod.EmbedderSpec.from_json(config.code_embedder),
        embed_mod.EmbedderSpec.from_json(config.comment_embedder),
    )


# ---------------------------------------------------------------------------
# stages


def stage_ingest(config: PipelineConfig) -> list[Path]:
    if not config.addresses_csv:
        raise ConfigError("ingest requires addresses_csv (--addresses)")
    if not config.sources_dir:
        raise ConfigError("ingest requires sources_dir (--sources)")
    addresses_path = _require(Path(config.addresses_csv), "export the address CSV")
    with open(addresses_path, "r", encoding="utf-8", newline="") as fh:
        records, row_errors = corpus_mod.ingest_address_list(fh)
    for err in row_errors:
        logger.warning("addresses line %d: %s", err.line, err.message)
    active = corpus_mod.filter_active(
        records, min_tx=config.min_tx, cutoff=corpus_mod.parse_rfc3339(config.cutoff)
    )
    fetcher = corpus_mod.FilesystemFetcher(config.sources_dir)
    files = []
    for rec in active:
        raw = fetcher.fetch(rec.address)
        if raw is None:
            logger.warning("no source available for %s", rec.address)
            continue
        files.append(corpus_mod.make_source_file(raw, address=rec.address))
    corpus_dir = config.resolved_corpus_dir()
    manifest = corpus_mod.save_corpus(
        files, corpus_dir, retrieved_at=config.run_timestamp, meta=config.meta("ingest")
    )
    logger.info("ingested %d files (%d rows, %d active)", len(files), len(records), len(active))
    return [manifest]


def stage_dedup(config: PipelineConfig) -> list[Path]:
    corpus_dir = config.resolved_corpus_dir()
    _require(corpus_dir / "manifest.jsonl", "ingest")
    files = corpus_mod.load_corpus(corpus_dir)
    unique, groups = corpus_mod.dedup(files)
    manifest = corpus_mod.save_corpus(
        unique, corpus_dir, retrieved_at=config.run_timestamp, meta=config.meta("dedup")
    )
    report_path = write_json(
        config.path("dedup_report.json"),
        {
            "config_hash": config.config_hash,
            "input_files": len(files),
            "unique_files": len(unique),
            "duplicate_groups": [
                {"checksum": g.checksum, "survivor": g.survivor, "members": list(g.members)}
                for g in groups
            ],
        },
    )
    logger.info("dedup: %d -> %d files (%d groups)", len(files), len(unique), len(groups))
    return [manifest, report_path]


def stage_extract(
    config: PipelineConfig,
    keep_all_visibilities: bool = False,
    csv_out: Optional[str] = None,
    out: Optional[str] = None,
) -> list[Path]:
    corpus_dir = config.resolved_corpus_dir()
    _require(corpus_dir / "manifest.jsonl", "ingest")
    files = corpus_mod.load_corpus(corpus_dir)
    records: list[extractor.FunctionRecord] = []
    diagnostics: list[str] = []
    for f in files:
        extraction = extractor.extract_file(f)
        diagnostics.extend(f"{f.file_id[:12]}: {d}" for d in extraction.diagnostics)
        for record in extraction.functions:
            record.accepted = extractor.passes_filters(record, config.min_comment_tokens)
            records.append(record)
    kept = records if keep_all_visibilities else [r for r in records if r.accepted]
    kept.sort(key=lambda r: r.function_id)
    out_path = write_jsonl(
        Path(out) if out else config.path("functions.jsonl"),
        (r.to_json() for r in kept),
        meta=config.meta("extract"),
    )
    artifacts = [out_path]
    if diagnostics:
        artifacts.append(
            write_json(config.path("extract_diagnostics.json"), {"diagnostics": diagnostics})
        )
    if csv_out:
        import csv as csv_lib

        fieldnames = [
            "function_id", "contract_id", "contract_name", "solidity_version",
            "contract_variables", "function_name", "function_visibility",
            "token_length", "function_code", "function_comment", "char_length",
            "parameter_types", "return_types", "accepted",
        ]
        csv_path = Path(csv_out)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv_lib.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            for r in kept:
                row = r.to_json()
                row["contract_variables"] = ";".join(
                    f"{v['type']} {v['name']}" for v in row["contract_variables"]
                )
                row["parameter_types"] = ",".join(row["parameter_types"])
                row["return_types"] = ",".join(row["return_types"])
                writer.writerow(row)
        artifacts.append(csv_path)
    logger.info("extracted %d functions (%d kept) from %d files", len(records), len(kept), len(files))
    return artifacts


def stage_stats(config: PipelineConfig, fmt: str = "json") -> list[Path]:
    corpus_dir = config.resolved_corpus_dir()
    _require(corpus_dir / "manifest.jsonl", "ingest")
    files = corpus_mod.load_corpus(corpus_dir)
    functions = [fn for f in files for fn in extractor.extract_functions(f)]
    stats = corpus_mod.corpus_stats(files, functions)
    payload = {"config_hash": config.config_hash, **stats.to_json()}
    out_path = write_json(config.path("stats.json"), payload)
    if fmt == "table":
        print(report_render.render_stats_markdown(payload))
        print(report_render.render_versions_markdown(payload))
    else:
        print(out_path)
    return [out_path]


def stage_embed(config: PipelineConfig) -> list[Path]:
    functions = _load_functions(config)
    code_spec, comment_spec = _embedder_specs(config)
    cache = embed_mod.EmbeddingCache()
    for record in functions:
        cache.embed(record.function_code, code_spec)
        if record.accepted and record.function_comment:
            cache.embed(record.function_comment, comment_spec)
    out_path = cache.save(config.path("embeddings.jsonl"), meta=config.meta("embed"))
    logger.info("embedded %d functions into %d cache entries", len(functions), len(cache))
    return [out_path]


def stage_pairs(
    config: PipelineConfig,
    functions_path: Optional[str] = None,
    out: Optional[str] = None,
    stripe_report: Optional[str] = None,
) -> list[Path]:
    functions = [r for r in _load_functions(config, functions_path) if r.accepted]
    cache_path = _require(config.path("embeddings.jsonl"), "embed")
    cache = embed_mod.EmbeddingCache.load(cache_path)
    code_spec, comment_spec = _embedder_specs(config)
    lookup = pairs_mod.EmbeddingLookup(cache, code_spec, comment_spec, config.min_comment_tokens)
    thresholds = pairs_mod.Thresholds(code=config.code_threshold, comment=config.comment_threshold)
    policy = pairs_mod.PairingPolicy(config.pairing_policy)

    # stripe counters aggregate while pair records stream to disk; the full
    # pair set is never materialized
    stripe_counts: dict[str, dict[str, int]] = {}
    set_totals: dict[str, int] = {}

    def scored_records():
        for score, label, stripe in pairs_mod.score_stream(functions, policy, lookup, thresholds):
            set_totals[label.value] = set_totals.get(label.value, 0) + 1
            if stripe is not None:
                per_set = stripe_counts.setdefault(label.value, {})
                per_set[stripe.key()] = per_set.get(stripe.key(), 0) + 1
            yield pairs_mod.pair_record(score, label, stripe)

    out_path = write_jsonl(
        Path(out) if out else config.path("pairs.jsonl"),
        scored_records(),
        meta=config.meta("pairs"),
    )
    stripe_path = write_json(
        Path(stripe_report) if stripe_report else config.path("stripes.json"),
        {"config_hash": config.config_hash, "sets": stripe_counts, "totals": set_totals},
    )
    logger.info("scored %d pairs: %s", sum(set_totals.values()), set_totals)
    return [out_path, stripe_path]


def stage_sample(
    config: PipelineConfig,
    set_label: str = "candidate",
    n: Optional[int] = None,
    out: Optional[str] = None,
    pairs_path: Optional[str] = None,
) -> list[Path]:
    pairs_path = _require(
        Path(pairs_path) if pairs_path else config.path("pairs.jsonl"), "pairs"
    )
    strata: dict[str, list[str]] = {}
    by_id: dict[str, dict] = {}
    for rec in read_jsonl(pairs_path):
        if rec["set"] != set_label or rec.get("stripe") is None:
            continue
        strata.setdefault(rec["stripe"], []).append(rec["pair_id"])
        by_id[rec["pair_id"]] = rec
    if not strata:
        raise MissingPrerequisite(pairs_path, f"pairs (no {set_label} pairs found)")
    populations = {key: len(ids) for key, ids in sorted(strata.items())}
    plan = sampling.plan_sample(
        populations,
        confidence=config.confidence,
        margin=config.margin,
        proportion=config.proportion,
        n=n,
    )
    drawn = sampling.draw_stratified(strata, plan.allocations, config.seed)
    records = []
    for stripe_key in sorted(drawn):
        for pair_id in drawn[stripe_key]:
            records.append(by_id[pair_id])
    meta = config.meta("sample")
    meta["plan"] = plan.to_json()
    meta["seed"] = config.seed
    meta["set"] = set_label
    out_path = write_jsonl(
        Path(out) if out else config.path(f"sample_{set_label}.jsonl"), records, meta=meta
    )
    logger.info("sampled %d of %d %s pairs", len(records), sum(populations.values()), set_label)
    return [out_path]


def stage_llm_summarize(
    config: PipelineConfig, style: str = "base", functions_path: Optional[str] = None
) -> list[Path]:
    functions = _load_functions(config, functions_path)
    provider = _provider_from_config(config)
    cache = llmdoc.SummaryCache(config.path("summaries_cache.jsonl"))
    clock = (lambda: config.run_timestamp) if config.run_timestamp else None
    prompt_style = llmdoc.PromptStyle.BASE if style == "base" else llmdoc.PromptStyle.STRUCTURED
    records = []
    for record in functions:
        summary = llmdoc.summarize(record, prompt_style, provider, cache=cache, clock=clock)
        records.append(summary.to_json())
    out_path = write_jsonl(config.path("summaries.jsonl"), records, meta=config.meta("llm-summarize"))
    return [out_path]


def stage_llm_scan(config: PipelineConfig) -> list[Path]:
    functions = _load_functions(config)
    cache_path = _require(config.path("embeddings.jsonl"), "embed")
    cache = embed_mod.EmbeddingCache.load(cache_path)
    code_spec, comment_spec = _embedder_specs(config)

    # uncommented scope: public/external functions without an accepted comment
    scoped = [
        r
        for r in functions
        if r.function_visibility in ("public", "external") and not r.accepted
    ]
    top_files = _top_files_by_tx(config)
    if top_files is not None:
        scoped = [r for r in scoped if r.contract_id.split(":")[0] in top_files]

    provider = _provider_from_config(config)
    summaries = llmdoc.SummaryCache(config.path("summaries_cache.jsonl"))
    clock = (lambda: config.run_timestamp) if config.run_timestamp else None
    hits = llmdoc.hidden_clone_scan(
        scoped,
        comment_spec,
        provider,
        code_spec=code_spec,
        embedding_cache=cache,
        summary_cache=summaries,
        threshold=config.scan_threshold,
        min_words=config.min_words,
        clock=clock,
    )
    meta = config.meta("llm-scan")
    meta["scanned_functions"] = len(scoped)
    out_path = llmdoc.write_scan(config.path("scan.jsonl"), hits, meta=meta)
    logger.info("scan: %d uncommented functions, %d hits", len(scoped), len(hits))
    return [out_path]


def _top_files_by_tx(config: PipelineConfig) -> Optional[set[str]]:
    """file_ids of the N most active contracts, when activity data exists."""
    corpus_dir = config.resolved_corpus_dir()
    manifest_path = corpus_dir / "manifest.jsonl"
    if not manifest_path.exists() or not config.addresses_csv:
        return None
    addresses_path = Path(config.addresses_csv)
    if not addresses_path.exists():
        return None
    with open(addresses_path, "r", encoding="utf-8", newline="") as fh:
        records, _errors = corpus_mod.ingest_address_list(fh)
    tx_by_address = {r.address: r.tx_count for r in records}
    ranked = sorted(
        (rec for rec in corpus_mod.load_manifest(corpus_dir) if rec.get("address")),
        key=lambda rec: (-tx_by_address.get(rec["address"], 0), rec["file_id"]),
    )
    return {rec["file_id"] for rec in ranked[: config.top_contracts]}


def stage_report(config: PipelineConfig, review_export: Optional[str] = None) -> list[Path]:
    report_dir = config.path("report")
    report_dir.mkdir(parents=True, exist_ok=True)
    artifacts: list[Path] = []
    import json as json_lib

    stats_path = config.path("stats.json")
    if stats_path.exists():
        stats = json_lib.loads(stats_path.read_text(encoding="utf-8"))
        artifacts.append(write_json(report_dir / "table1_dataset.json", stats))
        artifacts.append(
            _write_text(report_dir / "table1_dataset.md", report_render.render_stats_markdown(stats))
        )
        artifacts.append(write_json(report_dir / "table2_versions.json", stats["version_distribution"]))
        artifacts.append(
            _write_text(report_dir / "table2_versions.md", report_render.render_versions_markdown(stats))
        )

    stripes_path = config.path("stripes.json")
    if stripes_path.exists():
        stripes = json_lib.loads(stripes_path.read_text(encoding="utf-8"))
        artifacts.append(write_json(report_dir / "table3_stripes.json", stripes))
        artifacts.append(
            _write_text(
                report_dir / "table3_stripes.md",
                report_render.render_population_stripes_markdown(stripes),
            )
        )

    pairs_path = config.path("pairs.jsonl")
    if pairs_path.exists():
        candidates = []
        for rec in read_jsonl(pairs_path):
            if rec["set"] == "candidate" and rec["same_name"]:
                candidates.append(
                    pairs_mod.PairScore(
                        function_id_a=rec["pair_id"].split("|")[0],
                        function_id_b=rec["pair_id"].split("|")[1],
                        cd_s=rec["cd_s"],
                        cm_s=rec.get("cm_s"),
                        same_name=rec["same_name"],
                        signature_compatible=rec["signature_compatible"],
                    )
                )
        top = pairs_mod.top_cloned_functions(candidates, k=20)
        artifacts.append(
            write_json(
                report_dir / "table4_top_functions.json",
                {"config_hash": config.config_hash, "top": [{"function": n, "candidates": c} for n, c in top]},
            )
        )
        artifacts.append(
            _write_text(
                report_dir / "table4_top_functions.md",
                report_render.render_top_functions_markdown(top),
            )
        )

    if review_export:
        export_dir = Path(review_export)
        labels_path = export_dir / "labels.json"
        if labels_path.exists():
            labels = json_lib.loads(labels_path.read_text(encoding="utf-8"))
            artifacts.append(write_json(report_dir / "table5_labels.json", labels))
            artifacts.append(
                _write_text(report_dir / "table5_labels.md", report_render.render_labels_markdown(labels))
            )
        validation_path = export_dir / "stripes.json"
        if validation_path.exists():
            validation = json_lib.loads(validation_path.read_text(encoding="utf-8"))
            artifacts.append(write_json(report_dir / "table3_validation.json", validation))
            artifacts.append(
                _write_text(
                    report_dir / "table3_validation.md",
                    report_render.render_validation_stripes_markdown(validation),
                )
            )
        metrics_path = export_dir / "metrics.json"
        if metrics_path.exists():
            metrics = json_lib.loads(metrics_path.read_text(encoding="utf-8"))
            artifacts.append(write_json(report_dir / "metrics.json", metrics))
            artifacts.append(
                _write_text(report_dir / "metrics.md", report_render.render_metrics_markdown(metrics))
            )

    if not artifacts:
        raise MissingPrerequisite(stats_path, "stats, pairs, or review export")
    return artifacts


def _write_text(path: Path, text: str) -> Path:
    from .util import atomic_write_text

    return atomic_write_text(path, text)


def stage_review_serve(config: PipelineConfig, functions_path: Optional[str] = None, ui: Optional[str] = None):
    import uvicorn

    from .review.core import ReviewStore
    from .review.service import create_app

    functions = {}
    path = Path(functions_path) if functions_path else config.path("functions.jsonl")
    if path.exists():
        functions = {rec["function_id"]: rec for rec in read_jsonl(path)}
    store = ReviewStore(config.path("review"))
    app = create_app(store, functions=functions, ui_dir=ui)
    uvicorn.run(app, host="127.0.0.1", port=config.service_port)


def stage_review_export(config: PipelineConfig, session_id: str, out: Optional[str] = None) -> list[Path]:
    from .review.core import ReviewStore
    from .review.service import export_session

    store = ReviewStore(config.path("review"))
    out_dir = Path(out) if out else config.path(f"review_export/{session_id}")
    return export_session(store, session_id, out_dir)


STAGES = {
    "ingest": stage_ingest,
    "dedup": stage_dedup,
    "stats": stage_stats,
    "extract": stage_extract,
    "embed": stage_embed,
    "pairs": stage_pairs,
    "sample": stage_sample,
    "llm-summarize": stage_llm_summarize,
    "llm-scan": stage_llm_scan,
    "report": stage_report,
}


def run_stage(stage_name: str, config: PipelineConfig, **kwargs) -> tuple[int, list[Path]]:
    """Run one pipeline stage; returns (exit_code, artifact paths)."""
    if stage_name not in STAGES:
        raise ConfigError(f"unknown stage {stage_name!r}")
    try:
        artifacts = STAGES[stage_name](config, **kwargs)
    except MissingPrerequisite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING, []
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, []
    except (llmdoc.ProviderError, embed_mod.TransportError) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER, []
    _write_manifest(config, stage_name, artifacts)
    for path in artifacts:
        print(path)
    return EXIT_OK, artifacts


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solclone", description=__doc__)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--out-dir", help="artifact directory override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest address list and fetch sources")
    p.add_argument("--addresses", help="address/activity CSV")
    p.add_argument("--sources", help="directory of <address>.sol sources")
    p.add_argument("--min-tx", type=int)
    p.add_argument("--cutoff", help="RFC 3339 activity cutoff")
    p.add_argument("--out", help="corpus directory")

    p = sub.add_parser("dedup", help="collapse whitespace-equal duplicates")
    p.add_argument("--corpus", help="corpus directory")

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--corpus", help="corpus directory")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("extract", help="extract function records")
    p.add_argument("--corpus", help="corpus directory")
    p.add_argument("--out", help="functions JSONL path")
    p.add_argument("--keep-all-visibilities", action="store_true",
                   help="keep every function instead of the filtered working set")
    p.add_argument("--min-comment-tokens", type=int)
    p.add_argument("--csv", help="also export the records as CSV here")

    p = sub.add_parser("embed", help="compute code/comment embeddings")

    p = sub.add_parser("pairs", help="generate, score and classify pairs")
    p.add_argument("--functions", help="functions JSONL path")
    p.add_argument("--policy", choices=[p.value for p in pairs_mod.PairingPolicy])
    p.add_argument("--code-threshold", type=float)
    p.add_argument("--comment-threshold", type=float)
    p.add_argument("--out", help="pairs JSONL path")
    p.add_argument("--stripe-report", help="stripe populations JSON path")

    p = sub.add_parser("sample", help="stratified sample of scored pairs")
    p.add_argument("--pairs", help="pairs JSONL path")
    p.add_argument("--set", default="candidate", choices=("candidate", "baseline", "supplementary"))
    p.add_argument("--n", default="auto", help="sample size or 'auto'")
    p.add_argument("--confidence", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", help="sample JSONL path")

    review = sub.add_parser("review", help="human validation service")
    review_sub = review.add_subparsers(dest="review_command", required=True)
    p = review_sub.add_parser("serve", help="run the review HTTP service")
    p.add_argument("--port", type=int)
    p.add_argument("--functions", help="functions JSONL for pair payloads")
    p.add_argument("--ui", help="directory of built UI static files")
    p = review_sub.add_parser("export", help="export session snapshots")
    p.add_argument("--session", required=True)
    p.add_argument("--out")

    llm = sub.add_parser("llm", help="LLM documentation tasks")
    llm_sub = llm.add_subparsers(dest="llm_command", required=True)
    p = llm_sub.add_parser("summarize", help="summarize functions")
    p.add_argument("--functions", help="functions JSONL path")
    p.add_argument("--style", choices=("base", "structured"), default="base")
    p.add_argument("--provider", choices=("stub", "http", "replay"),
                   help="provider kind override (endpoint/model come from the config)")
    p = llm_sub.add_parser("scan", help="hidden-clone scan over uncommented functions")
    p.add_argument("--top-contracts", type=int)
    p.add_argument("--min-words", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--addresses", help="address CSV for activity ranking")

    p = sub.add_parser("report", help="render table-shaped outputs")
    p.add_argument("--review-export", help="directory produced by `review export`")

    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides: dict = {}
    if args.out_dir:
        overrides["out_dir"] = args.out_dir
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    for attr, key in (
        ("addresses", "addresses_csv"),
        ("sources", "sources_dir"),
        ("corpus", "corpus_dir"),
        ("min_tx", "min_tx"),
        ("cutoff", "cutoff"),
        ("min_comment_tokens", "min_comment_tokens"),
        ("policy", "pairing_policy"),
        ("code_threshold", "code_threshold"),
        ("comment_threshold", "comment_threshold"),
        ("confidence", "confidence"),
        ("margin", "margin"),
        ("port", "service_port"),
        ("top_contracts", "top_contracts"),
        ("min_words", "min_words"),
        ("threshold", "scan_threshold"),
    ):
        if getattr(args, attr, None) is not None:
            overrides[key] = getattr(args, attr)
    if args.command == "ingest" and getattr(args, "out", None):
        overrides["corpus_dir"] = args.out
    return load_config(args.config, overrides)


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    command = args.command
    if command == "review":
        if args.review_command == "serve":
            stage_review_serve(config, functions_path=args.functions, ui=args.ui)
            return EXIT_OK
        try:
            artifacts = stage_review_export(config, args.session, out=args.out)
        except KeyError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_MISSING
        for path in artifacts:
            print(path)
        return EXIT_OK
    if command == "llm":
        if args.llm_command == "summarize":
            if args.provider:
                config.provider = {**config.provider, "kind": args.provider}
            code, _ = run_stage(
                "llm-summarize", config, style=args.style, functions_path=args.functions
            )
        else:
            code, _ = run_stage("llm-scan", config)
        return code
    if command == "sample":
        n = None if args.n == "auto" else int(args.n)
        code, _ = run_stage(
            "sample", config, set_label=args.set, n=n, out=args.out, pairs_path=args.pairs
        )
        return code
    if command == "pairs":
        code, _ = run_stage(
            "pairs",
            config,
            functions_path=args.functions,
            out=args.out,
            stripe_report=args.stripe_report,
        )
        return code
    if command == "extract":
        code, _ = run_stage(
            "extract",
            config,
            keep_all_visibilities=args.keep_all_visibilities,
            csv_out=args.csv,
            out=args.out,
        )
        return code
    if command == "stats":
        code, _ = run_stage("stats", config, fmt=args.format)
        return code
    if command == "report":
        code, _ = run_stage("report", config, review_export=args.review_export)
        return code
    code, _ = run_stage(command, config)
    return code


if __name__ == "__main__":
    sys.exit(main())
