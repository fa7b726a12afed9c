"""Command-line front-end: ingest -> analyze -> report.

One JSON config file (or equivalent flags; flags win) drives every
stage.  All randomness flows from a single seed, resolved as:
``--seed`` flag, then config key, then the STYLO_SEED environment
variable, then 0.  Artifacts are never overwritten without ``--force``;
the run report is the one exception, since it describes the run that
wrote it.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shutil
import sys
import tempfile
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .compression import builtin_compressors, get_compressor, ncd_matrix, ncd_tree, save_ncd_json
from .corpus import (
    CanonicalRules,
    Chunk,
    CorpusError,
    canonicalize,
    load_corpus,
    load_manifest,
    segment_chunks,
    words,
)
from .distance import (
    DELTA_KINDS,
    cluster,
    delta_grid,
    dendrogram_dot,
    dendrogram_json,
    pairwise,
    save_distance_csv,
)
from .features import (
    FeatureSpec,
    Featurizer,
    build_vocabulary,
    extract,
    save_csv,
    tokenize,
    zscore,
)
from .learn import attribute, cross_validate, train
from .projection import fit_lda, fit_pca, save_points_csv, transform
from .svgplot import svg_dendrogram, svg_heatmap, svg_line, svg_scatter
from .unmasking import UnmaskingConfig, build_curve_dataset, save_curves_csv, save_curves_json, train_meta, verify

ANALYSES = ("delta", "ncd", "pca", "classify", "unmask")

# feature kinds the CLI grid runs; pos needs sidecar annotations the CLI
# does not manage, so it is API-only
CLI_FEATURE_KINDS = (
    "stopwords", "bow", "cng", "lexical", "punctuation",
    "lexical_punct", "word_ngrams_tfidf", "char_ngrams_tfidf", "total",
)

CLI_CLASSIFIERS = (
    "ridge", "bernoulli_nb", "multinomial_nb", "nearest_centroid",
    "linear_svm", "svm_rbf", "maxent", "sgd_hinge",
)


class CliError(Exception):
    """Configuration or artifact error surfaced as exit code 1."""


@dataclass
class RunConfig:
    """Everything one run needs; unknown config keys are rejected."""

    manifest: str | None = None
    out_dir: str = "stylo_out"
    seed: int | None = None
    compressor: str = "bz2"
    analyses: list[str] = field(default_factory=lambda: list(ANALYSES))
    features: list[str] = field(default_factory=lambda: list(CLI_FEATURE_KINDS))
    classifiers: list[str] = field(default_factory=lambda: list(CLI_CLASSIFIERS))
    mfw: list[int] = field(default_factory=lambda: [100, 300])
    culling: list[float] = field(default_factory=lambda: [0.0, 50.0])
    delta_kinds: list[str] = field(default_factory=lambda: list(DELTA_KINDS))
    folds: int = 10
    pca_components: list[int] = field(default_factory=lambda: [2, 3, 5, 10, 15])
    pca_mfw: list[int] = field(default_factory=lambda: [25, 50, 150, 300])
    linkage: str = "average"
    unmasking: dict = field(default_factory=lambda: {"n": 250, "k": 6, "m": 8, "cv_folds": 10})
    plots: bool = False
    jobs: int = 1
    force: bool = False

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        env = os.environ.get("STYLO_SEED")
        if env is not None:
            try:
                return int(env)
            except ValueError as exc:
                raise CliError(f"STYLO_SEED must be an integer, got {env!r}") from exc
        return 0


def load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise CliError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise CliError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}")
    return replace(cfg, **raw)


def _validate_config(cfg: RunConfig) -> None:
    for a in cfg.analyses:
        if a not in ANALYSES:
            raise CliError(f"unknown analysis {a!r}; choose from {ANALYSES}")
    for f_kind in cfg.features:
        if f_kind not in CLI_FEATURE_KINDS:
            raise CliError(f"unknown feature kind {f_kind!r}")
    for c in cfg.classifiers:
        if c not in CLI_CLASSIFIERS:
            raise CliError(f"unknown classifier {c!r}")
    for k in cfg.delta_kinds:
        if k not in DELTA_KINDS:
            raise CliError(f"unknown delta kind {k!r}")
    if cfg.compressor not in builtin_compressors():
        raise CliError(f"unknown compressor {cfg.compressor!r}")
    if cfg.folds < 2:
        raise CliError("folds must be at least 2")
    if cfg.jobs < 1:
        raise CliError("jobs must be at least 1")


# ---------------------------------------------------------------------------
# run report plumbing


class RunReport:
    """Per-stage status, timing, artifacts, and warnings for one command."""

    def __init__(self, command: str, cfg: RunConfig) -> None:
        self.payload: dict = {
            "version": __version__,
            "command": command,
            "config": {f.name: getattr(cfg, f.name) for f in fields(RunConfig)},
            "stages": [],
        }

    def run_stage(self, name: str, fn) -> bool:
        entry: dict = {"name": name, "status": "ok", "artifacts": [], "warnings": []}
        t0 = time.perf_counter()
        try:
            result = fn(entry)
            if result:
                entry["artifacts"].extend(result)
        except Exception as exc:  # stage failures must not kill later stages
            entry["status"] = "error"
            entry["error"] = f"{type(exc).__name__}: {exc}"
        entry["seconds"] = round(time.perf_counter() - t0, 3)
        self.payload["stages"].append(entry)
        ok = entry["status"] == "ok"
        marker = "done" if ok else "FAILED"
        print(f"[stylo] {name}: {marker} ({entry['seconds']}s)", file=sys.stderr)
        if not ok:
            print(f"[stylo]   {entry['error']}", file=sys.stderr)
        return ok

    def write(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "run_report.json"
        path.write_text(
            json.dumps(self.payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    @property
    def all_ok(self) -> bool:
        return all(s["status"] == "ok" for s in self.payload["stages"])


def _emit(cfg: RunConfig, path: Path, write_fn) -> str:
    """Write one artifact with overwrite protection."""
    if path.exists() and not cfg.force:
        raise CliError(f"refusing to overwrite {path} (pass --force)")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_fn(str(path))
    return str(path)


def _emit_text(cfg: RunConfig, path: Path, text: str) -> str:
    return _emit(cfg, path, lambda p: Path(p).write_text(text, encoding="utf-8"))


def _emit_json(cfg: RunConfig, path: Path, payload) -> str:
    text = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    return _emit_text(cfg, path, text)


# ---------------------------------------------------------------------------
# ingest


def cmd_ingest(cfg: RunConfig) -> int:
    if cfg.manifest is None:
        raise CliError("ingest needs --manifest")
    report = RunReport("ingest", cfg)
    out = Path(cfg.out_dir)

    def stage(entry: dict) -> list[str]:
        manifest = load_manifest(cfg.manifest)
        docs = load_corpus(manifest)
        rules = CanonicalRules()
        artifacts = []
        doc_rows = []
        chunk_rows = []
        for doc in docs:
            canon = canonicalize(doc, rules)
            chunks = segment_chunks(canon, manifest.min_chunk_words)
            artifacts.append(_emit_text(
                cfg, out / "ingest" / "canonical" / f"{doc.id}.txt", canon.canonical_text,
            ))
            doc_rows.append({
                "id": doc.id,
                "author": doc.author,
                "title": doc.title,
                "year": doc.year,
                "variant_tag": doc.variant_tag,
                "words": sum(c.word_count for c in chunks),
                "chunks": len(chunks),
            })
            for c in chunks:
                if c.short_flag:
                    entry["warnings"].append(
                        f"{doc.id}: single chunk below {manifest.min_chunk_words} words"
                    )
                chunk_rows.append({
                    "doc_id": c.doc_id,
                    "index": c.index,
                    "word_count": c.word_count,
                    "short_flag": c.short_flag,
                    "text": c.text,
                })
        artifacts.append(_emit_json(cfg, out / "ingest" / "corpus.json", {
            "min_chunk_words": manifest.min_chunk_words,
            "documents": doc_rows,
        }))
        artifacts.append(_emit_json(cfg, out / "ingest" / "chunks.json", chunk_rows))
        return artifacts

    ok = report.run_stage("ingest", stage)
    report.write(out)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# analyze


class _Cache:
    """Ingest artifacts loaded back into memory."""

    def __init__(self, out_dir: Path) -> None:
        corpus_path = out_dir / "ingest" / "corpus.json"
        chunks_path = out_dir / "ingest" / "chunks.json"
        if not corpus_path.exists() or not chunks_path.exists():
            raise CliError(
                f"no ingest cache under {out_dir}; run `stylo ingest` first"
            )
        corpus_info = json.loads(corpus_path.read_text(encoding="utf-8"))
        chunk_rows = json.loads(chunks_path.read_text(encoding="utf-8"))
        self.min_chunk_words: int = corpus_info["min_chunk_words"]
        self.docs: list[dict] = corpus_info["documents"]
        self.author_of: dict[str, str | None] = {d["id"]: d["author"] for d in self.docs}
        self.chunks: list[Chunk] = []
        for row in chunk_rows:
            toks = words(row["text"])
            self.chunks.append(Chunk(
                doc_id=row["doc_id"],
                index=row["index"],
                tokens=toks,
                word_count=row["word_count"],
                short_flag=row["short_flag"],
                text=row["text"],
            ))
        self.canonical: dict[str, str] = {}
        for d in self.docs:
            path = out_dir / "ingest" / "canonical" / f"{d['id']}.txt"
            self.canonical[d["id"]] = path.read_text(encoding="utf-8")

    def labeled_chunks(self) -> tuple[list[Chunk], list[str]]:
        out = [(c, self.author_of[c.doc_id]) for c in self.chunks
               if self.author_of[c.doc_id] is not None]
        return [c for c, _ in out], [a for _, a in out]

    def query_chunks(self) -> list[Chunk]:
        return [c for c in self.chunks if self.author_of[c.doc_id] is None]

    def query_ids(self) -> list[str]:
        return [d["id"] for d in self.docs if d["author"] is None]


def _streams(chunks: list[Chunk]):
    return [tokenize(c.text, f"{c.doc_id}:{c.index}") for c in chunks]


def _stage_delta(cfg: RunConfig, cache: _Cache, out: Path, seed: int, entry: dict) -> list[str]:
    # delta works document-level: one sample per labeled work, so culling
    # document frequencies count original documents
    labeled = [d for d in cache.docs if d["author"] is not None]
    streams = [tokenize(cache.canonical[d["id"]], d["id"]) for d in labeled]
    labels = [d["author"] for d in labeled]
    rows = delta_grid(streams, labels, cfg.mfw, cfg.culling, cfg.delta_kinds)
    artifacts = []

    def write_grid(path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([
                "mfw", "culling", "kind", "ingroup_mean", "outgroup_mean",
                "pooled_sd", "raw_difference", "standardized_difference",
            ])
            for r in rows:
                s = r.score
                writer.writerow([
                    r.mfw, r.culling, r.kind,
                    repr(s.ingroup_mean), repr(s.outgroup_mean), repr(s.pooled_sd),
                    repr(s.raw_difference), repr(s.standardized_difference),
                ])

    artifacts.append(_emit(cfg, out / "delta" / "delta_grid.csv", write_grid))
    best = rows[0]
    entry["warnings"].append(
        f"best cell: {best.kind} mfw={best.mfw} culling={best.culling}"
    )
    vocab = build_vocabulary(streams, unit="word", mfw=best.mfw, culling=best.culling)
    fm = extract(streams, FeatureSpec(kind="bow", mfw=best.mfw, culling=best.culling), vocab)
    dist = pairwise(fm, best.kind)
    artifacts.append(_emit(cfg, out / "delta" / "best_distances.csv",
                           lambda p: save_distance_csv(dist, p)))
    dend = cluster(dist, linkage=cfg.linkage)
    artifacts.append(_emit_text(cfg, out / "delta" / "dendrogram.dot", dendrogram_dot(dend)))
    artifacts.append(_emit_text(cfg, out / "delta" / "dendrogram.json", dendrogram_json(dend)))
    if cfg.plots:
        artifacts.append(_emit(cfg, out / "delta" / "dendrogram.svg",
                               lambda p: svg_dendrogram(dend, p, title=f"{best.kind} delta")))
    return artifacts


def _stage_ncd(cfg: RunConfig, cache: _Cache, out: Path, seed: int, entry: dict) -> list[str]:
    compressor = get_compressor(cfg.compressor)
    artifacts = []
    profiles: dict[str, str] = {}
    for d in cache.docs:
        if d["author"] is None:
            continue
        text = cache.canonical[d["id"]]
        if d["author"] in profiles:
            profiles[d["author"]] += "\n\n" + text
        else:
            profiles[d["author"]] = text
    profile_samples = [(a, profiles[a]) for a in sorted(profiles)]
    for qid in cache.query_ids():
        profile_samples.append((qid, cache.canonical[qid]))
    instance_samples = [(d["id"], cache.canonical[d["id"]]) for d in cache.docs]

    for name, samples, mode in (
        ("profile", profile_samples, "profile"),
        ("instance", instance_samples, "instance"),
    ):
        if len(samples) < 2:
            entry["warnings"].append(f"{name} mode skipped: fewer than 2 samples")
            continue
        matrix = ncd_matrix(samples, compressor, mode=mode)
        artifacts.append(_emit(cfg, out / "ncd" / f"ncd_{name}.json",
                               lambda p, m=matrix: save_ncd_json(m, p)))

        def write_csv(path: str, m=matrix) -> None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["id"] + list(m.ids))
                for sid, row in zip(m.ids, m.values):
                    writer.writerow([sid] + [repr(float(v)) for v in row])

        artifacts.append(_emit(cfg, out / "ncd" / f"ncd_{name}.csv", write_csv))
        tree = ncd_tree(matrix, linkage=cfg.linkage)
        artifacts.append(_emit_text(
            cfg, out / "ncd" / f"tree_{name}.dot", dendrogram_dot(tree, unrooted=True),
        ))
        if cfg.plots:
            artifacts.append(_emit(
                cfg, out / "ncd" / f"heatmap_{name}.svg",
                lambda p, m=matrix: svg_heatmap(
                    m.ids, m.values, p, title=f"NCD {m.mode} ({m.compressor_id})",
                ),
            ))
    return artifacts


def _stage_pca(cfg: RunConfig, cache: _Cache, out: Path, seed: int, entry: dict) -> list[str]:
    chunks, labels = cache.labeled_chunks()
    queries = cache.query_chunks()
    all_chunks = chunks + queries
    all_labels = labels + ["query"] * len(queries)
    streams = _streams(all_chunks)
    artifacts = []
    variance_rows = []
    for mfw in cfg.pca_mfw:
        vocab = build_vocabulary(streams, unit="word", mfw=mfw)
        fm = zscore(extract(streams, FeatureSpec(kind="bow", mfw=mfw), vocab))
        cap = min(fm.n_samples - 1, fm.n_features)
        for k in cfg.pca_components:
            if k > cap:
                entry["warnings"].append(f"pca mfw={mfw} k={k} skipped: k > {cap}")
                continue
            model = fit_pca(fm, k)
            variance_rows.append((mfw, k, sum(model.explained_variance_ratio)))

    def write_variance(path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mfw", "components", "explained_variance"])
            for mfw, k, v in variance_rows:
                writer.writerow([mfw, k, repr(v)])

    artifacts.append(_emit(cfg, out / "projection" / "pca_variance.csv", write_variance))

    scatter_mfw = max(cfg.pca_mfw)
    vocab = build_vocabulary(streams, unit="word", mfw=scatter_mfw)
    fm = zscore(extract(streams, FeatureSpec(kind="bow", mfw=scatter_mfw), vocab))
    if min(fm.n_samples - 1, fm.n_features) >= 2:
        model = fit_pca(fm, 2)
        points = transform(model, fm, all_labels)
        artifacts.append(_emit(cfg, out / "projection" / "pca_points.csv",
                               lambda p: save_points_csv(points, p)))
        if cfg.plots:
            artifacts.append(_emit(
                cfg, out / "projection" / "pca_scatter.svg",
                lambda p: svg_scatter(points, p, title=f"PCA {scatter_mfw} mfw",
                                      highlight=("query",)),
            ))
    classes = sorted(set(labels))
    if len(classes) >= 2 and all(labels.count(c) >= 2 for c in classes):
        lab_streams = _streams(chunks)
        vocab = build_vocabulary(lab_streams, unit="word", mfw=scatter_mfw)
        lab_fm = zscore(extract(lab_streams, FeatureSpec(kind="bow", mfw=scatter_mfw), vocab))
        k = min(2, len(classes) - 1)
        model = fit_lda(lab_fm, labels, k)
        points = transform(model, lab_fm, labels)
        artifacts.append(_emit(cfg, out / "projection" / "lda_points.csv",
                               lambda p: save_points_csv(points, p)))
        if cfg.plots and k == 2:
            artifacts.append(_emit(
                cfg, out / "projection" / "lda_scatter.svg",
                lambda p: svg_scatter(points, p, title="LDA"),
            ))
    else:
        entry["warnings"].append("lda skipped: need 2 classes with 2 samples each")
    return artifacts


def _stage_classify(cfg: RunConfig, cache: _Cache, out: Path, seed: int, entry: dict) -> list[str]:
    chunks, labels = cache.labeled_chunks()
    streams = _streams(chunks)
    queries = cache.query_chunks()
    query_streams = _streams(queries) if queries else []
    artifacts = []
    ranking_rows = []
    details = {}
    attribution_entries = []
    folds = cfg.folds
    n = len(labels)
    if folds > n:
        raise CliError(f"{folds} folds for {n} labeled chunks")
    for feat in cfg.features:
        featurizer = Featurizer(FeatureSpec.for_kind(feat))
        fm = featurizer.fit_transform(streams)
        query_fm = featurizer.transform(query_streams) if query_streams else None
        for kind in cfg.classifiers:
            report = cross_validate(kind, fm, labels, folds=folds, seed=seed)
            ranking_rows.append({
                "algorithm": kind,
                "features": feat,
                "precision": report.macro_precision,
                "recall": report.macro_recall,
                "f_score": report.macro_f1,
                "accuracy": report.accuracy,
            })
            details[f"{kind}+{feat}"] = report.to_dict()
            if query_fm is not None:
                model = train(kind, fm, labels, seed=seed)
                attribution_entries.append((kind, feat, model, query_fm))
    ranking_rows.sort(key=lambda r: (
        -r["f_score"], -r["precision"], -r["recall"], r["algorithm"], r["features"],
    ))

    def write_ranking(path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["algorithm", "features", "precision", "recall", "f_score", "accuracy"])
            for r in ranking_rows:
                writer.writerow([
                    r["algorithm"], r["features"],
                    repr(r["precision"]), repr(r["recall"]),
                    repr(r["f_score"]), repr(r["accuracy"]),
                ])

    artifacts.append(_emit(cfg, out / "classify" / "rankings.csv", write_ranking))
    artifacts.append(_emit_json(cfg, out / "classify" / "details.json", details))
    if attribution_entries:
        result = attribute(attribution_entries)
        artifacts.append(_emit_json(cfg, out / "classify" / "attribution.json", result.to_dict()))

        def write_attr(path: str) -> None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["candidate", "wins", "average_chunks"])
                for cand, wins, avg in result.ranking():
                    writer.writerow([cand, wins, repr(avg)])

        artifacts.append(_emit(cfg, out / "classify" / "attribution.csv", write_attr))
    return artifacts


def _stage_unmask(cfg: RunConfig, cache: _Cache, out: Path, seed: int, entry: dict) -> list[str]:
    ucfg = UnmaskingConfig(seed=seed, **cfg.unmasking)
    by_doc: dict[str, list[Chunk]] = {}
    for c in cache.chunks:
        by_doc.setdefault(c.doc_id, []).append(c)
    works = []
    for d in cache.docs:
        if d["author"] is not None:
            works.append((d["id"], d["author"], by_doc[d["id"]]))
    dataset = build_curve_dataset(works, ucfg)
    for pair in dataset.skipped:
        entry["warnings"].append(f"pair {pair} skipped: too few chunks")
    artifacts = []
    artifacts.append(_emit(cfg, out / "unmask" / "curves.csv",
                           lambda p: save_curves_csv(dataset.curves, p)))
    artifacts.append(_emit(cfg, out / "unmask" / "curves.json",
                           lambda p: save_curves_json(dataset.curves, p)))
    meta = train_meta(dataset, ucfg)
    verdicts = {}
    query_curves = []
    candidates = {a: [c for _, auth, cl in works if auth == a for c in cl]
                  for a in sorted({w[1] for w in works})}
    for qid in cache.query_ids():
        q_chunks = by_doc.get(qid, [])
        if len(q_chunks) < ucfg.cv_folds:
            entry["warnings"].append(
                f"query {qid} skipped: {len(q_chunks)} chunks < cv_folds={ucfg.cv_folds}"
            )
            continue
        verdict = verify(q_chunks, candidates, meta, ucfg, query_id=qid)
        verdicts[qid] = verdict.to_dict()
    if verdicts:
        artifacts.append(_emit_json(cfg, out / "unmask" / "verdicts.json", verdicts))
    if cfg.plots:
        series = [
            (f"{c.pair[0]} vs {c.pair[1]} ({c.label})", c.accuracies)
            for c in dataset.curves[:10]
        ]
        artifacts.append(_emit(
            cfg, out / "unmask" / "curves.svg",
            lambda p: svg_line(series, p, title="degradation curves", y_range=(0.0, 1.0)),
        ))
    return artifacts


_STAGES = {
    "delta": _stage_delta,
    "ncd": _stage_ncd,
    "pca": _stage_pca,
    "classify": _stage_classify,
    "unmask": _stage_unmask,
}


def cmd_analyze(cfg: RunConfig) -> int:
    _validate_config(cfg)
    out = Path(cfg.out_dir)
    seed = cfg.resolved_seed()
    report = RunReport("analyze", cfg)
    try:
        cache = _Cache(out)
    except CliError as exc:
        print(f"[stylo] {exc}", file=sys.stderr)
        return 1
    for name in ANALYSES:
        if name not in cfg.analyses:
            continue
        fn = _STAGES[name]
        report.run_stage(
            name, lambda entry, fn=fn: fn(cfg, cache, out, seed, entry),
        )
    report.write(out)
    return 0 if report.all_ok else 2


# ---------------------------------------------------------------------------
# report


def cmd_report(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    if not out.is_dir():
        print(f"[stylo] no run directory at {out}", file=sys.stderr)
        return 1
    summary: dict = {}
    lines: list[str] = [f"stylo {__version__} run summary", ""]

    grid_path = out / "delta" / "delta_grid.csv"
    if grid_path.exists():
        with open(grid_path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        if rows:
            best = rows[0]
            summary["delta_best"] = best
            lines.append(
                f"best delta cell: {best['kind']} at mfw={best['mfw']} "
                f"culling={best['culling']} "
                f"(standardized difference {float(best['standardized_difference']):.4g})"
            )

    ncd_path = out / "ncd" / "ncd_instance.json"
    corpus_path = out / "ingest" / "corpus.json"
    if ncd_path.exists() and corpus_path.exists():
        payload = json.loads(ncd_path.read_text(encoding="utf-8"))
        corpus_info = json.loads(corpus_path.read_text(encoding="utf-8"))
        queries = [d["id"] for d in corpus_info["documents"] if d["author"] is None]
        neighbors = {}
        for qid in queries:
            if qid not in payload["ids"]:
                continue
            qi = payload["ids"].index(qid)
            row = payload["values"][qi]
            ranked = sorted(
                (sid for sid in payload["ids"] if sid != qid),
                key=lambda sid: (row[payload["ids"].index(sid)], sid),
            )
            neighbors[qid] = ranked[:5]
            lines.append(f"NCD nearest to {qid}: {', '.join(ranked[:3])}")
        if neighbors:
            summary["ncd_neighbors"] = neighbors

    rank_path = out / "classify" / "rankings.csv"
    if rank_path.exists():
        with open(rank_path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        summary["classifier_ranking"] = rows[:10]
        lines.append("")
        lines.append("top classifier runs (algorithm, features, F-score):")
        for r in rows[:5]:
            lines.append(f"  {r['algorithm']} + {r['features']}: {float(r['f_score']):.4f}")

    attr_path = out / "classify" / "attribution.json"
    if attr_path.exists():
        payload = json.loads(attr_path.read_text(encoding="utf-8"))
        summary["attribution"] = payload["ranking"]
        lines.append("")
        lines.append("attribution (candidate, wins, average chunks):")
        for row in payload["ranking"]:
            lines.append(
                f"  {row['candidate']}: {row['wins']} wins, "
                f"{row['average_chunks']:.2f} avg"
            )

    verdict_path = out / "unmask" / "verdicts.json"
    if verdict_path.exists():
        payload = json.loads(verdict_path.read_text(encoding="utf-8"))
        summary["verdicts"] = payload
        lines.append("")
        for qid, v in payload.items():
            outcome = v["outcome"] or "no candidate matched"
            lines.append(f"unmasking verdict for {qid}: {outcome}")

    if not summary:
        print(f"[stylo] no analysis artifacts under {out}", file=sys.stderr)
        return 1
    text = "\n".join(lines) + "\n"
    (out / "summary.json").write_text(
        json.dumps(summary, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    (out / "summary.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# compressors, selftest


def cmd_compressors(action: str) -> int:
    if action != "list":
        print(f"[stylo] unknown compressors action {action!r}", file=sys.stderr)
        return 1
    for cid, comp in sorted(builtin_compressors().items()):
        print(f"{cid}\tlevel={comp.level}")
    print("external\t(configure via make_external_compressor; disabled by default)")
    return 0


def cmd_selftest(keep_dir: str | None = None) -> int:
    """Generate a small synthetic corpus and drive the whole pipeline."""
    from .synth import write_corpus

    tmp = keep_dir or tempfile.mkdtemp(prefix="stylo_selftest_")
    base = Path(tmp)
    failures = []

    def check(name: str, ok: bool) -> None:
        print(f"[selftest] {name}: {'PASS' if ok else 'FAIL'}")
        if not ok:
            failures.append(name)

    try:
        manifest = write_corpus(
            base / "corpus",
            authors=["alfa", "beta", "gamma"],
            works_per_author=3,
            words_per_work=2400,
            seed=7,
            query_author="alfa",
        )
        cfg = RunConfig(
            manifest=str(manifest),
            out_dir=str(base / "run"),
            seed=7,
            analyses=["delta", "ncd", "classify", "unmask"],
            features=["stopwords", "bow"],
            classifiers=["ridge", "nearest_centroid"],
            mfw=[100],
            culling=[0.0],
            delta_kinds=["burrows", "cosine_delta"],
            folds=4,
            unmasking={"n": 80, "k": 3, "m": 5, "cv_folds": 4},
        )
        check("ingest exit 0", cmd_ingest(cfg) == 0)
        check("analyze exit 0", cmd_analyze(cfg) == 0)
        check("report exit 0", cmd_report(cfg) == 0)
        out = Path(cfg.out_dir)
        check("delta grid written", (out / "delta" / "delta_grid.csv").exists())
        check("ncd matrix written", (out / "ncd" / "ncd_profile.json").exists())
        attr = json.loads((out / "classify" / "attribution.json").read_text(encoding="utf-8"))
        top = attr["ranking"][0]["candidate"]
        check("attribution names the true author", top == "alfa")
        verdicts = json.loads((out / "unmask" / "verdicts.json").read_text(encoding="utf-8"))
        check("unmasking matches the true author",
              "alfa" in verdicts["query"]["matched"])
    finally:
        if keep_dir is None:
            shutil.rmtree(tmp, ignore_errors=True)
        else:
            print(f"[selftest] artifacts kept under {tmp}")
    print(f"[selftest] {'OK' if not failures else 'FAILED: ' + ', '.join(failures)}")
    return 0 if not failures else 1


# ---------------------------------------------------------------------------
# argument parsing


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _str_list(text: str) -> list[str]:
    return [v for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stylo",
        description="Batch authorship attribution: distances, compression, "
                    "projections, classifiers, and open-set verification.",
    )
    parser.add_argument("--version", action="version", version=f"stylo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--out", dest="out_dir", help="run directory")
    common.add_argument("--seed", type=int, help="seed (overrides config and STYLO_SEED)")
    common.add_argument("--force", action="store_true", help="allow overwriting artifacts")

    p_ingest = sub.add_parser("ingest", parents=[common],
                              help="canonicalize and chunk the corpus")
    p_ingest.add_argument("--manifest", help="corpus manifest JSON")

    p_an = sub.add_parser("analyze", parents=[common], help="run selected analyses")
    p_an.add_argument("--analysis", type=_str_list,
                      help=f"comma list from {ANALYSES} or 'all'")
    p_an.add_argument("--mfw", type=_int_list, help="delta grid mfw values")
    p_an.add_argument("--culling", type=_float_list, help="delta grid culling percents")
    p_an.add_argument("--delta-kinds", type=_str_list, dest="delta_kinds")
    p_an.add_argument("--features", type=_str_list, help="feature kinds for classify")
    p_an.add_argument("--classifiers", type=_str_list)
    p_an.add_argument("--folds", type=int)
    p_an.add_argument("--compressor")
    p_an.add_argument("--linkage", choices=["average", "complete", "single"])
    p_an.add_argument("--plots", action="store_true")
    p_an.add_argument("--jobs", type=int, help="worker bound (analyses are single-process)")

    sub.add_parser("report", parents=[common], help="summarize a run directory")

    p_comp = sub.add_parser("compressors", help="compressor registry")
    p_comp.add_argument("action", choices=["list"])

    p_self = sub.add_parser("selftest", help="run the pipeline on a synthetic corpus")
    p_self.add_argument("--keep", metavar="DIR", help="keep artifacts under DIR")
    return parser


def _merge_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    for name in ("manifest", "out_dir", "seed", "compressor", "folds",
                 "mfw", "culling", "delta_kinds", "features", "classifiers",
                 "linkage", "jobs"):
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if getattr(args, "plots", False):
        updates["plots"] = True
    if getattr(args, "force", False):
        updates["force"] = True
    analysis = getattr(args, "analysis", None)
    if analysis is not None:
        updates["analyses"] = list(ANALYSES) if analysis == ["all"] else analysis
    return replace(cfg, **updates)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compressors":
            return cmd_compressors(args.action)
        if args.command == "selftest":
            return cmd_selftest(args.keep)
        cfg = _merge_flags(load_config(args.config), args)
        if args.command == "ingest":
            return cmd_ingest(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "report":
            return cmd_report(cfg)
        raise CliError(f"unknown command {args.command!r}")
    except (CliError, CorpusError) as exc:
        print(f"[stylo] error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
