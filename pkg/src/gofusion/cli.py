"""Command-line pipeline: distances, balancing, clustering, assignment,
enrichment, inference and evaluation, each also exposed as a subcommand.

Configuration is a flat ``key = value`` file; every key can be overridden
by a command-line flag of the same name, and the flag wins.  Every run
writes ``run_manifest.json`` with all resolved parameters, input digests
and tool versions, which is sufficient to reproduce the run byte for byte
(``pipeline --from-manifest``).  Exit codes: 0 ok, 2 config error, 3 data
error, 4 numeric/degenerate error.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from dataclasses import dataclass, fields
from hashlib import sha256
from pathlib import Path

import numpy as np

from . import __version__
from .annotations import AnnotationCorpus, build_corpus, load_annotations
from .clustering import (
    PAM_BUILD,
    Cluster,
    Partition,
    SEEDINGS,
    assign_b,
    assigned_subpartition,
    cluster_a,
    partition_metadata,
    read_partition_tsv,
    write_partition_tsv,
)
from .enrichment import (
    CORRECTIONS,
    enrich_partition,
    export_term_graph,
    infer_functions,
    write_enrichment_tsv,
    write_inferred_tsv,
)
from .errors import ConfigError, DataError, GofusionError
from .expression import (
    METRICS,
    DistanceMatrix,
    ExpressionMatrix,
    expression_distance_matrix,
    load_expression,
    read_distance_tsv,
    write_distance_tsv,
)
from .fusion import combine_gamma, percentile_equalize, tune_gamma
from .metrics import (
    MetricReport,
    bc,
    bhi,
    fowlkes_mallows,
    label_counts,
    popular_terms,
    recall_inferred,
    semantic_compactness,
)
from .ontology import Ontology, parse_obo
from .semantic import SIMILARITY_KINDS, semantic_distance_matrix
from .synth import make_dataset, write_dataset

BALANCINGS = ("percentile", "gamma_tuning", "fixed_gamma")
ASSIGN_DISTANCES = ("raw", "equalized")

_PATH_KEYS = (
    "obo",
    "annotations",
    "expression_a",
    "expression_b",
    "truth",
    "d_e",
    "d_go",
    "partition",
    "inferred",
    "against",
    "out_dir",
)
_STR_KEYS = {
    "namespace": None,
    "metric": METRICS,
    "similarity": SIMILARITY_KINDS,
    "balancing": BALANCINGS,
    "correction": CORRECTIONS,
    "seeding": SEEDINGS,
    "assign_distance": ASSIGN_DISTANCES,
}
_FLOAT_KEYS = ("gamma", "grid_step", "split", "alpha")
_INT_KEYS = ("m", "k", "runs", "seed", "workers", "popular_threshold")
_LIST_KEYS = ("evidence_exclude",)


@dataclass
class PipelineConfig:
    """Resolved configuration; unset keys stay None until validated."""

    obo: Path | None = None
    annotations: Path | None = None
    expression_a: Path | None = None
    expression_b: Path | None = None
    truth: Path | None = None
    d_e: Path | None = None
    d_go: Path | None = None
    partition: Path | None = None
    inferred: Path | None = None
    against: Path | None = None
    out_dir: Path | None = None
    namespace: str = "biological_process"
    metric: str = "euclidean"
    similarity: str = "relevance"
    balancing: str = "gamma_tuning"
    correction: str = "none"
    seeding: str = PAM_BUILD
    assign_distance: str | None = None
    gamma: float | None = None
    grid_step: float = 0.05
    split: float = 0.5
    alpha: float = 0.05
    m: int = 20
    k: int | None = None
    runs: int = 10
    seed: int | None = None
    workers: int = 1
    popular_threshold: int | None = None
    evidence_exclude: tuple[str, ...] = ("ND",)

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"missing required option(s): {', '.join(missing)}")
        for k in keys:
            v = getattr(self, k)
            if k != "out_dir" and isinstance(v, Path) and not v.exists():
                raise ConfigError(f"{k} path does not exist: {v}")

    def validate_choices(self) -> None:
        for key, choices in _STR_KEYS.items():
            v = getattr(self, key)
            if choices and v is not None and v not in choices:
                raise ConfigError(f"{key} must be one of {choices}, got {v!r}")
        if self.balancing == "fixed_gamma" and self.gamma is None:
            raise ConfigError("balancing=fixed_gamma requires gamma")
        if self.balancing != "fixed_gamma" and self.gamma is not None:
            raise ConfigError("gamma is only valid with balancing=fixed_gamma")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def resolved_assign_distance(self) -> str:
        if self.assign_distance is not None:
            return self.assign_distance
        return "equalized" if self.balancing == "percentile" else "raw"

    def as_manifest_dict(self) -> dict:
        out: dict = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                out[f.name] = None
            elif isinstance(v, Path):
                out[f.name] = str(v.resolve())
            elif isinstance(v, tuple):
                out[f.name] = ",".join(v)
            else:
                out[f.name] = v
        return out


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; quotes optional, # starts a comment line."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"config line {lineno}: expected key = value, got {line!r}")
        key = key.strip()
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] == '"':
            value = value[1:-1]
        out[key] = value
    return out


def _coerce(key: str, value) -> object:
    if value is None:
        return None
    if key in _PATH_KEYS:
        return Path(value)
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from None
    if key in _FLOAT_KEYS:
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {value!r}") from None
    if key in _LIST_KEYS:
        if isinstance(value, tuple):
            return value
        return tuple(v.strip() for v in str(value).split(",") if v.strip())
    return str(value)


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Layer defaults < manifest < config file < CLI flags."""
    values: dict[str, object] = {}
    manifest_path = getattr(args, "from_manifest", None)
    if manifest_path:
        manifest = json.loads(Path(manifest_path).read_text())
        for key, v in manifest.get("config", {}).items():
            if v is not None and any(f.name == key for f in fields(PipelineConfig)):
                values[key] = _coerce(key, v)
    if getattr(args, "config", None):
        raw = parse_config_text(Path(args.config).read_text())
        for key, v in raw.items():
            if not any(f.name == key for f in fields(PipelineConfig)):
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _coerce(key, v)
    for f in fields(PipelineConfig):
        cli_val = getattr(args, f.name, None)
        if cli_val is not None:
            values[f.name] = _coerce(f.name, cli_val)
    cfg = PipelineConfig(**values)
    cfg.validate_choices()
    return cfg


# -- shared loading steps ------------------------------------------------------


def _digest(path: Path) -> str:
    return sha256(path.read_bytes()).hexdigest()


def _load_ontology(cfg: PipelineConfig) -> Ontology:
    cfg.require("obo")
    return parse_obo(cfg.obo.read_bytes())


def _load_corpus(cfg: PipelineConfig, o: Ontology) -> AnnotationCorpus:
    cfg.require("annotations")
    return load_annotations(
        cfg.annotations.read_bytes(),
        o,
        cfg.namespace,
        frozenset(cfg.evidence_exclude),
    )


def _load_expr_a(cfg: PipelineConfig, corpus: AnnotationCorpus) -> ExpressionMatrix:
    cfg.require("expression_a")
    expr = load_expression(cfg.expression_a.read_bytes())
    missing = [g for g in expr.genes if g not in corpus.direct]
    if missing:
        raise DataError(
            f"{len(missing)} expression genes lack annotations, e.g. {missing[:5]}"
        )
    return expr


def _combined_expression(
    expr_a: ExpressionMatrix, expr_b: ExpressionMatrix
) -> ExpressionMatrix:
    if expr_a.conditions != expr_b.conditions:
        raise DataError("A and B expression files have different condition columns")
    overlap = set(expr_a.genes) & set(expr_b.genes)
    if overlap:
        raise DataError(f"B genes overlap A genes: {sorted(overlap)[:5]}")
    return ExpressionMatrix(
        expr_a.genes + expr_b.genes,
        expr_a.conditions,
        np.vstack([expr_a.values, expr_b.values]),
    )


def _histogram_csv(dm: DistanceMatrix, bins: int = 50) -> str:
    iu = np.triu_indices(len(dm.genes), k=1)
    counts, edges = np.histogram(dm.d[iu], bins=bins, range=(0.0, 1.0))
    mids = (edges[:-1] + edges[1:]) / 2.0
    lines = ["value,count"]
    for v, n in zip(mids, counts):
        lines.append(f"{v:.10g},{int(n)}")
    return "\n".join(lines) + "\n"


def _write(out_dir: Path, name: str, text: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text, newline="\n")


def _load_truth(
    cfg: PipelineConfig, o: Ontology
) -> dict[str, frozenset[str]]:
    corpus_b = load_annotations(
        cfg.truth.read_bytes(), o, cfg.namespace, frozenset(cfg.evidence_exclude)
    )
    return dict(corpus_b.direct)


def _merged_corpus(
    corpus: AnnotationCorpus, truth: dict[str, frozenset[str]], o: Ontology, namespace: str
) -> AnnotationCorpus:
    merged = {g: set(ts) for g, ts in corpus.direct.items()}
    for g, ts in truth.items():
        merged.setdefault(g, set()).update(ts)
    return build_corpus(merged, o, namespace)


# -- pipeline ------------------------------------------------------------------


def run_pipeline(cfg: PipelineConfig) -> None:
    """Full workflow: distances, balancing, clustering, assignment,
    enrichment, inference, metrics, manifest."""
    cfg.require("obo", "annotations", "expression_a", "expression_b", "out_dir", "seed", "k")
    out = cfg.out_dir
    stages: dict[str, str] = {}
    manifest: dict = {
        "config": cfg.as_manifest_dict(),
        "versions": {
            "gofusion": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "inputs": {},
        "stages": stages,
    }

    def finish_manifest() -> None:
        _write(out, "run_manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")

    try:
        stage = "load"
        for key in ("obo", "annotations", "expression_a", "expression_b", "truth"):
            p = getattr(cfg, key)
            if p is not None:
                manifest["inputs"][key] = {"path": str(p.resolve()), "sha256": _digest(p)}
        o = _load_ontology(cfg)
        manifest["ontology_digest"] = o.source_digest
        corpus = _load_corpus(cfg, o)
        manifest["gene_universe_size"] = corpus.gene_universe_size
        expr_a = _load_expr_a(cfg, corpus)
        expr_b = load_expression(cfg.expression_b.read_bytes())
        stages[stage] = "ok"

        stage = "distances"
        d_e = expression_distance_matrix(expr_a, cfg.metric)
        d_go = semantic_distance_matrix(
            o, corpus, expr_a.genes, cfg.similarity, workers=cfg.workers
        )
        _write(out, "d_e.tsv", write_distance_tsv(d_e))
        _write(out, "d_go.tsv", write_distance_tsv(d_go))
        _write(out, "hist_d_e.csv", _histogram_csv(d_e))
        _write(out, "hist_d_go.csv", _histogram_csv(d_go))
        stages[stage] = "ok"

        stage = "balancing"
        if cfg.balancing == "percentile":
            gamma_used = 0.5
            d_gamma = combine_gamma(
                percentile_equalize(d_e, cfg.m),
                percentile_equalize(d_go, cfg.m),
                gamma_used,
            )
        elif cfg.balancing == "gamma_tuning":
            report = tune_gamma(
                expr_a,
                o,
                corpus,
                cfg.k,
                grid_step=cfg.grid_step,
                runs=cfg.runs,
                split=cfg.split,
                seed=cfg.seed,
                metric=cfg.metric,
                kind=cfg.similarity,
                seeding=cfg.seeding,
                workers=cfg.workers,
                d_e=d_e,
                d_go=d_go,
            )
            _write(out, "tuning.json", report.to_json())
            _write(out, "tuning.csv", report.to_csv())
            gamma_used = report.best_gamma
            d_gamma = combine_gamma(d_e, d_go, gamma_used)
        else:
            gamma_used = float(cfg.gamma)
            d_gamma = combine_gamma(d_e, d_go, gamma_used)
        manifest["balancing"] = {
            "mode": cfg.balancing,
            "gamma_used": gamma_used,
            "assign_distance": cfg.resolved_assign_distance(),
        }
        _write(out, "d_gamma.tsv", write_distance_tsv(d_gamma))
        stages[stage] = "ok"

        stage = "cluster"
        part = cluster_a(d_gamma, cfg.k, cfg.seeding)
        stages[stage] = "ok"

        stage = "assign"
        combined = _combined_expression(expr_a, expr_b)
        d_ab = expression_distance_matrix(combined, cfg.metric)
        if cfg.resolved_assign_distance() == "equalized":
            d_ab = percentile_equalize(d_ab, cfg.m)
        part = assign_b(part, d_ab)
        _write(out, "partition.tsv", write_partition_tsv(part))
        _write(
            out,
            "cluster_meta.json",
            partition_metadata(
                part,
                cfg.seeding,
                gamma_used,
                extra={"balancing": cfg.balancing, "ontology_digest": o.source_digest},
            ),
        )
        stages[stage] = "ok"

        stage = "enrich"
        sub = assigned_subpartition(part)
        background = set(expr_a.genes)
        rows = enrich_partition(sub, background, corpus, cfg.alpha, cfg.correction)
        _write(out, "enrichment.tsv", write_enrichment_tsv(rows))
        inferred = infer_functions(
            sub, background, corpus, cfg.alpha, cfg.correction, workers=cfg.workers
        )
        _write(out, "inferred.tsv", write_inferred_tsv(inferred))
        stages[stage] = "ok"

        stage = "metrics"
        report = MetricReport()
        truth = None
        if cfg.truth is not None:
            truth = _load_truth(cfg, o)
            merged = _merged_corpus(corpus, truth, o, cfg.namespace)
            all_genes = list(expr_a.genes) + [g for g in expr_b.genes if g in merged.direct]
            d_go_eval = semantic_distance_matrix(
                o, merged, all_genes, cfg.similarity, workers=cfg.workers
            )
            report.bhi = bhi(sub, merged)
            report.bc = bc(sub, d_go_eval)
            scorable = {g for cl in sub.clusters for g in cl.members_b} & set(merged.direct)
            if scorable:
                report.sc = semantic_compactness(_restrict_b(sub, scorable), d_go_eval)
            scored_inferred = [r for r in inferred if r.gene in truth]
            if scored_inferred:
                report.recall = recall_inferred(scored_inferred, truth)
                if cfg.popular_threshold is not None:
                    counts = label_counts(merged, set(merged.direct), o)
                    popular = popular_terms(counts, cfg.popular_threshold)
                    report.popular_labels = [
                        (t, n) for t, _name, n in counts if t in popular
                    ]
                    report.recall_no_popular = recall_inferred(
                        scored_inferred, truth, exclude=popular
                    )
        else:
            stripped = Partition(
                tuple(Cluster(cl.medoid, cl.members_a) for cl in sub.clusters),
                k=sub.k,
                total_cost=sub.total_cost,
            )
            report.bhi = bhi(stripped, corpus)
            report.bc = bc(stripped, d_go)
        _write(out, "metrics.json", report.to_json())
        _write(out, "term_graph.dot", export_term_graph(inferred, truth, o))
        stages[stage] = "ok"
        finish_manifest()
    except GofusionError as e:
        stages[stage] = "failed"
        _write(
            out,
            "error.json",
            json.dumps(
                {"stage": stage, "error": type(e).__name__, "message": str(e)},
                sort_keys=True,
                indent=2,
            ) + "\n",
        )
        finish_manifest()
        raise


def _restrict_b(p: Partition, keep: set[str]) -> Partition:
    clusters = tuple(
        Cluster(cl.medoid, cl.members_a, frozenset(cl.members_b & keep))
        for cl in p.clusters
    )
    return Partition(clusters, p.k, p.total_cost)


# -- subcommands ---------------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    cfg.require("out_dir", "seed")
    ds = make_dataset(
        seed=cfg.seed,
        subgroups_per_family=args.subgroups_per_family,
        genes_per_subgroup=args.genes_per_subgroup,
        leaves_per_subgroup=args.leaves_per_subgroup,
        conditions=args.conditions,
        noise=args.noise,
        b_fraction=args.b_fraction,
    )
    files = write_dataset(ds, cfg.out_dir)
    for name, path in sorted(files.items()):
        print(f"{name}\t{path}")


def cmd_distances(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    cfg.require("obo", "annotations", "expression_a", "out_dir")
    o = _load_ontology(cfg)
    corpus = _load_corpus(cfg, o)
    expr_a = _load_expr_a(cfg, corpus)
    d_e = expression_distance_matrix(expr_a, cfg.metric)
    d_go = semantic_distance_matrix(
        o, corpus, expr_a.genes, cfg.similarity, workers=cfg.workers
    )
    _write(cfg.out_dir, "d_e.tsv", write_distance_tsv(d_e))
    _write(cfg.out_dir, "d_go.tsv", write_distance_tsv(d_go))
    _write(cfg.out_dir, "hist_d_e.csv", _histogram_csv(d_e))
    _write(cfg.out_dir, "hist_d_go.csv", _histogram_csv(d_go))


def cmd_tune_gamma(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    cfg.require("obo", "annotations", "expression_a", "out_dir", "seed", "k")
    o = _load_ontology(cfg)
    corpus = _load_corpus(cfg, o)
    expr_a = _load_expr_a(cfg, corpus)
    report = tune_gamma(
        expr_a,
        o,
        corpus,
        cfg.k,
        grid_step=cfg.grid_step,
        runs=cfg.runs,
        split=cfg.split,
        seed=cfg.seed,
        metric=cfg.metric,
        kind=cfg.similarity,
        seeding=cfg.seeding,
        workers=cfg.workers,
    )
    _write(cfg.out_dir, "tuning.json", report.to_json())
    _write(cfg.out_dir, "tuning.csv", report.to_csv())
    print(f"best_gamma\t{report.best_gamma:.10g}")


def cmd_cluster(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    cfg.require("d_e", "d_go", "out_dir", "k")
    d_e = read_distance_tsv(cfg.d_e.read_text())
    d_go = read_distance_tsv(cfg.d_go.read_text())
    if cfg.balancing == "percentile":
        gamma_used = 0.5
        d_gamma = combine_gamma(
            percentile_equalize(d_e, cfg.m), percentile_equalize(d_go, cfg.m), gamma_used
        )
    elif cfg.balancing == "fixed_gamma":
        gamma_used = float(cfg.gamma)
        d_gamma = combine_gamma(d_e, d_go, gamma_used)
    else:
        raise ConfigError(
            "cluster works with balancing=percentile or fixed_gamma; "
            "run tune-gamma first and pass --balancing fixed_gamma --gamma <best>"
        )
    part = cluster_a(d_gamma, cfg.k, cfg.seeding)
    _write(cfg.out_dir, "d_gamma.tsv", write_distance_tsv(d_gamma))
    _write(cfg.out_dir, "partition.tsv", write_partition_tsv(part))
    _write(
        cfg.out_dir,
        "cluster_meta.json",
        partition_metadata(part, cfg.seeding, gamma_used, extra={"balancing": cfg.balancing}),
    )


def cmd_assign(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    cfg.require("partition", "expression_a", "expression_b", "out_dir")
    part = read_partition_tsv(cfg.partition.read_text())
    expr_a = load_expression(cfg.expression_a.read_bytes())
    expr_b = load_expression(cfg.expression_b.read_bytes())
    combined = _combined_expression(expr_a, expr_b)
    d_ab = expression_distance_matrix(combined, cfg.metric)
    if cfg.resolved_assign_distance() == "equalized":
        d_ab = percentile_equalize(d_ab, cfg.m)
    part = assign_b(part, d_ab)
    _write(cfg.out_dir, "partition.tsv", write_partition_tsv(part))


def cmd_enrich(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    cfg.require("partition", "obo", "annotations", "out_dir")
    o = _load_ontology(cfg)
    corpus = _load_corpus(cfg, o)
    part = read_partition_tsv(cfg.partition.read_text())
    sub = assigned_subpartition(part)
    background = part.genes_a()
    rows = enrich_partition(sub, background, corpus, cfg.alpha, cfg.correction)
    _write(cfg.out_dir, "enrichment.tsv", write_enrichment_tsv(rows))


def cmd_infer(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    cfg.require("partition", "obo", "annotations", "out_dir")
    o = _load_ontology(cfg)
    corpus = _load_corpus(cfg, o)
    part = read_partition_tsv(cfg.partition.read_text())
    sub = assigned_subpartition(part)
    background = part.genes_a()
    inferred = infer_functions(
        sub, background, corpus, cfg.alpha, cfg.correction, workers=cfg.workers
    )
    _write(cfg.out_dir, "inferred.tsv", write_inferred_tsv(inferred))
    truth = _load_truth(cfg, o) if cfg.truth is not None else None
    _write(cfg.out_dir, "term_graph.dot", export_term_graph(inferred, truth, o))


def cmd_eval(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    cfg.require("partition", "obo", "annotations", "out_dir")
    o = _load_ontology(cfg)
    corpus = _load_corpus(cfg, o)
    part = read_partition_tsv(cfg.partition.read_text())
    report = MetricReport()
    truth = _load_truth(cfg, o) if cfg.truth is not None else None
    scope = _merged_corpus(corpus, truth, o, cfg.namespace) if truth else corpus
    genes = sorted((part.genes_a() | part.genes_b()) & set(scope.direct))
    d_go_eval = semantic_distance_matrix(o, scope, genes, cfg.similarity, cfg.workers)
    evaluable = _restrict_b(part, set(scope.direct))
    report.bhi = bhi(evaluable, scope)
    report.bc = bc(evaluable, d_go_eval)
    if any(cl.members_b & set(scope.direct) for cl in part.clusters):
        report.sc = semantic_compactness(evaluable, d_go_eval)
    if cfg.against is not None:
        other = read_partition_tsv(Path(cfg.against).read_text())
        fm = fowlkes_mallows(part.labels(), other.labels())
        report.fm = fm.value
    if cfg.inferred is not None and truth is not None:
        inferred = _read_inferred(Path(cfg.inferred).read_text())
        scored = [r for r in inferred if r.gene in truth]
        if scored:
            report.recall = recall_inferred(scored, truth)
            if cfg.popular_threshold is not None:
                counts = label_counts(scope, set(scope.direct), o)
                popular = popular_terms(counts, cfg.popular_threshold)
                report.popular_labels = [(t, n) for t, _nm, n in counts if t in popular]
                report.recall_no_popular = recall_inferred(scored, truth, exclude=popular)
    _write(cfg.out_dir, "metrics.json", report.to_json())


def _read_inferred(text: str):
    from .enrichment import InferredAnnotation

    per_gene: dict[str, list[tuple[str, float]]] = {}
    cluster_of: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("gene_id\t"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise DataError(f"inferred.tsv line {lineno}: expected 4 columns")
        gene, term, p, ci = fields
        per_gene.setdefault(gene, []).append((term, float(p)))
        cluster_of[gene] = int(ci)
    return [
        InferredAnnotation(
            gene=g,
            terms=tuple(sorted(per_gene[g], key=lambda tp: (tp[1], tp[0]))),
            cluster_index=cluster_of[g],
            enriched=bool(per_gene[g]),
        )
        for g in sorted(per_gene)
    ]


def cmd_pipeline(args: argparse.Namespace) -> None:
    cfg = build_config(args)
    run_pipeline(cfg)


# -- argument parsing ----------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="flat key = value config file")
    for key in _PATH_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)
    for key in _STR_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)
    for key in _FLOAT_KEYS + _INT_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)
    p.add_argument("--evidence-exclude", dest="evidence_exclude")
    return p


def main(argv: list[str] | None = None) -> int:
    common = _common_parser()
    top = argparse.ArgumentParser(
        prog="gofusion",
        description="Infer GO biological-process labels for unannotated genes "
        "by fusing expression and semantic distances.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", parents=[common], help="generate a synthetic benchmark")
    ps.add_argument("--subgroups-per-family", type=int, default=25)
    ps.add_argument("--genes-per-subgroup", type=int, default=4)
    ps.add_argument("--leaves-per-subgroup", type=int, default=4)
    ps.add_argument("--conditions", type=int, default=24)
    ps.add_argument("--noise", type=float, default=1.1)
    ps.add_argument("--b-fraction", type=float, default=0.1)
    ps.set_defaults(func=cmd_synth)

    for name, fn, text in (
        ("distances", cmd_distances, "expression and semantic distance matrices"),
        ("tune-gamma", cmd_tune_gamma, "grid-search the gamma weight"),
        ("cluster", cmd_cluster, "cluster annotated genes on the fused distance"),
        ("assign", cmd_assign, "attach unannotated genes to clusters"),
        ("enrich", cmd_enrich, "over-representation analysis per cluster"),
        ("infer", cmd_infer, "transfer enriched terms to unannotated genes"),
        ("eval", cmd_eval, "partition and inference quality metrics"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=fn)

    pp = sub.add_parser("pipeline", parents=[common], help="run the full workflow")
    pp.add_argument("--from-manifest", help="re-run from a run_manifest.json")
    pp.set_defaults(func=cmd_pipeline)

    args = top.parse_args(argv)
    try:
        args.func(args)
    except GofusionError as e:
        print(f"error ({type(e).__name__}): {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
