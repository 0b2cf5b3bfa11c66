"""Cluster characterization by hypergeometric over-representation.

Each cluster of the assigned partition is tested against a background gene
set: for every term directly annotating at least one of the cluster's
annotated genes (specific terms only, no parent propagation), the one-sided
hypergeometric tail gives the probability of drawing at least the observed
number of annotated genes by chance.  Terms passing the threshold are
transferred to the cluster's unannotated genes as their inferred functions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .annotations import AnnotationCorpus, GeneId
from .clustering import Cluster, Partition
from .errors import ConfigError
from .ontology import Ontology, TermId

CORRECTION_NONE = "none"
CORRECTION_BH = "benjamini_hochberg"
CORRECTIONS = (CORRECTION_NONE, CORRECTION_BH)


def _log_choose(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def hypergeom_tail(N: int, K: int, n: int, k: int) -> float:
    """P[X >= k] for X hypergeometric with N items, K successes, n draws.

    Evaluated in log space with log-gamma and summed smallest-term first,
    so it stays accurate for large N and tiny tails.
    """
    if not (0 <= K <= N and 0 <= n <= N):
        raise ConfigError(f"invalid hypergeometric counts N={N}, K={K}, n={n}")
    lo = max(0, n - (N - K))
    hi = min(n, K)
    if k <= lo:
        return 1.0
    if k > hi:
        return 0.0
    log_total = _log_choose(N, n)
    log_terms = [
        _log_choose(K, x) + _log_choose(N - K, n - x) - log_total
        for x in range(k, hi + 1)
    ]
    acc = 0.0
    for lt in sorted(log_terms):
        acc += math.exp(lt)
    return min(acc, 1.0)


def benjamini_hochberg(pvalues: list[float]) -> list[float]:
    """BH-adjusted p-values, preserving input order."""
    m = len(pvalues)
    order = sorted(range(m), key=lambda i: (pvalues[i], i))
    adjusted = [0.0] * m
    running = 1.0
    for rank in range(m, 0, -1):
        i = order[rank - 1]
        running = min(running, pvalues[i] * m / rank)
        adjusted[i] = running
    return adjusted


@dataclass(frozen=True)
class EnrichmentRecord:
    """One over-represented term in one cluster, with the tested counts."""

    term: TermId
    p_value: float
    in_cluster: int
    in_background: int
    cluster_size: int
    background_size: int


def enrich_cluster(
    cluster: Cluster,
    background: set[GeneId],
    c: AnnotationCorpus,
    alpha: float = 0.05,
    correction: str = CORRECTION_NONE,
) -> list[EnrichmentRecord]:
    """Terms over-represented among the cluster's annotated genes.

    Only terms with at least one direct annotation inside the cluster are
    tested (absent terms cannot be over-represented).  Records with
    (corrected) p <= alpha come back ascending by (p, term id).
    """
    if correction not in CORRECTIONS:
        raise ConfigError(f"unknown correction {correction!r}")
    members = sorted(cluster.members_a)
    if not members:
        raise ConfigError("cluster has no annotated members to enrich")
    if not set(members) <= background:
        raise ConfigError("cluster members must be contained in the background")
    bg = sorted(background)
    n = len(members)
    N = len(bg)
    cluster_counts: dict[TermId, int] = {}
    for g in members:
        for t in c.direct_terms(g):
            cluster_counts[t] = cluster_counts.get(t, 0) + 1
    bg_counts: dict[TermId, int] = {}
    for g in bg:
        for t in c.direct.get(g, ()):  # background genes may lack annotations
            bg_counts[t] = bg_counts.get(t, 0) + 1
    terms = sorted(cluster_counts)
    raw = [hypergeom_tail(N, bg_counts[t], n, cluster_counts[t]) for t in terms]
    final = benjamini_hochberg(raw) if correction == CORRECTION_BH else raw
    records = [
        EnrichmentRecord(
            term=t,
            p_value=p,
            in_cluster=cluster_counts[t],
            in_background=bg_counts[t],
            cluster_size=n,
            background_size=N,
        )
        for t, p in zip(terms, final)
        if p <= alpha
    ]
    records.sort(key=lambda r: (r.p_value, r.term))
    return records


@dataclass(frozen=True)
class InferredAnnotation:
    """Terms transferred to one unannotated gene from its cluster."""

    gene: GeneId
    terms: tuple[tuple[TermId, float], ...]
    cluster_index: int
    enriched: bool  # False flags a cluster with zero passing terms


def infer_functions(
    p: Partition,
    background: set[GeneId],
    c: AnnotationCorpus,
    alpha: float = 0.05,
    correction: str = CORRECTION_NONE,
    workers: int = 1,
) -> list[InferredAnnotation]:
    """Transfer each cluster's passing terms to its B genes.

    Inference is cluster-level: all B genes of a cluster receive the same
    ordered term list.  Clusters without B genes are skipped; clusters with
    no passing term yield empty, flagged records.
    """
    targets = [
        (i, cl) for i, cl in enumerate(p.clusters) if cl.members_b
    ]

    def run(item: tuple[int, Cluster]) -> list[EnrichmentRecord]:
        return enrich_cluster(item[1], background, c, alpha, correction)

    if workers > 1 and len(targets) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            all_records = list(pool.map(run, targets))
    else:
        all_records = [run(t) for t in targets]

    out: list[InferredAnnotation] = []
    for (i, cl), records in zip(targets, all_records):
        terms = tuple((r.term, r.p_value) for r in records)
        for g in sorted(cl.members_b):
            out.append(
                InferredAnnotation(
                    gene=g, terms=terms, cluster_index=i, enriched=bool(terms)
                )
            )
    return out


def enrich_partition(
    p: Partition,
    background: set[GeneId],
    c: AnnotationCorpus,
    alpha: float = 0.05,
    correction: str = CORRECTION_NONE,
) -> list[tuple[int, EnrichmentRecord]]:
    """(cluster index, record) pairs for every cluster that has B genes."""
    out: list[tuple[int, EnrichmentRecord]] = []
    for i, cl in enumerate(p.clusters):
        if not cl.members_b:
            continue
        for r in enrich_cluster(cl, background, c, alpha, correction):
            out.append((i, r))
    return out


# -- serialization ------------------------------------------------------------


def write_enrichment_tsv(rows: list[tuple[int, EnrichmentRecord]]) -> str:
    lines = [
        "cluster_index\tterm_id\tp_value\tin_cluster\tin_background"
        "\tcluster_size\tbackground_size"
    ]
    for ci, r in rows:
        lines.append(
            f"{ci}\t{r.term}\t{r.p_value:.10g}\t{r.in_cluster}\t{r.in_background}"
            f"\t{r.cluster_size}\t{r.background_size}"
        )
    return "\n".join(lines) + "\n"


def write_inferred_tsv(inferred: list[InferredAnnotation]) -> str:
    lines = ["gene_id\tterm_id\tp_value\tcluster_index"]
    for rec in inferred:
        for term, p in rec.terms:
            lines.append(f"{rec.gene}\t{term}\t{p:.10g}\t{rec.cluster_index}")
    return "\n".join(lines) + "\n"


def export_term_graph(
    inferred: list[InferredAnnotation],
    truth: dict[GeneId, frozenset[TermId]] | None,
    o: Ontology,
) -> str:
    """DOT digraph of inferred terms, optional truth terms, and their
    ancestor closure.

    Styling: inferred-only terms are dashed, terms both inferred and in the
    truth are bold ellipses, truth-only terms carry a thick border; plain
    ancestors provide context.  Nodes and edges are emitted in sorted order
    so output is reproducible.
    """
    inferred_terms = {t for rec in inferred for t, _ in rec.terms}
    truth_terms: set[TermId] = set()
    if truth:
        for ts in truth.values():
            truth_terms |= set(ts)
    closure: set[TermId] = set()
    for t in sorted(inferred_terms | truth_terms):
        closure |= o.ancestors(t)
    matching = inferred_terms & truth_terms
    lines = ["digraph term_graph {", "  rankdir=BT;", '  node [shape=box];']
    for t in sorted(closure):
        name = o.terms[t].name
        label = f"{t}\\n{name}" if name else t
        if t in matching:
            attrs = f'label="{label}", shape=ellipse, style=bold'
        elif t in inferred_terms:
            attrs = f'label="{label}", style=dashed'
        elif t in truth_terms:
            attrs = f'label="{label}", penwidth=3'
        else:
            attrs = f'label="{label}"'
        lines.append(f'  "{t}" [{attrs}];')
    for t in sorted(closure):
        for parent, _kind in sorted(o.terms[t].parents):
            if parent in closure:
                lines.append(f'  "{t}" -> "{parent}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
