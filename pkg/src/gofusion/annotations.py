"""Gene annotation corpus: loading, DAG propagation, term probability and IC.

The corpus keeps only the direct (specific) annotations per gene; counts
are propagated up the ontology so that ``prop_count[t]`` is the number of
retained genes annotated to ``t`` or any of its descendants.  Information
content is the natural-log surprisal of the propagated term probability.
The log base is not configurable: downstream term similarity relies on
``exp(-ic(t)) == p(t)``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field

from .errors import EmptyCorpusError, ParseError, UnknownIdError
from .ontology import Ontology, TermId

logger = logging.getLogger(__name__)

GeneId = str

DEFAULT_EXCLUDED_EVIDENCE = frozenset({"ND"})


@dataclass(frozen=True)
class LoadDiagnostics:
    """Row-level accounting for an annotation load."""

    rows_total: int = 0
    rows_kept: int = 0
    rows_wrong_namespace: int = 0
    rows_excluded_evidence: int = 0
    rows_unknown_term: int = 0
    rows_duplicate: int = 0
    genes_dropped_empty: int = 0
    genes_root_only: int = 0


@dataclass(frozen=True)
class AnnotationCorpus:
    """Direct annotations plus propagated counts and information content.

    ``gene_universe_size`` is the number of annotated genes retained after
    filtering; it is the denominator of every term probability and is
    recorded in pipeline outputs so runs can be reproduced against a
    different annotation universe.
    """

    direct: dict[GeneId, frozenset[TermId]]
    namespace: str
    gene_universe_size: int
    prop_count: dict[TermId, int]
    ic: dict[TermId, float]
    diagnostics: LoadDiagnostics = field(default=LoadDiagnostics())

    def genes(self) -> list[GeneId]:
        return sorted(self.direct)

    def direct_terms(self, gene: GeneId) -> frozenset[TermId]:
        try:
            return self.direct[gene]
        except KeyError:
            raise UnknownIdError(f"gene {gene!r} not in corpus") from None


def build_corpus(
    direct: dict[GeneId, set[TermId]],
    o: Ontology,
    namespace: str,
    diagnostics: LoadDiagnostics | None = None,
) -> AnnotationCorpus:
    """Assemble a corpus from per-gene direct term sets (already filtered)."""
    if not direct:
        raise EmptyCorpusError("no annotated genes retained")
    root = o.namespace_root(namespace)
    anc_cache: dict[TermId, set[TermId]] = {}
    prop: dict[TermId, int] = {}
    root_only = 0
    for gene in sorted(direct):
        terms = direct[gene]
        if not terms:
            raise EmptyCorpusError(f"gene {gene!r} has an empty term set")
        expanded: set[TermId] = set()
        for t in terms:
            hit = anc_cache.get(t)
            if hit is None:
                hit = anc_cache[t] = o.ancestors(t)
            expanded |= hit
        for t in expanded:
            prop[t] = prop.get(t, 0) + 1
        if terms == {root}:
            root_only += 1
    n = len(direct)
    ic = {t: -math.log(c / n) for t, c in prop.items()}
    ic[root] = 0.0
    if root_only:
        logger.info("%d genes are annotated only to the namespace root", root_only)
    diags = dataclasses.replace(
        diagnostics or LoadDiagnostics(), genes_root_only=root_only
    )
    return AnnotationCorpus(
        direct={g: frozenset(ts) for g, ts in direct.items()},
        namespace=namespace,
        gene_universe_size=n,
        prop_count=prop,
        ic=ic,
        diagnostics=diags,
    )


def load_annotations(
    data: bytes | str,
    o: Ontology,
    namespace: str,
    excluded_evidence: frozenset[str] = DEFAULT_EXCLUDED_EVIDENCE,
) -> AnnotationCorpus:
    """Load a ``gene_id TAB term_id TAB evidence_code TAB namespace`` TSV.

    A header line is detected by the literal ``gene_id`` in the first
    column.  Rows in other namespaces or with excluded evidence codes
    (default ``{"ND"}``) are dropped; rows referencing unknown or obsolete
    terms are dropped with a counted warning; genes left without any term
    are dropped.  Raises :class:`EmptyCorpusError` if nothing survives.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    direct: dict[GeneId, set[TermId]] = {}
    seen_genes: set[GeneId] = set()
    total = kept = wrong_ns = excluded = unknown = dup = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if lineno == 1 and fields[0] == "gene_id":
            continue
        if len(fields) != 4:
            raise ParseError(f"expected 4 tab-separated columns, got {len(fields)}", lineno)
        gene, term, evidence, ns = (f.strip() for f in fields)
        if not gene:
            raise ParseError("empty gene_id", lineno)
        total += 1
        seen_genes.add(gene)
        if ns != namespace:
            wrong_ns += 1
            continue
        if evidence in excluded_evidence:
            excluded += 1
            continue
        t = o.terms.get(term)
        if t is None or t.obsolete or t.namespace != namespace:
            unknown += 1
            continue
        bucket = direct.setdefault(gene, set())
        if term in bucket:
            dup += 1
            continue
        bucket.add(term)
        kept += 1
    if unknown:
        logger.warning("dropped %d rows referencing unknown/obsolete/foreign terms", unknown)
    if not direct:
        raise EmptyCorpusError(
            f"no genes retained ({total} rows: {wrong_ns} wrong namespace, "
            f"{excluded} excluded evidence, {unknown} unresolvable terms)"
        )
    diags = LoadDiagnostics(
        rows_total=total,
        rows_kept=kept,
        rows_wrong_namespace=wrong_ns,
        rows_excluded_evidence=excluded,
        rows_unknown_term=unknown,
        rows_duplicate=dup,
        genes_dropped_empty=len(seen_genes) - len(direct),
    )
    return build_corpus(direct, o, namespace, diagnostics=diags)


def term_probability(c: AnnotationCorpus, t: TermId) -> float:
    """Fraction of corpus genes annotated to ``t`` or any descendant."""
    count = c.prop_count.get(t)
    if not count:
        raise UnknownIdError(f"term {t} has no annotated genes beneath it; p undefined")
    return count / c.gene_universe_size


def information_content(c: AnnotationCorpus, t: TermId) -> float:
    """Natural-log information content, -ln p(t); 0 at the root."""
    ic = c.ic.get(t)
    if ic is None:
        raise UnknownIdError(f"term {t} has no annotated genes beneath it; IC undefined")
    return ic
