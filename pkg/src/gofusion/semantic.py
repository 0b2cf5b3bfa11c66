"""Term-level semantic similarity and gene-level semantic distance.

Term similarity follows the information-content family: the default
"relevance" kind scales the Lin ratio by (1 - p(ms)), where ms is the
minimum subsumer, so that pairs whose only shared ancestor sits near the
root score low.  Gene distance is one minus the symmetric best-match
average of term similarities between the two genes' direct annotation
sets.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .annotations import AnnotationCorpus, GeneId, information_content
from .errors import ValidationError
from .expression import DistanceMatrix
from .ontology import Ontology, TermId

RELEVANCE = "relevance"
LIN = "lin"
RESNIK_NORMALIZED = "resnik_normalized"
SIMILARITY_KINDS = (RELEVANCE, LIN, RESNIK_NORMALIZED)


def _check_namespace(o: Ontology, c: AnnotationCorpus, t: TermId) -> None:
    term = o.terms.get(t)
    if term is None or term.obsolete:
        raise ValidationError(f"term {t} unknown or obsolete")
    if term.namespace != c.namespace:
        raise ValidationError(
            f"term {t} is in namespace {term.namespace}, corpus covers {c.namespace}"
        )


def _max_ic_common_ancestor(
    c: AnnotationCorpus, anc_i: set[TermId], anc_j: set[TermId]
) -> tuple[TermId, float]:
    best_t = ""
    best_ic = -1.0
    for t in sorted(anc_i & anc_j):
        ic = c.ic.get(t)
        if ic is not None and ic > best_ic:
            best_t, best_ic = t, ic
    return best_t, best_ic


def min_subsumer(
    o: Ontology, c: AnnotationCorpus, t_i: TermId, t_j: TermId
) -> tuple[TermId, float]:
    """Common ancestor with maximal information content; ties take the
    smallest term id.  Never empty: the namespace root is always shared."""
    _check_namespace(o, c, t_i)
    _check_namespace(o, c, t_j)
    best_t, best_ic = _max_ic_common_ancestor(c, o.ancestors(t_i), o.ancestors(t_j))
    if not best_t:
        raise ValidationError(f"no common ancestor with defined IC for {t_i}, {t_j}")
    return best_t, best_ic


def _sim_from_ic(ms_ic: float, ic_i: float, ic_j: float, kind: str, peak_ic: float) -> float:
    if kind == RESNIK_NORMALIZED:
        if peak_ic == 0.0:
            return 0.0
        return min(ms_ic / peak_ic, 1.0)
    denom = ic_i + ic_j
    if denom == 0.0:
        return 0.0
    ratio = 2.0 * ms_ic / denom
    if kind == LIN:
        return min(ratio, 1.0)
    return min(ratio * (1.0 - math.exp(-ms_ic)), 1.0)


def term_similarity(
    o: Ontology,
    c: AnnotationCorpus,
    t_i: TermId,
    t_j: TermId,
    kind: str = RELEVANCE,
) -> float:
    """Similarity in [0, 1] between two terms of the corpus namespace.

    kinds: ``relevance`` (default), ``lin``, ``resnik_normalized``.  Pairs
    whose ICs are both zero (probability-1 terms) score 0 by convention.
    """
    if kind not in SIMILARITY_KINDS:
        raise ValidationError(f"unknown similarity kind {kind!r}")
    _ms, ms_ic = min_subsumer(o, c, t_i, t_j)
    ic_i = information_content(c, t_i)
    ic_j = information_content(c, t_j)
    return _sim_from_ic(ms_ic, ic_i, ic_j, kind, max(c.ic.values()))


def _term_sim_table(
    o: Ontology, c: AnnotationCorpus, terms: list[TermId], kind: str
) -> np.ndarray:
    """Dense similarity table over ``terms``; each unordered pair computed once."""
    if kind not in SIMILARITY_KINDS:
        raise ValidationError(f"unknown similarity kind {kind!r}")
    for t in terms:
        _check_namespace(o, c, t)
    anc = {t: o.ancestors(t) for t in terms}
    ics = [information_content(c, t) for t in terms]
    peak = max(c.ic.values()) if c.ic else 0.0
    u = len(terms)
    sim = np.zeros((u, u))
    for a in range(u):
        anc_a = anc[terms[a]]
        for b in range(a, u):
            _ms, ms_ic = _max_ic_common_ancestor(c, anc_a, anc[terms[b]])
            sim[a, b] = sim[b, a] = _sim_from_ic(ms_ic, ics[a], ics[b], kind, peak)
    return sim


def _best_match_distance(sim: np.ndarray, idx_i: np.ndarray, idx_j: np.ndarray) -> float:
    sub = sim[np.ix_(idx_i, idx_j)]
    best = 0.5 * (sub.max(axis=1).mean() + sub.max(axis=0).mean())
    return min(max(1.0 - best, 0.0), 1.0)


def gene_semantic_distance(
    o: Ontology,
    c: AnnotationCorpus,
    g_i: GeneId,
    g_j: GeneId,
    kind: str = RELEVANCE,
) -> float:
    """Best-match-average semantic distance between two genes' direct terms.

    Note the self-distance is not 0 in general: d(g, g) is the mean of
    p(t) over the gene's terms.  The matrix builder forces the diagonal to
    0 to satisfy the DistanceMatrix contract, since no consumer reads it.
    """
    terms_i = sorted(c.direct_terms(g_i))
    terms_j = sorted(c.direct_terms(g_j))
    union = sorted(set(terms_i) | set(terms_j))
    pos = {t: k for k, t in enumerate(union)}
    sim = _term_sim_table(o, c, union, kind)
    idx_i = np.array([pos[t] for t in terms_i])
    idx_j = np.array([pos[t] for t in terms_j])
    return _best_match_distance(sim, idx_i, idx_j)


def semantic_distance_matrix(
    o: Ontology,
    c: AnnotationCorpus,
    genes: list[GeneId] | tuple[GeneId, ...],
    kind: str = RELEVANCE,
    workers: int = 1,
) -> DistanceMatrix:
    """Semantic DistanceMatrix over ``genes`` with memoized term-pair sims.

    The term-pair similarity table is filled once, single-threaded; the
    gene-pair fill may then be split across ``workers`` row blocks, and the
    result is identical for any worker count because every entry depends
    only on its own pair.
    """
    gene_terms = [sorted(c.direct_terms(g)) for g in genes]
    union = sorted({t for ts in gene_terms for t in ts})
    pos = {t: k for k, t in enumerate(union)}
    sim = _term_sim_table(o, c, union, kind)
    idx = [np.array([pos[t] for t in ts]) for ts in gene_terms]

    n = len(genes)
    d = np.zeros((n, n))

    def fill_row(i: int) -> None:
        for j in range(i + 1, n):
            d[i, j] = _best_match_distance(sim, idx[i], idx[j])

    if workers > 1 and n > 2:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_row, range(n - 1)))
    else:
        for i in range(n - 1):
            fill_row(i)
    d = d + d.T
    return DistanceMatrix(tuple(genes), d)
