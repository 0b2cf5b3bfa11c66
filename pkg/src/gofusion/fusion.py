"""Fusing expression and semantic distances: gamma blend, percentile
equalization, and the tuning loop that picks gamma automatically.

The two balancing routes address the same problem, that the two distance
distributions differ badly in shape: percentile equalization forces both
onto an approximately uniform grid of interval midpoints so an equal-weight
blend is meaningful, while gamma tuning searches the blend weight directly
by repeatedly splitting the annotated set, clustering one half, assigning
the other half back by expression, and scoring semantic compactness.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .annotations import AnnotationCorpus
from .clustering import PAM_BUILD, Cluster, Partition, cluster_a
from .errors import ConfigError
from .expression import (
    EUCLIDEAN,
    PEARSON,
    DistanceMatrix,
    ExpressionMatrix,
    expression_distance_matrix,
)
from .metrics import semantic_compactness
from .ontology import Ontology
from .semantic import RELEVANCE, semantic_distance_matrix


def combine_gamma(d_e: DistanceMatrix, d_go: DistanceMatrix, gamma: float) -> DistanceMatrix:
    """Entrywise gamma * d_go + (1 - gamma) * d_e over an identical gene list."""
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must lie in [0, 1], got {gamma}")
    d_e.require_same_genes(d_go)
    blended = gamma * d_go.d + (1.0 - gamma) * d_e.d
    np.clip(blended, 0.0, 1.0, out=blended)
    np.fill_diagonal(blended, 0.0)
    return DistanceMatrix(d_e.genes, blended)


def _average_ranks(v: np.ndarray) -> np.ndarray:
    """1-based ranks, ties averaged (returned doubled to stay integral)."""
    _, inv, counts = np.unique(v, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts + 1
    return (starts + ends)[inv]  # == 2 * average rank


def equalize_values(vals: np.ndarray, m: int) -> np.ndarray:
    """Map each value to the midpoint (j - 0.5) / m of its percentile bin
    j = ceil(percentile * m), with average ranks for ties.

    Depends only on the rank order of ``vals``: any strictly increasing
    transform of the input yields the identical output.
    """
    if m < 2:
        raise ConfigError(f"need at least 2 intervals, got m={m}")
    vals = np.asarray(vals, dtype=float)
    if vals.size == 0:
        return vals.copy()
    double_ranks = _average_ranks(vals)
    # all-integer numerator keeps the ceil exact
    j = np.ceil(double_ranks * m / (2.0 * vals.size))
    np.clip(j, 1, m, out=j)
    return (j - 0.5) / m


def percentile_equalize(d: DistanceMatrix, m: int) -> DistanceMatrix:
    """Equalize a distance matrix over its strict upper triangle.

    Each off-diagonal value is replaced by its percentile-bin midpoint and
    mirrored back; the diagonal stays 0.  Applying this to both distance
    sources gives them near-uniform, directly comparable distributions.
    """
    n = len(d.genes)
    if n < 2:
        raise ConfigError("matrix needs at least one off-diagonal pair")
    iu = np.triu_indices(n, k=1)
    out = np.zeros_like(d.d)
    out[iu] = equalize_values(d.d[iu], m)
    out = out + out.T
    return DistanceMatrix(d.genes, out)


@dataclass(frozen=True)
class TuningReport:
    """Grid search trace: per-gamma compactness runs and the winner."""

    grid: tuple[float, ...]
    sc_runs: tuple[tuple[float, ...], ...]
    sc_curve: tuple[float, ...]
    best_gamma: float
    seed: int
    split: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "grid": list(self.grid),
                "sc_runs": [list(r) for r in self.sc_runs],
                "sc_curve": list(self.sc_curve),
                "best_gamma": self.best_gamma,
                "seed": self.seed,
                "split": self.split,
            },
            sort_keys=True,
            indent=2,
        ) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma", "mean_sc"])
        for g, sc in zip(self.grid, self.sc_curve):
            w.writerow([f"{g:.10g}", f"{sc:.10g}"])
        return buf.getvalue()


def _centroid_assign(
    expr: ExpressionMatrix,
    part: Partition,
    held_out: list[str],
    metric: str,
) -> Partition:
    """Attach held-out genes to the cluster with the nearest expression
    centroid (arithmetic mean of member vectors), ties to the lowest index.

    This is deliberately centroid-based, unlike the medoid-based B
    assignment used for the final partition; both paths exist on purpose.
    """
    idx = {g: i for i, g in enumerate(expr.genes)}
    centroids = []
    for cl in part.clusters:
        rows = expr.values[sorted(idx[g] for g in cl.members_a)]
        centroids.append(rows.mean(axis=0))
    cent = np.vstack(centroids)
    assigned: list[set[str]] = [set() for _ in part.clusters]
    for g in held_out:
        x = expr.values[idx[g]]
        if metric == EUCLIDEAN:
            dist = np.sqrt(((cent - x) ** 2).sum(axis=1))
        elif metric == PEARSON:
            xc = x - x.mean()
            cc = cent - cent.mean(axis=1, keepdims=True)
            denom = np.sqrt((xc * xc).sum()) * np.sqrt((cc * cc).sum(axis=1))
            with np.errstate(invalid="ignore", divide="ignore"):
                r = np.where(denom > 0.0, cc @ xc / np.where(denom > 0, denom, 1.0), 0.0)
            dist = (1.0 - np.clip(r, -1.0, 1.0)) / 2.0
        else:
            raise ConfigError(f"unknown expression metric {metric!r}")
        assigned[int(dist.argmin())].add(g)
    clusters = tuple(
        Cluster(cl.medoid, cl.members_a, frozenset(assigned[i]))
        for i, cl in enumerate(part.clusters)
    )
    return Partition(clusters, part.k, part.total_cost)


def tune_gamma(
    expr: ExpressionMatrix,
    o: Ontology,
    c: AnnotationCorpus,
    k: int,
    grid_step: float = 0.05,
    runs: int = 10,
    split: float = 0.5,
    seed: int = 0,
    metric: str = EUCLIDEAN,
    kind: str = RELEVANCE,
    seeding: str = PAM_BUILD,
    workers: int = 1,
    d_e: DistanceMatrix | None = None,
    d_go: DistanceMatrix | None = None,
) -> TuningReport:
    """Grid search over gamma, scoring each value by semantic compactness.

    Per (gamma, run) cell: split the annotated genes into a kept fraction
    and a held-out rest, cluster the kept half on the blended distance
    restricted to it, attach the held-out genes by expression-centroid
    distance, and score the held-out genes' semantic compactness.  Cells
    are independent and seeded from (seed, gamma index, run index), so the
    report is reproducible and worker-count independent.  The best gamma is
    the curve's argmin, ties resolved toward the smallest gamma.

    Precomputed ``d_e`` / ``d_go`` matrices over exactly ``expr.genes`` may
    be supplied to avoid recomputation.
    """
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    if not 0.0 < split < 1.0:
        raise ConfigError(f"split must lie strictly between 0 and 1, got {split}")
    if runs < 1:
        raise ConfigError(f"runs must be positive, got {runs}")
    if grid_step <= 0.0 or grid_step > 1.0:
        raise ConfigError(f"grid_step must lie in (0, 1], got {grid_step}")
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    steps = round(1.0 / grid_step)
    if abs(steps * grid_step - 1.0) > 1e-9:
        raise ConfigError(f"grid_step {grid_step} does not divide 1 evenly")

    genes = list(expr.genes)
    n = len(genes)
    n1 = int(round(split * n))
    if not 0 < n1 < n:
        raise ConfigError(f"split {split} leaves an empty subset for {n} genes")
    if k > n1:
        raise ConfigError(f"k={k} exceeds the kept subset size {n1}")

    if d_e is None:
        d_e = expression_distance_matrix(expr, metric)
    if d_go is None:
        d_go = semantic_distance_matrix(o, c, genes, kind)
    if d_e.genes != expr.genes or d_go.genes != expr.genes:
        raise ConfigError("precomputed matrices must cover expr.genes in order")

    grid = tuple(i / steps for i in range(steps + 1))
    blended = [combine_gamma(d_e, d_go, g) for g in grid]

    def cell(g_idx: int, run: int) -> float:
        rng = np.random.default_rng(np.random.SeedSequence((seed, g_idx, run)))
        perm = rng.permutation(n)
        kept = sorted(int(i) for i in perm[:n1])
        held = sorted(int(i) for i in perm[n1:])
        kept_genes = [genes[i] for i in kept]
        held_genes = [genes[i] for i in held]
        part = cluster_a(blended[g_idx].restrict(kept_genes), k, seeding)
        part = _centroid_assign(expr, part, held_genes, metric)
        return semantic_compactness(part, d_go)

    tasks = [(g, r) for g in range(len(grid)) for r in range(runs)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(lambda t: cell(*t), tasks))
    else:
        flat = [cell(g, r) for g, r in tasks]
    sc_runs = tuple(
        tuple(flat[g * runs + r] for r in range(runs)) for g in range(len(grid))
    )
    sc_curve = tuple(float(np.mean(rs)) for rs in sc_runs)
    best_gamma = grid[int(np.argmin(sc_curve))]
    return TuningReport(
        grid=grid,
        sc_runs=sc_runs,
        sc_curve=sc_curve,
        best_gamma=best_gamma,
        seed=seed,
        split=split,
    )
