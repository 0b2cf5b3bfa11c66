"""Expression matrices and normalized expression-based distance matrices.

Both distance flavors land in [0, 1]: Euclidean distances are divided by
the largest off-diagonal raw distance, and Pearson correlation r is mapped
to (1 - r) / 2 so positively correlated genes are near each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, DegenerateError, ParseError, UnknownIdError, ValidationError

GeneId = str

EUCLIDEAN = "euclidean"
PEARSON = "pearson"
METRICS = (EUCLIDEAN, PEARSON)


@dataclass(frozen=True, eq=False)
class ExpressionMatrix:
    """Genes x conditions matrix of finite expression values."""

    genes: tuple[GeneId, ...]
    conditions: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape != (len(self.genes), len(self.conditions)):
            raise ValidationError(
                f"value shape {v.shape} does not match {len(self.genes)} genes "
                f"x {len(self.conditions)} conditions"
            )
        if len(self.conditions) < 2:
            raise ValidationError("expression matrix needs at least 2 conditions")
        if not np.isfinite(v).all():
            raise ValidationError("expression matrix contains non-finite values")

    def row(self, gene: GeneId) -> np.ndarray:
        try:
            return self.values[self.genes.index(gene)]
        except ValueError:
            raise UnknownIdError(f"gene {gene!r} has no expression row") from None


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric gene-by-gene distance matrix with entries in [0, 1].

    The diagonal is 0 by convention.  This is the common currency passed
    between the fusion, clustering and metric stages.
    """

    genes: tuple[GeneId, ...]
    d: np.ndarray
    _index: dict[GeneId, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.d, dtype=float)
        object.__setattr__(self, "d", m)
        n = len(self.genes)
        if m.shape != (n, n):
            raise ValidationError(f"distance matrix shape {m.shape} != ({n}, {n})")
        if len(set(self.genes)) != n:
            raise ValidationError("duplicate gene ids in distance matrix")
        if not np.isfinite(m).all():
            raise ValidationError("distance matrix contains non-finite values")
        if (m != m.T).any():
            raise ValidationError("distance matrix is not symmetric")
        if np.diagonal(m).any():
            raise ValidationError("distance matrix diagonal must be zero")
        if m.min() < 0.0 or m.max() > 1.0:
            raise ValidationError("distance matrix entries must lie in [0, 1]")
        object.__setattr__(self, "_index", {g: i for i, g in enumerate(self.genes)})

    def index_of(self, gene: GeneId) -> int:
        try:
            return self._index[gene]
        except KeyError:
            raise UnknownIdError(f"gene {gene!r} not in distance matrix") from None

    def value(self, gi: GeneId, gj: GeneId) -> float:
        return float(self.d[self.index_of(gi), self.index_of(gj)])

    def restrict(self, genes: list[GeneId] | tuple[GeneId, ...]) -> "DistanceMatrix":
        """Submatrix over ``genes``, in the given order."""
        idx = np.array([self.index_of(g) for g in genes])
        return DistanceMatrix(tuple(genes), self.d[np.ix_(idx, idx)])

    def require_same_genes(self, other: "DistanceMatrix") -> None:
        if self.genes != other.genes:
            raise AlignmentError("distance matrices cover different ordered gene lists")


def load_expression(data: bytes | str) -> ExpressionMatrix:
    """Parse a ``gene_id TAB cond1 TAB ...`` TSV with one gene per row.

    Missing or non-numeric cells, ragged rows and duplicate gene ids are
    rejected with the offending line number; genes with missing values must
    be dropped by the caller before writing the file.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln.rstrip("\r") for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ParseError("empty expression file", 1)
    header = lines[0].split("\t")
    if len(header) < 2:
        raise ParseError("header must name at least one condition", 1)
    conditions = tuple(h.strip() for h in header[1:])
    genes: list[GeneId] = []
    rows: list[list[float]] = []
    seen: set[GeneId] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ParseError(
                f"expected {len(header)} columns, got {len(fields)}", lineno
            )
        gene = fields[0].strip()
        if not gene:
            raise ParseError("empty gene_id", lineno)
        if gene in seen:
            raise ParseError(f"duplicate gene id {gene!r}", lineno)
        seen.add(gene)
        row = []
        for col, cell in enumerate(fields[1:], start=2):
            cell = cell.strip()
            if not cell:
                raise ParseError(f"missing value in column {col}", lineno)
            try:
                row.append(float(cell))
            except ValueError:
                raise ParseError(f"non-numeric cell {cell!r} in column {col}", lineno) from None
        genes.append(gene)
        rows.append(row)
    if not genes:
        raise ParseError("no gene rows in expression file", 2)
    return ExpressionMatrix(tuple(genes), conditions, np.array(rows, dtype=float))


def l2_normalize_blocks(
    m: ExpressionMatrix, blocks: list[tuple[int, int]]
) -> ExpressionMatrix:
    """Divide each gene's sub-vector by its Euclidean norm, per condition block.

    ``blocks`` are half-open [start, stop) column ranges that must partition
    the condition indices; use one block for single-experiment data.  Meant
    for concatenating multiple experiments on a comparable scale.
    """
    n_cond = len(m.conditions)
    covered: list[int] = []
    for start, stop in blocks:
        if not 0 <= start < stop <= n_cond:
            raise ValidationError(f"block ({start}, {stop}) out of range")
        covered.extend(range(start, stop))
    if sorted(covered) != list(range(n_cond)) or len(covered) != n_cond:
        raise ValidationError("blocks must partition the condition indices")
    out = m.values.copy()
    for start, stop in blocks:
        sub = out[:, start:stop]
        norms = np.sqrt((sub * sub).sum(axis=1))
        zero = np.nonzero(norms == 0.0)[0]
        if zero.size:
            raise DegenerateError(
                f"gene {m.genes[zero[0]]!r} has an all-zero vector in block "
                f"({start}, {stop})"
            )
        out[:, start:stop] = sub / norms[:, None]
    return ExpressionMatrix(m.genes, m.conditions, out)


def _pairwise_euclidean(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    d = np.zeros((n, n))
    for i in range(n - 1):
        diff = values[i + 1 :] - values[i]
        d[i, i + 1 :] = np.sqrt((diff * diff).sum(axis=1))
    return d + d.T


def _pairwise_pearson(values: np.ndarray, genes: tuple[GeneId, ...]) -> np.ndarray:
    centered = values - values.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered * centered).sum(axis=1))
    flat = np.nonzero(norms == 0.0)[0]
    if flat.size:
        raise DegenerateError(
            f"gene {genes[flat[0]]!r} has zero variance; Pearson distance undefined"
        )
    n = len(genes)
    d = np.zeros((n, n))
    for i in range(n - 1):
        r = centered[i + 1 :] @ centered[i] / (norms[i + 1 :] * norms[i])
        np.clip(r, -1.0, 1.0, out=r)
        d[i, i + 1 :] = (1.0 - r) / 2.0
    return d + d.T


def expression_distance_matrix(m: ExpressionMatrix, metric: str = EUCLIDEAN) -> DistanceMatrix:
    """Pairwise expression distances normalized to [0, 1].

    ``euclidean`` divides by the dataset's maximum off-diagonal distance so
    at least one pair sits at 1; ``pearson`` maps correlation r to
    (1 - r) / 2.  Each entry depends only on its own gene pair, so row-block
    parallel fills cannot change the result.
    """
    if len(m.genes) < 2:
        raise ValidationError("need at least 2 genes for a distance matrix")
    if metric == EUCLIDEAN:
        d = _pairwise_euclidean(m.values)
        peak = d.max()
        if peak == 0.0:
            raise DegenerateError(
                "all expression rows identical; cannot normalize euclidean distances"
            )
        d /= peak
    elif metric == PEARSON:
        d = _pairwise_pearson(m.values, m.genes)
    else:
        raise ValidationError(f"unknown expression metric {metric!r}")
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(m.genes, d)


def write_distance_tsv(dm: DistanceMatrix) -> str:
    """Full square matrix as TSV with a gene-id header row and column."""
    lines = ["gene_id\t" + "\t".join(dm.genes)]
    for i, g in enumerate(dm.genes):
        lines.append(g + "\t" + "\t".join(f"{v:.10g}" for v in dm.d[i]))
    return "\n".join(lines) + "\n"


def read_distance_tsv(text: str) -> DistanceMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty distance matrix file", 1)
    genes = tuple(lines[0].rstrip("\r").split("\t")[1:])
    n = len(genes)
    d = np.zeros((n, n))
    if len(lines) != n + 1:
        raise ParseError(f"expected {n} data rows, got {len(lines) - 1}", len(lines))
    for i, line in enumerate(lines[1:], start=2):
        fields = line.rstrip("\r").split("\t")
        if len(fields) != n + 1:
            raise ParseError(f"expected {n + 1} columns, got {len(fields)}", i)
        if fields[0] != genes[i - 2]:
            raise ParseError(f"row gene {fields[0]!r} != column gene {genes[i - 2]!r}", i)
        try:
            d[i - 2] = [float(x) for x in fields[1:]]
        except ValueError:
            raise ParseError("non-numeric distance cell", i) from None
    d = np.minimum(d, d.T)  # %.10g round-trip can break exact symmetry
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(genes, d)
