import numpy as np

from gofusion.annotations import load_annotations
from gofusion.expression import load_expression
from gofusion.ontology import parse_obo
from gofusion.semantic import semantic_distance_matrix
from gofusion.synth import make_dataset, write_dataset


def test_shapes_and_split():
    ds = make_dataset(seed=1)
    assert len(ds.expression.genes) == 200
    assert len(ds.b_genes) == 20
    assert set(ds.a_genes) | set(ds.b_genes) == set(ds.expression.genes)
    assert not set(ds.a_genes) & set(ds.b_genes)
    fams = [ds.family[g] for g in ds.expression.genes]
    assert sorted(set(fams)) == [0, 1]
    assert fams.count(0) == fams.count(1)


def test_deterministic():
    a = make_dataset(seed=9)
    b = make_dataset(seed=9)
    assert a.annotations == b.annotations
    assert (a.expression.values == b.expression.values).all()
    assert a.b_genes == b.b_genes


def test_corpora_build(fixture_ontology):
    ds = make_dataset(seed=2, subgroups_per_family=4, genes_per_subgroup=5)
    ca = ds.corpus_a()
    cf = ds.corpus_full()
    assert ca.gene_universe_size == len(ds.a_genes)
    assert cf.gene_universe_size == 40
    for g in ds.b_genes:
        assert g not in ca.direct
        assert g in cf.direct


def test_semantic_structure_graded():
    ds = make_dataset(seed=3, subgroups_per_family=5, genes_per_subgroup=4)
    corpus = ds.corpus_full()
    genes = list(ds.expression.genes)
    dm = semantic_distance_matrix(ds.ontology, corpus, genes)
    same_sub, same_fam, cross = [], [], []
    for i, gi in enumerate(genes):
        for j in range(i + 1, len(genes)):
            gj = genes[j]
            v = dm.d[i, j]
            if ds.subgroup[gi] == ds.subgroup[gj]:
                same_sub.append(v)
            elif ds.family[gi] == ds.family[gj]:
                same_fam.append(v)
            else:
                cross.append(v)
    assert np.mean(same_sub) < np.mean(same_fam) < np.mean(cross)
    assert all(v == 1.0 for v in cross)


def test_written_files_load_back(tmp_path):
    ds = make_dataset(seed=4, subgroups_per_family=3, genes_per_subgroup=4)
    files = write_dataset(ds, tmp_path)
    onto = parse_obo(files["obo"].read_bytes())
    corpus = load_annotations(
        files["annotations"].read_bytes(), onto, "biological_process"
    )
    assert corpus.gene_universe_size == len(ds.a_genes)
    expr_a = load_expression(files["expression_a"].read_bytes())
    assert expr_a.genes == ds.a_genes
    expr_b = load_expression(files["expression_b"].read_bytes())
    assert expr_b.genes == ds.b_genes
    truth = load_annotations(files["truth"].read_bytes(), onto, "biological_process")
    assert set(truth.direct) == set(ds.b_genes)
    for g in ds.b_genes:
        assert truth.direct[g] == ds.annotations[g]
