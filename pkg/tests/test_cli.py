import json
from pathlib import Path

import pytest

from gofusion.cli import build_config, main, parse_config_text
from gofusion.errors import ConfigError
from gofusion.synth import make_dataset, write_dataset


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    ds = make_dataset(seed=5, subgroups_per_family=6, genes_per_subgroup=5)
    write_dataset(ds, out)
    return out


def pipeline_args(data: Path, out: Path, *extra: str) -> list[str]:
    return [
        "pipeline",
        "--obo", str(data / "go.obo"),
        "--annotations", str(data / "annotations.tsv"),
        "--expression-a", str(data / "expression_a.tsv"),
        "--expression-b", str(data / "expression_b.tsv"),
        "--out-dir", str(out),
        "--seed", "7",
        "--k", "12",
        *extra,
    ]


class TestConfigParsing:
    def test_flat_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(
            '# pipeline setup\nk = 8\nmetric = "pearson"\nseed = 3\n'
            "evidence_exclude = ND,IEA\n"
        )
        raw = parse_config_text(cfg_file.read_text())
        assert raw == {"k": "8", "metric": "pearson", "seed": "3", "evidence_exclude": "ND,IEA"}

    def test_cli_overrides_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("k = 8\nseed = 3\n")
        import argparse

        args = argparse.Namespace(config=str(cfg_file), k="20", seed=None)
        cfg = build_config(args)
        assert cfg.k == 20
        assert cfg.seed == 3

    def test_unknown_key_rejected(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("clusters = 8\n")
        import argparse

        with pytest.raises(ConfigError):
            build_config(argparse.Namespace(config=str(cfg_file)))

    def test_gamma_only_with_fixed_mode(self):
        import argparse

        with pytest.raises(ConfigError):
            build_config(argparse.Namespace(config=None, balancing="gamma_tuning", gamma="0.4"))

    def test_fixed_mode_needs_gamma(self):
        import argparse

        with pytest.raises(ConfigError):
            build_config(argparse.Namespace(config=None, balancing="fixed_gamma"))


class TestPipeline:
    def test_fixed_gamma_zero_matches_expression_matrix(self, data_dir, tmp_path):
        out = tmp_path / "run"
        rc = main(pipeline_args(data_dir, out, "--balancing", "fixed_gamma", "--gamma", "0"))
        assert rc == 0
        assert (out / "d_gamma.tsv").read_bytes() == (out / "d_e.tsv").read_bytes()
        assert not (out / "tuning.json").exists()

    def test_tuning_mode_outputs(self, data_dir, tmp_path):
        out = tmp_path / "run"
        rc = main(
            pipeline_args(
                data_dir, out, "--balancing", "gamma_tuning",
                "--runs", "2", "--grid-step", "0.5",
            )
        )
        assert rc == 0
        report = json.loads((out / "tuning.json").read_text())
        assert report["grid"] == [0.0, 0.5, 1.0]
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["balancing"]["gamma_used"] == report["best_gamma"]
        assert all(v == "ok" for v in manifest["stages"].values())

    def test_percentile_mode_uses_equalized_assignment(self, data_dir, tmp_path):
        out = tmp_path / "run"
        rc = main(pipeline_args(data_dir, out, "--balancing", "percentile", "--m", "10"))
        assert rc == 0
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["balancing"] == {
            "mode": "percentile", "gamma_used": 0.5, "assign_distance": "equalized",
        }

    def test_truth_enables_recall_metrics(self, data_dir, tmp_path):
        out = tmp_path / "run"
        rc = main(
            pipeline_args(
                data_dir, out, "--balancing", "fixed_gamma", "--gamma", "1",
                "--truth", str(data_dir / "truth.tsv"), "--popular-threshold", "3",
            )
        )
        assert rc == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["recall"] is not None
        assert metrics["sc"] is not None
        assert metrics["recall_no_popular"] is not None
        assert metrics["popular_labels"]

    def test_in_process_rerun_identical(self, data_dir, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            main(pipeline_args(data_dir, out, "--balancing", "fixed_gamma", "--gamma", "0.5"))
            outs.append(out)
        for f in ("partition.tsv", "inferred.tsv", "metrics.json"):
            assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()

    def test_manifest_rerun_identical(self, data_dir, tmp_path):
        first = tmp_path / "first"
        main(pipeline_args(data_dir, first, "--balancing", "fixed_gamma", "--gamma", "0.5"))
        redo = tmp_path / "redo"
        rc = main(
            [
                "pipeline",
                "--from-manifest", str(first / "run_manifest.json"),
                "--out-dir", str(redo),
            ]
        )
        assert rc == 0
        for f in ("partition.tsv", "inferred.tsv", "metrics.json", "d_gamma.tsv"):
            assert (first / f).read_bytes() == (redo / f).read_bytes()


class TestStagedSubcommands:
    def test_distances_cluster_assign_enrich_infer_eval(self, data_dir, tmp_path):
        out = tmp_path / "staged"
        base = [
            "--obo", str(data_dir / "go.obo"),
            "--annotations", str(data_dir / "annotations.tsv"),
            "--out-dir", str(out),
        ]
        rc = main(["distances", *base, "--expression-a", str(data_dir / "expression_a.tsv")])
        assert rc == 0
        rc = main(
            [
                "cluster",
                "--d-e", str(out / "d_e.tsv"),
                "--d-go", str(out / "d_go.tsv"),
                "--balancing", "fixed_gamma", "--gamma", "0.8",
                "--k", "12", "--out-dir", str(out),
            ]
        )
        assert rc == 0
        rc = main(
            [
                "assign",
                "--partition", str(out / "partition.tsv"),
                "--expression-a", str(data_dir / "expression_a.tsv"),
                "--expression-b", str(data_dir / "expression_b.tsv"),
                "--out-dir", str(out),
            ]
        )
        assert rc == 0
        rc = main(["enrich", *base, "--partition", str(out / "partition.tsv")])
        assert rc == 0
        rc = main(["infer", *base, "--partition", str(out / "partition.tsv")])
        assert rc == 0
        rc = main(
            [
                "eval", *base,
                "--partition", str(out / "partition.tsv"),
                "--truth", str(data_dir / "truth.tsv"),
                "--inferred", str(out / "inferred.tsv"),
            ]
        )
        assert rc == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["bhi"] is not None
        assert metrics["recall"] is not None

    def test_tune_gamma_subcommand(self, data_dir, tmp_path):
        out = tmp_path / "tune"
        rc = main(
            [
                "tune-gamma",
                "--obo", str(data_dir / "go.obo"),
                "--annotations", str(data_dir / "annotations.tsv"),
                "--expression-a", str(data_dir / "expression_a.tsv"),
                "--out-dir", str(out),
                "--seed", "3", "--k", "8", "--runs", "2", "--grid-step", "0.5",
            ]
        )
        assert rc == 0
        assert (out / "tuning.csv").exists()


class TestExitCodes:
    def test_missing_required_is_config_error(self, tmp_path):
        rc = main(["pipeline", "--out-dir", str(tmp_path / "x")])
        assert rc == 2

    def test_bad_data_is_data_error(self, data_dir, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("gene_id\tc1\tc2\ng1\t1\n")
        rc = main(
            pipeline_args(data_dir, tmp_path / "out")[:-4]
            + ["--expression-a", str(bad), "--seed", "7", "--k", "3"]
        )
        assert rc == 3

    def test_degenerate_is_numeric_error(self, data_dir, tmp_path):
        # constant A rows: the maximum euclidean distance is zero
        ds = make_dataset(seed=5, subgroups_per_family=6, genes_per_subgroup=5)
        flat = tmp_path / "flat.tsv"
        flat.write_text(
            "gene_id\tc1\tc2\n" + "\n".join(f"{g}\t1\t2" for g in ds.a_genes) + "\n"
        )
        args = [
            "pipeline",
            "--obo", str(data_dir / "go.obo"),
            "--annotations", str(data_dir / "annotations.tsv"),
            "--expression-a", str(flat),
            "--expression-b", str(data_dir / "expression_b.tsv"),
            "--out-dir", str(tmp_path / "out"),
            "--seed", "1", "--k", "3",
            "--balancing", "fixed_gamma", "--gamma", "0.5",
        ]
        rc = main(args)
        assert rc == 4
        err = json.loads((tmp_path / "out" / "error.json").read_text())
        assert err["stage"] == "distances"
        assert err["error"] == "DegenerateError"
        manifest = json.loads((tmp_path / "out" / "run_manifest.json").read_text())
        assert manifest["stages"]["distances"] == "failed"
        assert manifest["stages"]["load"] == "ok"

    def test_error_record_lists_failed_stage(self, data_dir, tmp_path):
        # k larger than the gene count fails in the cluster stage
        out = tmp_path / "out"
        args = pipeline_args(data_dir, out, "--balancing", "fixed_gamma", "--gamma", "0.5")
        args[args.index("--k") + 1] = "5000"
        rc = main(args)
        assert rc == 2
        err = json.loads((out / "error.json").read_text())
        assert err["stage"] == "cluster"
