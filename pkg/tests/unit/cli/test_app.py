import json

import pytest
from typer.testing import CliRunner

from mdtnet.cli.app import app
from mdtnet.data import scan_dataset
from mdtnet.metrics import read_reports_csv
from mdtnet.model import load_checkpoint
from mdtnet.plugins import read_train_log

runner = CliRunner()

RUN_CONFIG = {
    "model": {"base_channels": 4, "scales": 2, "transfer_depth": 1, "transfer_growth": 4},
    "fen": {"domain_layers": ["relu1_2", "relu2_2"]},
    "train": {"total_iters": 2, "batch": 2, "checkpoint_every": 0},
    "data": {"holdout": 2},
    "eval": {"layers": ["relu2_2"], "batch": 2},
}


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "corpus"
    result = invoke("synth", "--out", out, "--domains", 3, "--per-domain", 4, "--size", "32x32", "--seed", 5)
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture(scope="module")
def run_dir(corpus, tmp_path_factory):
    root = tmp_path_factory.mktemp("run")
    config = root / "config.json"
    config.write_text(json.dumps(RUN_CONFIG))
    out = root / "out"
    result = invoke(
        "train", "--data", corpus, "--source", "cirrus", "--out", out,
        "--config", config, "--ablation", "single-conv",
    )
    assert result.exit_code == 0, result.output
    return out


def test_synth_writes_every_domain(corpus):
    datasets = scan_dataset(corpus)
    assert [d.name for d in datasets] == ["cirrus", "spectralis", "topcon"]
    assert all(d.count == 4 for d in datasets)
    assert (corpus / "cirrus" / "masks").is_dir()


def test_synth_names_extra_domains_by_index(tmp_path):
    out = tmp_path / "wide"
    result = invoke("synth", "--out", out, "--domains", 4, "--per-domain", 1, "--size", "32x32")
    assert result.exit_code == 0, result.output
    assert [d.name for d in scan_dataset(out)] == ["domain00", "domain01", "domain02", "domain03"]
    result = invoke("train", "--data", out, "--source", "domain_0", "--out", tmp_path / "run")
    assert result.exit_code == 2


def test_synth_is_deterministic(corpus, tmp_path):
    again = tmp_path / "again"
    result = invoke("synth", "--out", again, "--domains", 3, "--per-domain", 4, "--size", "32x32", "--seed", 5)
    assert result.exit_code == 0, result.output
    for image in sorted(corpus.rglob("*.png")):
        assert (again / image.relative_to(corpus)).read_bytes() == image.read_bytes()


def test_synth_refuses_bad_sizes_and_full_directories(corpus, tmp_path):
    assert invoke("synth", "--out", tmp_path / "x", "--size", "63x63").exit_code == 2
    assert invoke("synth", "--out", tmp_path / "y", "--size", "big").exit_code == 2
    assert invoke("synth", "--out", corpus, "--per-domain", 1).exit_code == 2


def test_synth_style_file(tmp_path):
    styles = tmp_path / "styles.json"
    styles.write_text(json.dumps([{"speckle_sigma": 0.1}, {"contrast_gamma": 0.5}]))
    out = tmp_path / "styled"
    result = invoke("synth", "--out", out, "--domains", 2, "--per-domain", 1, "--size", "32x32", "--style-file", styles)
    assert result.exit_code == 0, result.output
    assert len(scan_dataset(out)) == 2

    styles.write_text(json.dumps([{"colour": 1}]))
    result = invoke("synth", "--out", tmp_path / "bad", "--domains", 1, "--style-file", styles)
    assert result.exit_code == 2


def test_train_needs_a_source(corpus, tmp_path):
    assert invoke("train", "--data", corpus, "--out", tmp_path).exit_code == 2
    assert invoke("train", "--data", corpus, "--source", "heidelberg", "--out", tmp_path).exit_code == 2


def test_train_rejects_bad_config(corpus, tmp_path):
    config = tmp_path / "config.json"
    config.write_text('{"train": {"total_iters": 0}}')
    assert invoke("train", "--data", corpus, "--source", "cirrus", "--out", tmp_path / "o", "--config", config).exit_code == 2
    config.write_text('{"train": ')
    assert invoke("train", "--data", corpus, "--source", "cirrus", "--out", tmp_path / "o", "--config", config).exit_code == 2


def test_train_outputs(run_dir):
    resolved = json.loads((run_dir / "resolved-config.json").read_text())
    assert resolved["model"]["transfer_variant"] == "single_conv"
    assert resolved["model"]["n_domains"] == 3
    assert resolved["train"]["targets"] == ["spectralis", "topcon"]
    assert resolved["data"]["size"] == [32, 32]

    assert [line["iter"] for line in read_train_log(run_dir / "train-log.jsonl")] == [0, 1]
    checkpoint = load_checkpoint(run_dir / "final.mdt")
    assert checkpoint.iteration == 2
    assert checkpoint.targets == [1, 2]
    assert checkpoint.metadata["ablation"] == "single-conv"
    assert all(len(names) == 2 for names in checkpoint.metadata["holdout"].values())


def test_translate(run_dir, corpus, tmp_path):
    out = tmp_path / "translated"
    result = invoke(
        "translate", "--checkpoint", run_dir / "final.mdt", "--in", corpus / "cirrus",
        "--out", out, "--copy-masks",
    )
    assert result.exit_code == 0, result.output
    for target in ("spectralis", "topcon"):
        assert len(list((out / target).glob("*.png"))) == 4
        assert len(list((out / target / "masks").glob("*.png"))) >= 4

    single = tmp_path / "single"
    result = invoke(
        "translate", "--checkpoint", run_dir / "final.mdt", "--in", corpus / "cirrus",
        "--out", single, "--targets", "topcon",
    )
    assert result.exit_code == 0, result.output
    assert [p.name for p in single.iterdir()] == ["topcon"]

    result = invoke(
        "translate", "--checkpoint", run_dir / "final.mdt", "--in", corpus / "cirrus",
        "--out", single, "--targets", "heidelberg",
    )
    assert result.exit_code == 2


def test_translate_refuses_mismatched_config(run_dir, corpus, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"model": {"base_channels": 8}}))
    args = ["translate", "--checkpoint", run_dir / "final.mdt", "--in", corpus / "cirrus", "--out", tmp_path / "o", "--config", config]
    assert invoke(*args).exit_code == 2
    assert invoke(*args, "--override").exit_code == 0


def test_eval(run_dir, corpus, tmp_path):
    out = tmp_path / "eval"
    result = invoke("eval", "--checkpoint", run_dir / "final.mdt", "--data", corpus, "--source", "cirrus", "--out", out)
    assert result.exit_code == 0, result.output
    assert (out / "cirrus_to_spectralis.json").is_file()
    assert (out / "cirrus_to_topcon.json").is_file()
    rows = read_reports_csv(out / "metrics.csv")
    assert [r["target"] for r in rows] == ["spectralis", "topcon", "average"]
    for row in rows:
        assert float(row["dpd"]) == pytest.approx(
            float(row["fid"]) + 100 - float(row["lpips_pct"]), abs=1e-6
        )

    held = tmp_path / "held"
    result = invoke(
        "eval", "--checkpoint", run_dir / "final.mdt", "--data", corpus, "--source", "cirrus",
        "--out", held, "--holdout-only",
    )
    assert result.exit_code == 0, result.output
    assert json.loads((held / "cirrus_to_topcon.json").read_text())["n_images"] == 2
