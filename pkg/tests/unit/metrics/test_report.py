import json

import pydantic
import pytest
import torch

from mdtnet.core import DatasetError, ValidationError
from mdtnet.data import DomainDataset
from mdtnet.metrics import (
    FenLayerEmbedder,
    MetricsReport,
    evaluate_direction,
    read_reports_csv,
    summarize,
    write_reports,
)
from mdtnet.model import build_model


def _report(source="cirrus", target="spectralis", fid=40.0, pct=80.0, **kwargs):
    return MetricsReport.create(source, target, fid, pct, n_images=kwargs.pop("n_images", 10), **kwargs)


def test_report_enforces_dpd_identity():
    report = _report()
    assert report.dpd == pytest.approx(60.0)
    assert report.content_similarity_pct == 80.0
    with pytest.raises(pydantic.ValidationError, match="does not equal"):
        MetricsReport(source="a", target="b", fid=1.0, lpips_pct=50.0, dpd=2.0, n_images=1)
    with pytest.raises(pydantic.ValidationError):
        _report(pct=101.0)
    with pytest.raises(pydantic.ValidationError):
        _report(fid=-1.0)


def test_summarize():
    average = summarize(
        [
            _report(fid=40.0, pct=80.0, structural_consistency=0.9),
            _report("spectralis", "topcon", fid=60.0, pct=70.0, n_images=5),
        ]
    )
    assert (average.source, average.target) == ("average", "average")
    assert average.fid == 50.0
    assert average.lpips_pct == 75.0
    assert average.dpd == pytest.approx(75.0)
    assert average.n_images == 15
    assert average.structural_consistency == 0.9

    with pytest.raises(ValidationError):
        summarize([])
    with pytest.raises(ValidationError, match="lambda"):
        summarize([_report(), _report(lam=2.0)])


def test_write_reports(tmp_path):
    reports = [_report(), _report("spectralis", "cirrus", fid=20.0, pct=90.0)]
    json_paths, csv_path = write_reports(reports, tmp_path / "eval")

    assert [p.name for p in json_paths] == ["cirrus_to_spectralis.json", "spectralis_to_cirrus.json"]
    stored = json.loads(json_paths[0].read_text())
    assert stored["fid"] == 40.0 and stored["lpips_pct"] == 80.0 and stored["n_images"] == 10

    rows = read_reports_csv(csv_path)
    assert [(r["source"], r["target"]) for r in rows] == [
        ("cirrus", "spectralis"),
        ("spectralis", "cirrus"),
        ("average", "average"),
    ]
    assert float(rows[-1]["fid"]) == 30.0
    assert rows[0]["structural_consistency"] == ""
    assert list(rows[0]) == [
        "source",
        "target",
        "fid",
        "lpips_pct",
        "dpd",
        "n_images",
        "structural_consistency",
    ]


def test_identity_model_scores_a_domain_against_itself(fen, tiny_config, synthetic_datasets):
    model = build_model(tiny_config, init_seed=0)
    with torch.no_grad():
        model.head.weight.zero_()
        model.head.bias.zero_()
    domain = synthetic_datasets[0]
    report = evaluate_direction(
        model,
        domain,
        domain,
        fen,
        FenLayerEmbedder(fen, "relu4_1"),
        size=(32, 32),
        layers=("relu2_2",),
        batch=3,
    )
    assert report.lpips_pct == 100.0
    assert report.fid < 1e-2
    assert report.dpd == pytest.approx(report.fid)
    assert report.n_images == domain.count
    assert report.embedder_id == "fen:relu4_1"
    assert report.structural_consistency is not None
    assert 0.0 <= report.structural_consistency <= 1.0


def test_translation_moves_away_from_the_source(fen, tiny_config, synthetic_datasets):
    model = build_model(tiny_config, init_seed=0)
    source, target = synthetic_datasets[0], synthetic_datasets[1]
    report = evaluate_direction(
        model,
        source,
        target,
        fen,
        FenLayerEmbedder(fen, "relu4_1"),
        target_domain=1,
        size=(32, 32),
        layers=("relu2_2",),
    )
    assert (report.source, report.target) == (source.name, target.name)
    assert report.lpips_pct < 100.0
    assert report.fid > 0


def test_empty_dataset_is_refused(fen, tiny_config, synthetic_datasets):
    model = build_model(tiny_config, init_seed=0)
    with pytest.raises(ValidationError):
        evaluate_direction(
            model,
            synthetic_datasets[0],
            synthetic_datasets[1],
            fen,
            FenLayerEmbedder(fen, "relu4_1"),
            size=(32, 32),
            batch=0,
        )
    with pytest.raises(DatasetError):
        empty = DomainDataset.model_construct(domain_id=0, name="empty", image_paths=())
        evaluate_direction(
            model, empty, synthetic_datasets[1], fen, FenLayerEmbedder(fen, "relu4_1"), size=(32, 32)
        )
