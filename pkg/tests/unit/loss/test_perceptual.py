import pytest
import torch

from mdtnet.core import ConfigurationError, NonFiniteLossError, ShapeError, build_config
from mdtnet.loss import (
    DomainTransfer,
    LossWeights,
    TransferOutputs,
    content_loss,
    domain_loss,
    total_loss,
)


def _rand(*shape, seed=0):
    return torch.rand(*shape, generator=torch.Generator().manual_seed(seed))


def _outputs(source, reconstruction, *transfers):
    return TransferOutputs(
        source=source,
        reconstruction=reconstruction,
        transfers=[DomainTransfer(d, reference, generated) for d, reference, generated in transfers],
    )


def test_content_loss_examples(stub_fen):
    a = torch.full((1, 1, 1, 1), 2.0)
    b = torch.full((1, 1, 1, 1), 5.0)
    assert content_loss(stub_fen, a, b, ["x"]).item() == 9.0
    assert content_loss(stub_fen, a, a, ["x"]).item() == 0.0


def test_content_loss_is_symmetric(fen):
    a, b = _rand(2, 1, 32, 32, seed=1), _rand(2, 1, 32, 32, seed=2)
    assert content_loss(fen, a, b, ["relu4_1"]) == content_loss(fen, b, a, ["relu4_1"])


def test_content_loss_needs_equal_shapes(stub_fen):
    with pytest.raises(ShapeError):
        content_loss(stub_fen, torch.zeros(1, 1, 4, 4), torch.zeros(1, 1, 8, 8), ["x"])


def test_domain_loss_example(stub_fen):
    generated = torch.full((1, 1, 4, 4), 1.0)
    reference = torch.full((1, 1, 4, 4), 3.0)
    assert domain_loss(stub_fen, generated, reference, ["x"]).item() == 64.0
    assert domain_loss(stub_fen, reference, reference, ["x"]).item() == 0.0


def test_domain_loss_ignores_spatial_arrangement(stub_fen):
    generated, reference = _rand(2, 3, 8, 8, seed=3), _rand(2, 3, 8, 8, seed=4)
    perm = torch.randperm(64, generator=torch.Generator().manual_seed(5))
    shuffled = generated.flatten(2)[:, :, perm].reshape_as(generated)
    base = domain_loss(stub_fen, generated, reference, ["x"])
    assert domain_loss(stub_fen, shuffled, reference, ["x"]).item() == pytest.approx(
        base.item(), abs=1e-6
    )


def test_domain_loss_accepts_different_sizes(fen):
    generated = _rand(2, 1, 32, 32, seed=6)
    reference = _rand(3, 1, 64, 64, seed=7)
    value = domain_loss(fen, generated, reference, ["relu1_2", "relu2_2"])
    assert value.item() >= 0.0


def test_total_loss_arithmetic(stub_fen):
    source = torch.zeros(1, 1, 1, 2)
    reconstruction = torch.tensor([[[[0.0, 2.0]]]])
    reference = torch.zeros(1, 1, 1, 2)
    # gram of [a, a] is a^2, so the domain term is a^4
    generated = torch.full((1, 1, 1, 2), 3.0**0.25)
    report = total_loss(
        stub_fen,
        _outputs(source, reconstruction, (1, reference, generated)),
        LossWeights(default_alpha=1.0),
        ["x"],
        ["x"],
    )
    assert report.content == 2.0
    assert report.domain_per_target[1] == pytest.approx(3.0, rel=1e-6)
    assert report.total == pytest.approx(5.0, rel=1e-6)
    assert report.objective.item() == pytest.approx(report.total, rel=1e-6)


def test_zero_targets_is_pure_content(stub_fen):
    source, reconstruction = _rand(2, 1, 8, 8, seed=1), _rand(2, 1, 8, 8, seed=2)
    report = total_loss(stub_fen, _outputs(source, reconstruction), LossWeights(), ["x"], ["x"])
    assert report.domain_per_target == {}
    assert report.total == report.content


def test_zero_at_identity(fen):
    source = _rand(2, 1, 32, 32, seed=1)
    reference = _rand(2, 1, 32, 32, seed=2)
    report = total_loss(
        fen,
        _outputs(source, source, (1, reference, reference), (2, reference, reference)),
        LossWeights(lambda_content_on_transfer=0.0),
        ["relu4_1"],
        ["relu1_2", "relu2_2"],
    )
    assert report.total == 0.0
    assert report.domain_per_target == {1: 0.0, 2: 0.0}


def test_components_are_non_negative(fen):
    for seed in range(5):
        images = [_rand(2, 1, 32, 32, seed=10 * seed + k) for k in range(4)]
        report = total_loss(
            fen,
            _outputs(images[0], images[1], (1, images[2], images[3])),
            LossWeights(lambda_content_on_transfer=0.5),
            ["relu4_1"],
            ["relu1_2", "relu3_2"],
        )
        assert report.content >= 0
        assert report.transfer_content >= 0
        assert all(v >= 0 for v in report.domain_per_target.values())
        assert report.total >= 0


def test_total_is_affine_in_alpha(stub_fen):
    images = [_rand(2, 1, 8, 8, seed=k) for k in range(4)]
    outputs = _outputs(images[0], images[1], (1, images[2], images[3]))
    at_one = total_loss(stub_fen, outputs, LossWeights(alpha={1: 1.0}), ["x"], ["x"])
    at_two = total_loss(stub_fen, outputs, LossWeights(alpha={1: 2.0}), ["x"], ["x"])
    assert at_two.total - at_one.total == pytest.approx(at_one.domain_per_target[1], rel=1e-6)
    assert at_two.alpha == {1: 2.0}


def test_transfer_content_term(stub_fen):
    source = torch.zeros(1, 1, 2, 2)
    generated = torch.ones(1, 1, 2, 2)
    weights = LossWeights(default_alpha=1.0, lambda_content_on_transfer=0.5)
    report = total_loss(
        stub_fen, _outputs(source, source, (1, generated, generated)), weights, ["x"], ["x"]
    )
    assert report.transfer_content == 1.0
    assert report.total == 0.5


def test_non_finite_component_is_named(stub_fen):
    source = torch.zeros(1, 1, 2, 2)
    broken = torch.full((1, 1, 2, 2), float("nan"))
    with pytest.raises(NonFiniteLossError) as info:
        total_loss(stub_fen, _outputs(source, broken), LossWeights(), ["x"], ["x"])
    assert info.value.component == "content"
    assert "non-finite loss" in str(info.value)

    infinite = torch.full((1, 1, 2, 2), float("inf"))
    with pytest.raises(NonFiniteLossError) as info:
        total_loss(
            stub_fen, _outputs(source, source, (2, source, infinite)), LossWeights(), ["x"], ["x"]
        )
    assert info.value.component == "domain[2]"


def test_weights_validation():
    with pytest.raises(ConfigurationError):
        build_config(LossWeights, alpha={1: 0.0})
    with pytest.raises(ConfigurationError):
        build_config(LossWeights, default_alpha=float("inf"))
    with pytest.raises(ConfigurationError):
        build_config(LossWeights, lambda_content_on_transfer=-1.0)
    assert LossWeights(alpha={3: 5.0}).alpha_for(3) == 5.0
    assert LossWeights().alpha_for(0) == 100.0


def test_report_json_line(stub_fen):
    source = torch.zeros(1, 1, 2, 2)
    report = total_loss(
        stub_fen, _outputs(source, source, (1, source, source)), LossWeights(), ["x"], ["x"]
    )
    line = report.to_json(12, 1e-3)
    assert line == {
        "iter": 12,
        "content": 0.0,
        "domain": {"1": 0.0},
        "transfer_content": 0.0,
        "total": 0.0,
        "lr": 1e-3,
    }
