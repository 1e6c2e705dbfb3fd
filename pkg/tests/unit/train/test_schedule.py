import pytest

from mdtnet.core import ConfigurationError, ValidationError, build_config
from mdtnet.train import IterationBudget, TrainConfig, balance_iterations, lr_at


def _cfg(**kwargs):
    return TrainConfig(source_domain=0, target_domains=(1,), **{"total_iters": 100, **kwargs})


def test_lr_schedule_is_a_step_function():
    cfg = _cfg()
    assert lr_at(0, cfg) == 1e-3
    assert lr_at(49, cfg) == 1e-3
    assert lr_at(50, cfg) == pytest.approx(1e-4)
    assert lr_at(99, cfg) == pytest.approx(1e-4)


def test_lr_schedule_respects_decay_settings():
    cfg = _cfg(base_lr=0.01, decay_factor=0.5, decay_at=0.25)
    assert lr_at(24, cfg) == 0.01
    assert lr_at(25, cfg) == 0.005


@pytest.mark.parametrize(
    "kwargs",
    [
        {"total_iters": 0},
        {"decay_at": 0.0},
        {"decay_at": 1.0},
        {"target_domains": ()},
        {"target_domains": (1, 1)},
        {"target_domains": (0, 1)},
        {"base_lr": float("nan")},
        {"batch": 0},
    ],
)
def test_invalid_train_configs(kwargs):
    with pytest.raises(ConfigurationError):
        build_config(TrainConfig, **{"source_domain": 0, "target_domains": (1,), "total_iters": 10, **kwargs})


def test_balance_reproduces_epoch_ratio():
    plan = balance_iterations({"C": 2500, "S": 1000, "T": 2000}, budget=80000)
    assert {d: b.epochs for d, b in plan.items()} == {"C": 32, "S": 80, "T": 40}
    assert plan["C"] == IterationBudget(epochs=32, total_iters=80000)


def test_balance_with_batches_and_reference_epochs():
    plan = balance_iterations({"a": 10, "b": 10}, budget=100, batch=4)
    assert plan["a"] == plan["b"] == IterationBudget(epochs=10, total_iters=30)

    plan = balance_iterations({"a": 7}, {"a": 3}, batch=2)
    assert plan["a"] == IterationBudget(epochs=3, total_iters=12)

    assert balance_iterations({"x": 1000}, budget=400)["x"].epochs == 1


@pytest.mark.parametrize(
    "call",
    [
        lambda: balance_iterations({"a": 0}, budget=10),
        lambda: balance_iterations({"a": 5}),
        lambda: balance_iterations({"a": 5}, {"b": 2}),
        lambda: balance_iterations({"a": 5}, budget=10, batch=0),
    ],
)
def test_balance_rejects_bad_input(call):
    with pytest.raises(ValidationError):
        call()
