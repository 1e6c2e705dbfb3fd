from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Protocol, runtime_checkable

if TYPE_CHECKING:
    from mdtnet.loss import LossReport
    from mdtnet.train.config import TrainConfig
    from mdtnet.train.trainer import TrainLog


class TrainingHook(Enum):
    """Hooks fired by the training loop."""

    TRAIN_START = "train_start"
    STEP_END = "step_end"  # after every optimizer step
    CHECKPOINT = "checkpoint"
    TRAIN_END = "train_end"


@runtime_checkable
class Plugin(Protocol):
    """Protocol that training plugins must implement."""

    name: str

    def on_train_start(self, config: "TrainConfig", out_dir: Path, start_iter: int) -> None:
        """
        Called once before the first step of a run (or of a resumed run).

        Parameters:
            config (TrainConfig): The training configuration in effect.
            out_dir (Path): The run's output directory.
            start_iter (int): Iteration the loop starts from; nonzero when resuming.
        """
        ...

    def on_step_end(self, iteration: int, report: "LossReport", lr: float) -> None:
        """
        Called after each optimizer step.

        Parameters:
            iteration (int): Index of the step that just ran.
            report (LossReport): The loss report computed before the update.
            lr (float): Learning rate used for the update.
        """
        ...

    def on_checkpoint(self, iteration: int, path: Path) -> None:
        """
        Called after a checkpoint has been written.

        Parameters:
            iteration (int): Number of completed steps stored in the checkpoint.
            path (Path): Where the checkpoint was written.
        """
        ...

    def on_train_end(self, log: "TrainLog") -> None:
        """
        Called when the loop stops, including when it stops on an error.

        Parameters:
            log (TrainLog): Everything the run recorded so far.
        """
        ...


class BasePlugin:
    """Base implementation of Plugin protocol with default no-op behavior."""

    name: str = "base"

    def on_train_start(self, config: "TrainConfig", out_dir: Path, start_iter: int) -> None:
        pass

    def on_step_end(self, iteration: int, report: "LossReport", lr: float) -> None:
        pass

    def on_checkpoint(self, iteration: int, path: Path) -> None:
        pass

    def on_train_end(self, log: "TrainLog") -> None:
        pass


class PluginManager:
    """Manages plugin registration and execution."""

    def __init__(self, plugins: list[Plugin] | None = None):
        self.plugins: list[Plugin] = []
        if plugins:
            for plugin in plugins:
                self.add_plugin(plugin)

    def add_plugin(self, plugin: Any) -> None:
        """
        Register a plugin after verifying it implements the Plugin protocol.

        Raises:
            TypeError: If the object does not implement the Plugin protocol.
        """
        if not isinstance(plugin, Plugin):
            raise TypeError(f"Object {plugin} does not implement the Plugin protocol")
        self.plugins.append(plugin)

    def execute_hook(self, hook: TrainingHook, *args: Any, **kwargs: Any) -> None:
        """Call `on_<hook>` on every registered plugin, in registration order."""
        method_name = f"on_{hook.value}"
        for plugin in self.plugins:
            method = getattr(plugin, method_name, None)
            if method is not None:
                method(*args, **kwargs)
