import json
import logging
from pathlib import Path
from typing import IO, TYPE_CHECKING

from .base import BasePlugin

if TYPE_CHECKING:
    from mdtnet.loss import LossReport
    from mdtnet.train.config import TrainConfig
    from mdtnet.train.trainer import TrainLog

logger = logging.getLogger(__name__)

TRAIN_LOG_NAME = "train-log.jsonl"


class JsonLinesLogPlugin(BasePlugin):
    """
    Writes one JSON object per training step to `<out>/train-log.jsonl`.

    A resumed run appends to the existing file. Every line is flushed as it is
    written, so the log survives a run that aborts.
    """

    name = "jsonl-log"

    def __init__(self, path: Path | None = None):
        self.path = path
        self._fh: IO[str] | None = None

    def on_train_start(self, config: "TrainConfig", out_dir: Path, start_iter: int) -> None:
        if self.path is None:
            self.path = Path(out_dir) / TRAIN_LOG_NAME
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            # drop lines a resumed run is about to write again
            kept = [e for e in read_train_log(self.path) if e["iter"] < start_iter]
            self.path.write_text("".join(json.dumps(e) + "\n" for e in kept), encoding="utf-8")
        self._fh = open(self.path, "a", encoding="utf-8")
        logger.debug(f"Writing training log to {self.path}")

    def on_step_end(self, iteration: int, report: "LossReport", lr: float) -> None:
        if self._fh is None:
            return
        self._fh.write(json.dumps(report.to_json(iteration, lr)) + "\n")
        self._fh.flush()

    def on_train_end(self, log: "TrainLog") -> None:
        self.close()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_train_log(path: Path) -> list[dict]:
    """Parse a JSON-lines training log back into dictionaries."""
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
