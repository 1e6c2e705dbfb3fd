from .app import app, main
from .config import (
    DataSettings,
    EvalSettings,
    RunConfigFile,
    TrainSettings,
    load_run_config,
    write_resolved_config,
)

__all__ = [
    "DataSettings",
    "EvalSettings",
    "RunConfigFile",
    "TrainSettings",
    "app",
    "load_run_config",
    "main",
    "write_resolved_config",
]
