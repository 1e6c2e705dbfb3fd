from .base import BasePlugin, Plugin, PluginManager, TrainingHook
from .jsonl import TRAIN_LOG_NAME, JsonLinesLogPlugin, read_train_log

__all__ = [
    "TRAIN_LOG_NAME",
    "BasePlugin",
    "JsonLinesLogPlugin",
    "Plugin",
    "PluginManager",
    "TrainingHook",
    "read_train_log",
]
