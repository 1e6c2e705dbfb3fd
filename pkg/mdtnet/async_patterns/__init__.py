from .concurrency import WORKERS_ENV, ParallelExecutor, workers_from_env

__all__ = ["ParallelExecutor", "WORKERS_ENV", "workers_from_env"]
