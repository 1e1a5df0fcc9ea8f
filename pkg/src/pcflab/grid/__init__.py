from pcflab.grid.schemes import Chunk, SearchScheme, chunk_scheme
from pcflab.grid.store import ResultStore
from pcflab.grid.coordinator import Coordinator, serve_coordinator
from pcflab.grid.worker import WorkerError, worker_run
from pcflab.grid.pipeline import VerifiedFormula, verify_pipeline

__all__ = [
    "SearchScheme",
    "Chunk",
    "chunk_scheme",
    "ResultStore",
    "Coordinator",
    "serve_coordinator",
    "worker_run",
    "WorkerError",
    "VerifiedFormula",
    "verify_pipeline",
]
