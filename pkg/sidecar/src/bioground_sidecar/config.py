from dataclasses import dataclass

DUMMY = "dummy"


class StartupError(Exception):
    """A configured model backend could not be loaded."""


@dataclass(frozen=True)
class SidecarConfig:
    """Service configuration.

    Model identifiers name the backend per endpoint. The builtin "dummy"
    backend is deterministic, needs no downloads, and returns responses
    schema-identical to a model backend. Other identifiers must be registered
    via `bioground_sidecar.app.register_backend` before the app is created.
    """

    host: str = "127.0.0.1"
    port: int = 8230
    reranker_model: str = DUMMY
    nli_model: str = DUMMY
    embed_model: str = DUMMY
    max_batch_size: int = 64
    device: str = "cpu"

    def __post_init__(self):
        if self.max_batch_size < 1:
            raise StartupError("max_batch_size must be >= 1")
        if not (0 < self.port < 65536):
            raise StartupError(f"port out of range: {self.port}")
