"""FastAPI application exposing the scorer wire protocol.

Stateless: every request is scored independently, so concurrent requests
never interact. In dummy mode responses are fully deterministic; a real
model backend should document its own nondeterminism sources (for example
GPU reductions) when registered.
"""
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import dummy
from .config import DUMMY, SidecarConfig, StartupError


class Passage(BaseModel):
    id: str
    text: str


class RerankRequest(BaseModel):
    query: str
    passages: list[Passage]


class NliPair(BaseModel):
    premise: str
    hypothesis: str


class NliRequest(BaseModel):
    pairs: list[NliPair]


class EmbedRequest(BaseModel):
    texts: list[str]


class DummyBackend:
    """The builtin no-download backend (see the dummy module)."""

    def rerank(self, query: str, passages: list[Passage]) -> list[dict]:
        return [
            {"id": p.id, "score": dummy.rerank_score(query, p.text)} for p in passages
        ]

    def nli(self, pairs: list[NliPair]) -> list[dict]:
        return [dummy.nli_verdict(p.premise, p.hypothesis) for p in pairs]

    def embed(self, texts: list[str]) -> tuple[list[list[float]], int]:
        return [dummy.embed_text(t) for t in texts], dummy.EMBED_DIM


_BACKENDS: dict[str, Callable[[SidecarConfig], object]] = {
    DUMMY: lambda config: DummyBackend(),
}


def register_backend(identifier: str, loader: Callable[[SidecarConfig], object]) -> None:
    """Register a model backend loader under a model identifier."""
    _BACKENDS[identifier] = loader


def _load(identifier: str, config: SidecarConfig):
    loader = _BACKENDS.get(identifier)
    if loader is None:
        raise StartupError(
            f"unknown model identifier {identifier!r}; registered: {sorted(_BACKENDS)}"
        )
    try:
        return loader(config)
    except StartupError:
        raise
    except Exception as exc:
        raise StartupError(f"failed to load model {identifier!r}: {exc}") from exc


def create_app(config: SidecarConfig | None = None) -> FastAPI:
    config = config or SidecarConfig()
    reranker = _load(config.reranker_model, config)
    nli_backend = _load(config.nli_model, config)
    embedder = _load(config.embed_model, config)

    app = FastAPI(title="bioground-sidecar")

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={"error": str(exc.errors())})

    def batch_guard(size: int):
        if size > config.max_batch_size:
            return JSONResponse(
                status_code=413,
                content={
                    "error": f"batch of {size} exceeds max batch size {config.max_batch_size}"
                },
            )
        return None

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/v1/rerank")
    async def rerank(request: RerankRequest):
        rejected = batch_guard(len(request.passages))
        if rejected:
            return rejected
        return {"scores": reranker.rerank(request.query, request.passages)}

    @app.post("/v1/nli")
    async def nli(request: NliRequest):
        rejected = batch_guard(len(request.pairs))
        if rejected:
            return rejected
        return {"verdicts": nli_backend.nli(request.pairs)}

    @app.post("/v1/embed")
    async def embed(request: EmbedRequest):
        rejected = batch_guard(len(request.texts))
        if rejected:
            return rejected
        vectors, dimension = embedder.embed(request.texts)
        return {"vectors": vectors, "dimension": dimension}

    return app
