import argparse
import sys

import uvicorn

from .app import create_app
from .config import SidecarConfig, StartupError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bioground-sidecar")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8230)
    parser.add_argument("--reranker-model", default="dummy")
    parser.add_argument("--nli-model", default="dummy")
    parser.add_argument("--embed-model", default="dummy")
    parser.add_argument("--max-batch-size", type=int, default=64)
    parser.add_argument("--device", default="cpu", help="device hint passed to model loaders")
    args = parser.parse_args(argv)
    try:
        config = SidecarConfig(
            host=args.host,
            port=args.port,
            reranker_model=args.reranker_model,
            nli_model=args.nli_model,
            embed_model=args.embed_model,
            max_batch_size=args.max_batch_size,
            device=args.device,
        )
        app = create_app(config)
    except StartupError as exc:
        print(f"startup error: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
