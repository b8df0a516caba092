"""Serve any embedder over the wire protocol (GET /info, POST /embed).

Bridges a model process onto the protocol the RemoteEmbedder adapter
speaks. Runs the deterministic reference embedder by default, which is
also how tests and offline demos stand in for a real VLM endpoint:

    python -m guiscout.embed.server --port 8191 --dim 512 --seed 42
"""

from __future__ import annotations

import base64
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..core import DEFAULT_DIM, DEFAULT_SEED
from ..errors import GuiscoutError
from .base import Embedder
from .reference import ReferenceEmbedder


def _make_handler(embedder: Embedder):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _reply(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path.rstrip("/") == "/info" or self.path == "/info":
                d = embedder.descriptor
                self._reply(200, {
                    "name": d.name,
                    "dim": d.dim,
                    "modality": d.modality,
                    "deterministic": d.deterministic,
                })
            else:
                self._reply(404, {"error": "not found"})

        def do_POST(self):
            if self.path != "/embed":
                self._reply(404, {"error": "not found"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                payload = json.loads(self.rfile.read(length))
                modality = payload["modality"]
                items = payload["items"]
                if modality == "text":
                    embs = embedder.embed_text(items)
                elif modality == "image":
                    raw = [base64.b64decode(item) for item in items]
                    embs = embedder.embed_image(raw)
                else:
                    self._reply(400, {"error": f"unknown modality {modality!r}"})
                    return
            except GuiscoutError as exc:
                self._reply(400, {"error": str(exc)})
                return
            except Exception as exc:  # noqa: BLE001
                self._reply(500, {"error": str(exc)})
                return
            self._reply(200, {"vectors": [e.values.tolist() for e in embs]})

    return Handler


class EmbedServer:
    """Threaded wire-protocol server; start()/stop() or use as a context."""

    def __init__(self, embedder: Embedder, host: str = "127.0.0.1", port: int = 0):
        self._server = ThreadingHTTPServer((host, port), _make_handler(embedder))
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "EmbedServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "EmbedServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def main() -> None:
    import argparse

    parser = argparse.ArgumentParser(description="Serve the reference embedder.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8191)
    parser.add_argument("--dim", type=int, default=DEFAULT_DIM)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args()
    server = EmbedServer(
        ReferenceEmbedder(dim=args.dim, seed=args.seed), host=args.host, port=args.port
    )
    print(f"embed server listening on {server.url}")
    try:
        server._server.serve_forever()
    except KeyboardInterrupt:
        server._server.server_close()


if __name__ == "__main__":
    main()
