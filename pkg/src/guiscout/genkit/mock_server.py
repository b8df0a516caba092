"""Scripted mock for the chat and image endpoints.

Lets every generation path run offline and deterministically: the
default chat script answers refine prompts with a canned sections block
(the well-known four health-report sections when the description asks
for one), code prompts with an HTML document embedding every section
name, and adjust prompts by applying footer-style edits. The image
endpoint returns tiny deterministic PNGs. Tests inject their own
scripts; `server.requests` logs every call for round-counting.

Runs standalone too:  python -m guiscout.genkit.mock_server --port 8192
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, List, Optional

from PIL import Image

HEALTH_REPORT_SECTIONS = (
    ("header section", "Top bar with the report title and the selected date range.",
     "<header><h1>Health Report</h1></header>"),
    ("profile section", "The user's avatar, name, and key vitals at a glance.",
     "<section id=\"profile\"><img alt=\"avatar\"><h2>Jane</h2></section>"),
    ("summary section", "Aggregated daily metrics: steps, heart rate, sleep.",
     "<section id=\"summary\"><ul><li>Steps</li></ul></section>"),
    ("charts section", "Trend charts for each tracked metric over time.",
     "<section id=\"charts\"><canvas></canvas></section>"),
)

MOCK_FOOTER = '<footer id="footer section">Mock footer: about, contact, legal.</footer>'


def sections_block(sections) -> str:
    parts = []
    for name, desc, code in sections:
        parts.append(f"name: {name}\ndescription: {desc}\ncode:\n{code}")
    return "```sections\n" + "\n---\n".join(parts) + "\n```"


def default_chat_reply(messages: List[dict], temperature: float) -> str:
    user = ""
    for m in reversed(messages):
        if m.get("role") == "user":
            user = m.get("content", "")
            break
    low = user.lower()
    if "```sections" in user:  # refine prompt asks for the sections schema
        if "health monitoring report" in low:
            return "Here are the refined sections.\n" + sections_block(HEALTH_REPORT_SECTIONS)
        title = _description_of(user) or "page"
        generic = (
            (f"{title} main section", f"Primary content area for {title}.",
             "<main></main>"),
            (f"{title} details section", f"Supporting details below the {title} content.",
             "<section></section>"),
        )
        return sections_block(generic)
    if "adjust the html" in low.replace("\n", " "):
        code = _fenced_html(user)
        instruction = _instruction_of(user)
        if "footer" in instruction.lower():
            if "</body>" in code:
                adjusted = code.replace("</body>", f"  {MOCK_FOOTER}\n</body>")
            else:
                adjusted = code + "\n" + MOCK_FOOTER
        else:
            adjusted = code + f"\n<!-- adjusted: {instruction} -->"
        return "```html\n" + adjusted + "\n```"
    if "## " in user:  # code prompt carries the rendered section list
        names = re.findall(r"^## (.+)$", user, flags=re.MULTILINE)
        body = "\n".join(
            f'  <section id="{n}"><h2>{n}</h2></section>' for n in names
        )
        doc = (
            "<!DOCTYPE html>\n<html>\n<head><title>Mock UI</title>"
            "<style>section{margin:1em}</style></head>\n<body>\n"
            f"{body}\n</body>\n</html>"
        )
        return "```html\n" + doc + "\n```"
    return f"echo: {user}"


def _description_of(prompt: str) -> str:
    m = re.search(r"Description:\n(.+)", prompt)
    return m.group(1).strip() if m else ""


def _instruction_of(prompt: str) -> str:
    m = re.search(r"Instruction: (.+)", prompt)
    return m.group(1).strip() if m else ""


def _fenced_html(prompt: str) -> str:
    m = re.search(r"```html\n(.*?)\n```", prompt, flags=re.DOTALL)
    return m.group(1) if m else ""


def default_image_reply(prompt: str, n: int) -> List[bytes]:
    out = []
    for i in range(n):
        digest = hashlib.sha256(f"{prompt}:{i}".encode("utf-8")).digest()
        img = Image.new("RGB", (8, 8), tuple(digest[:3]))
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        out.append(buf.getvalue())
    return out


class MockModelServer:
    """Threaded chat+image mock; scripts are injectable per instance."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        chat_script: Optional[Callable[[List[dict], float], str]] = None,
        image_script: Optional[Callable[[str, int], List[bytes]]] = None,
        fail_images_after: Optional[int] = None,
    ):
        self.requests: List[dict] = []
        self._req_lock = threading.Lock()
        self.chat_script = chat_script or default_chat_reply
        self.image_script = image_script or default_image_reply
        self.fail_images_after = fail_images_after
        self._server = ThreadingHTTPServer((host, port), self._make_handler())
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def chat_requests(self) -> List[dict]:
        with self._req_lock:
            return [r for r in self.requests if r["path"] == "/v1/chat"]

    def image_requests(self) -> List[dict]:
        with self._req_lock:
            return [r for r in self.requests if r["path"] == "/v1/images"]

    def _record(self, path: str, payload: dict) -> int:
        with self._req_lock:
            self.requests.append({"path": path, "payload": payload})
            return len([r for r in self.requests if r["path"] == path])

    def _make_handler(server_self):  # noqa: N805 - handler factory
        outer = server_self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):
                pass

            def _reply(self, status: int, payload: dict) -> None:
                body = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_POST(self):
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    payload = json.loads(self.rfile.read(length))
                except ValueError:
                    self._reply(400, {"error": "bad json"})
                    return
                if self.path == "/v1/chat":
                    outer._record("/v1/chat", payload)
                    try:
                        content = outer.chat_script(
                            payload.get("messages", []), payload.get("temperature", 1.0)
                        )
                    except MockFailure as exc:
                        self._reply(exc.status, {"error": str(exc)})
                        return
                    self._reply(200, {"content": content})
                elif self.path == "/v1/images":
                    count = outer._record("/v1/images", payload)
                    if (
                        outer.fail_images_after is not None
                        and count > outer.fail_images_after
                    ):
                        self._reply(500, {"error": "scripted image failure"})
                        return
                    try:
                        images = outer.image_script(
                            payload.get("prompt", ""), int(payload.get("n", 1))
                        )
                    except MockFailure as exc:
                        self._reply(exc.status, {"error": str(exc)})
                        return
                    self._reply(200, {
                        "images": [base64.b64encode(b).decode("ascii") for b in images]
                    })
                else:
                    self._reply(404, {"error": "not found"})

        return Handler

    def start(self) -> "MockModelServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "MockModelServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


class MockFailure(Exception):
    """Raise from a script to make the mock reply with an HTTP error."""

    def __init__(self, status: int = 500, message: str = "scripted failure"):
        self.status = status
        super().__init__(message)


def main() -> None:
    import argparse

    parser = argparse.ArgumentParser(description="Run the mock model endpoints.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8192)
    args = parser.parse_args()
    server = MockModelServer(host=args.host, port=args.port)
    print(f"mock model server listening on {server.url}")
    try:
        server._server.serve_forever()
    except KeyboardInterrupt:
        server._server.server_close()


if __name__ == "__main__":
    main()
