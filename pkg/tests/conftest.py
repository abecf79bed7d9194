import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import pytest

from aquasim.cas import cid_of_blob

DATA = Path(__file__).parent / "data"


def load_json(name):
    return json.loads((DATA / name).read_text())


class _FakeKubo(BaseHTTPRequestHandler):
    """Just enough of /api/v0/add and /api/v0/cat for the client."""

    blobs: dict
    mode = "ok"

    def log_message(self, *args):
        pass

    def _reply(self, status, body, ctype="application/json"):
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        url = urlparse(self.path)
        q = parse_qs(url.query)
        body = self.rfile.read(int(self.headers.get("Content-Length", 0)))
        if self.mode == "error":
            return self._reply(500, b'{"Message":"boom","Code":0}')
        if url.path == "/api/v0/add":
            assert q == {"raw-leaves": ["true"], "cid-version": ["1"], "hash": ["sha2-256"]}
            ctype = self.headers["Content-Type"]
            boundary = ctype.split("boundary=")[1].encode()
            part = body.split(b"--" + boundary)[1]
            data = part.split(b"\r\n\r\n", 1)[1][:-2]
            cid = str(cid_of_blob(data))
            self.server.blobs[cid] = data
            if self.mode == "garbage":
                return self._reply(200, b"not json")
            # progress line first, root last, like a real daemon
            out = json.dumps({"Name": "blob", "Bytes": len(data)}) + "\n" + json.dumps(
                {"Name": "blob", "Hash": cid, "Size": str(len(data))}) + "\n"
            return self._reply(200, out.encode())
        if url.path == "/api/v0/cat":
            cid = q["arg"][0]
            if cid not in self.server.blobs:
                return self._reply(500, b'{"Message":"block not found"}')
            return self._reply(200, self.server.blobs[cid], "text/plain")
        self._reply(404, b"404 page not found", "text/plain")


@pytest.fixture
def fake_kubo():
    handler = type("H", (_FakeKubo,), {})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    server.blobs = {}
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server.handler = handler
    server.url = f"http://127.0.0.1:{server.server_address[1]}"
    yield server
    server.shutdown()
    server.server_close()


def sha256_hex(b):
    return hashlib.sha256(b).hexdigest()


# Acceptance lines are collected here and echoed at the end of the run, so
# they show up even when pytest captures stdout.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
