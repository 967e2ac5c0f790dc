import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from defalign import kernels
from defalign.kernels import numpy_impl

DATA = Path(__file__).parent / "data"
FIXTURE60 = DATA / "fixture60"
GOLDEN = Path(__file__).parent / "golden" / "fixture60"

BACKEND_IMPLS = [pytest.param(numpy_impl, id="numpy")]
if "numba" in kernels.BACKENDS:
    BACKEND_IMPLS.append(pytest.param(kernels.BACKENDS["numba"], id="numba"))


@pytest.fixture(params=BACKEND_IMPLS)
def impl(request):
    return request.param


@pytest.fixture(params=list(kernels.BACKENDS))
def backend(request, monkeypatch):
    """Route the public kernel entry points through each backend in turn."""
    monkeypatch.setattr(kernels, "_impl", kernels.BACKENDS[request.param])
    return request.param


class MockProvider:
    """Scripted chat/embeddings server. ``script`` holds status codes to return
    before answering normally; ``hits`` counts every request."""

    def __init__(self, dim=8):
        self.dim = dim
        self.script = []
        self.bodies = []
        self.hits = 0
        self.lock = threading.Lock()

    def vector(self, text):
        import hashlib

        h = hashlib.sha256(text.encode()).digest()
        return [(b - 127.5) / 127.5 for b in h[: self.dim]]

    def handle(self, path, body):
        with self.lock:
            self.hits += 1
            self.bodies.append((path, body))
            status = self.script.pop(0) if self.script else 200
        if status != 200:
            return status, {"error": "scripted"}
        if path.endswith("/chat/completions"):
            prompt = body["messages"][0]["content"]
            word = prompt.rsplit(" ", 1)[-1]
            return 200, {"choices": [{"message": {"role": "assistant",
                                                  "content": f"Definition of {word}."}}]}
        if path.endswith("/embeddings"):
            data = [{"index": i, "embedding": self.vector(t)} for i, t in enumerate(body["input"])]
            return 200, {"data": data}
        return 404, {}


@pytest.fixture
def mock_provider(monkeypatch):
    provider = MockProvider()

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            n = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(n))
            status, payload = provider.handle(self.path, body)
            data = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, args=(0.01,), daemon=True)
    thread.start()
    provider.url = f"http://127.0.0.1:{server.server_address[1]}/v1"
    monkeypatch.setenv("DEFALIGN_TEST_KEY", "sk-test")
    yield provider
    server.shutdown()
    server.server_close()


# -- acceptance gate reporting ---------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n, title = mark.args
    prev = _CRITERIA.get(n, (title, True, []))
    details = prev[2] + [v for k, v in item.user_properties if k == "detail"]
    _CRITERIA[n] = (title, prev[1] and rep.passed, details)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, details = _CRITERIA[n]
        extra = f" ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}{extra}")
