"""HTTP facade over classify/compile/simulate, plus static hosting for the
browser UI.

The model and map are immutable snapshots taken at startup; requests are
stateless and safe to serve concurrently. Non-2xx responses always carry
an ApiError JSON body: {"code", "message", "detail"?}.
"""

from __future__ import annotations

import io
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import playground
from .classifier import MlpModel
from .compiler import (
    LowConfidence,
    NoSymbolsFound,
    UnknownSymbolName,
    classify_sheet,
    command_to_json_dict,
    compile_program,
    parse_symbols,
)
from .errors import DomainError
from .imaging import GrayImage, load_pgm
from .playground import PlaygroundMap

MAX_BODY_BYTES = 8 * 1024 * 1024

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".map": "application/json",
}

_FALLBACK_PAGE = b"""<!doctype html>
<html><head><title>hpl service</title></head>
<body><h1>hpl service</h1>
<p>The API is up. No UI build is installed; see the README for building
the frontend, or use the /api endpoints directly.</p></body></html>
"""


class ApiFault(Exception):
    """Carries an HTTP status + machine code for the error body."""

    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.detail = detail


def _decode_image(body: bytes, content_type: str) -> GrayImage:
    if not body:
        raise ApiFault(400, "bad_image", "empty request body")
    kind = content_type.split(";")[0].strip().lower()
    if kind == "image/png" or body[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            from PIL import Image
        except ImportError:
            raise ApiFault(400, "bad_image", "PNG support requires Pillow") from None
        try:
            with Image.open(io.BytesIO(body)) as im:
                gray = im.convert("L")
                arr = np.asarray(gray, dtype=np.uint8)
        except Exception as exc:
            raise ApiFault(400, "bad_image", f"undecodable PNG: {exc}") from None
        return GrayImage.from_array(arr)
    try:
        return load_pgm(body)
    except DomainError as exc:
        raise ApiFault(400, "bad_image", f"undecodable image: {exc}") from None


def _parse_json_body(body: bytes) -> dict:
    try:
        doc = json.loads(body.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ApiFault(400, "malformed_json", f"request body is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ApiFault(400, "malformed_json", "request body must be a JSON object")
    return doc


def _program_from_doc(doc: dict):
    symbols = doc.get("symbols")
    if not isinstance(symbols, list) or not all(isinstance(s, str) for s in symbols):
        raise ApiFault(400, "malformed_json", '"symbols" must be a list of strings')
    try:
        return parse_symbols(",".join(symbols))
    except UnknownSymbolName as exc:
        raise ApiFault(400, "unknown_symbol", str(exc), detail={"token": exc.token, "index": exc.index}) from None


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "hpl"

    # --- plumbing ---

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        origin = self.server.allow_origin  # type: ignore[attr-defined]
        if origin:
            self.send_header("Access-Control-Allow-Origin", origin)
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc) -> None:
        self._send(status, json.dumps(doc).encode("utf-8"))

    def _send_error_json(self, fault: ApiFault) -> None:
        doc = {"code": fault.code, "message": str(fault)}
        if fault.detail is not None:
            doc["detail"] = fault.detail
        self._send_json(fault.status, doc)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY_BYTES:
            # drain is pointless; answer and let the connection close
            self.close_connection = True
            raise ApiFault(413, "payload_too_large", f"body exceeds {MAX_BODY_BYTES} bytes")
        return self.rfile.read(length) if length else b""

    # --- routes ---

    def do_OPTIONS(self):
        self.send_response(204)
        origin = self.server.allow_origin  # type: ignore[attr-defined]
        if origin:
            self.send_header("Access-Control-Allow-Origin", origin)
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        try:
            if self.path == "/api/health":
                model: MlpModel = self.server.model  # type: ignore[attr-defined]
                self._send_json(200, {"status": "ok", "model_version": model.version})
            elif self.path == "/api/map/default":
                pmap: PlaygroundMap = self.server.map  # type: ignore[attr-defined]
                self._send_json(200, playground.map_to_json_dict(pmap))
            elif self.path.startswith("/api/"):
                self._send_error_json(ApiFault(404, "not_found", f"no such endpoint {self.path}"))
            else:
                self._serve_static()
        except ApiFault as fault:
            self._send_error_json(fault)

    def do_POST(self):
        try:
            body = self._read_body()
            if self.path == "/api/classify":
                self._handle_classify(body)
            elif self.path == "/api/compile":
                self._handle_compile(body)
            elif self.path == "/api/simulate":
                self._handle_simulate(body)
            else:
                self._send_error_json(ApiFault(404, "not_found", f"no such endpoint {self.path}"))
        except ApiFault as fault:
            self._send_error_json(fault)

    # --- handlers ---

    def _handle_classify(self, body: bytes) -> None:
        img = _decode_image(body, self.headers.get("Content-Type", ""))
        model: MlpModel = self.server.model  # type: ignore[attr-defined]
        try:
            result = classify_sheet(img, model)
        except NoSymbolsFound as exc:
            raise ApiFault(422, "no_symbols", str(exc)) from None
        except LowConfidence as exc:
            detail = [
                {"box": list(r.box), "confidence": round(r.confidence, 6), "best_guess": r.best_guess.canonical_name}
                for r in exc.rejected
            ]
            raise ApiFault(422, "low_confidence", str(exc), detail=detail) from None
        doc = result.program.to_json_dict()
        doc["boxes"] = [list(b) for b in result.boxes]
        if result.rejected:
            doc["rejected"] = [
                {"box": list(r.box), "confidence": round(r.confidence, 6), "best_guess": r.best_guess.canonical_name}
                for r in result.rejected
            ]
        self._send_json(200, doc)

    def _handle_compile(self, body: bytes) -> None:
        doc = _parse_json_body(body)
        program = _program_from_doc(doc)
        self._send_json(200, [command_to_json_dict(c) for c in compile_program(program)])

    def _handle_simulate(self, body: bytes) -> None:
        doc = _parse_json_body(body)
        program_doc = doc.get("program")
        if not isinstance(program_doc, dict):
            raise ApiFault(400, "malformed_json", '"program" must be a JSON object')
        program = _program_from_doc(program_doc)
        if "map" in doc and doc["map"] is not None:
            try:
                pmap = playground.load_map(json.dumps(doc["map"]))
            except DomainError as exc:
                raise ApiFault(400, "bad_map", str(exc)) from None
        else:
            pmap = self.server.map  # type: ignore[attr-defined]
        result = playground.run(compile_program(program), pmap)
        self._send_json(200, playground.result_to_json_dict(result))

    # --- static UI ---

    def _serve_static(self) -> None:
        static_dir = self.server.static_dir  # type: ignore[attr-defined]
        rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
        if static_dir is not None:
            root = Path(static_dir).resolve()
            target = (root / rel).resolve()
            if root in target.parents or target == root:
                if target.is_dir():
                    target = target / "index.html"
                if target.is_file():
                    ctype = _CONTENT_TYPES.get(target.suffix.lower(), "application/octet-stream")
                    self._send(200, target.read_bytes(), ctype)
                    return
        if rel == "index.html":
            self._send(200, _FALLBACK_PAGE, "text/html; charset=utf-8")
        else:
            self._send_error_json(ApiFault(404, "not_found", f"no such file {self.path}"))


class HplServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, model: MlpModel, pmap: PlaygroundMap, static_dir: str | None, allow_origin: str | None):
        super().__init__(address, _Handler)
        self.model = model
        self.map = pmap
        self.static_dir = static_dir
        self.allow_origin = allow_origin


def create_server(
    model: MlpModel,
    pmap: PlaygroundMap | None = None,
    host: str = "0.0.0.0",
    port: int = 8080,
    static_dir: str | None = None,
    allow_origin: str | None = None,
) -> HplServer:
    if pmap is None:
        pmap = playground.default_map()
    return HplServer((host, port), model, pmap, static_dir, allow_origin)


def serve_in_thread(server: HplServer) -> threading.Thread:
    """Convenience for tests: run the server on a daemon thread."""
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
