"""Minimal HTTP/1.1 JSON service in front of a BulletinBoard.

    POST /entries            {"kind": ..., "payload": {...}} -> {"seq", "entry_hash"}
    GET  /entries?from=N     {"entries": [raw line, ...], "next": M}
    GET  /ballots/{hash}     {"status": "Found", "seq", "kind"} | 404 {"status": "Absent"}
    GET  /snapshot           the board file bytes (application/x-ndjson)
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import log as board_log

logger = logging.getLogger(__name__)

PAGE_SIZE = 100

_ERROR_STATUS = {
    board_log.BoardClosed: (409, "closed"),
    board_log.DuplicateBallot: (409, "duplicate"),
    board_log.OrderingError: (409, "ordering"),
    board_log.InvalidBallot: (422, "invalid-ballot"),
    board_log.MalformedPayload: (400, "malformed"),
}


def _make_handler(board: board_log.BulletinBoard):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            logger.debug("%s %s", self.address_string(), fmt % args)

        def _send(self, status: int, body: bytes, ctype: str = "application/json") -> None:
            self.send_response(status)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _json(self, status: int, obj) -> None:
            self._send(status, json.dumps(obj, separators=(",", ":")).encode())

        def do_GET(self):
            url = urlparse(self.path)
            snap = board.snapshot()
            if url.path == "/snapshot":
                self._send(200, snap.to_bytes(), "application/x-ndjson")
            elif url.path == "/entries":
                try:
                    start = int(parse_qs(url.query).get("from", ["0"])[0])
                except ValueError:
                    return self._json(400, {"error": "bad from"})
                start = max(start, 0)
                page = snap.entries[start : start + PAGE_SIZE]
                self._json(
                    200,
                    {"entries": [e.to_line().decode("ascii") for e in page], "next": start + len(page)},
                )
            elif url.path.startswith("/ballots/"):
                try:
                    h = bytes.fromhex(url.path[len("/ballots/") :])
                except ValueError:
                    return self._json(400, {"error": "bad hash"})
                found = snap.lookup(h)
                if found is None:
                    return self._json(404, {"status": "Absent"})
                self._json(200, {"status": "Found", "seq": found.seq, "kind": found.kind})
            else:
                self._json(404, {"error": "not found"})

        def do_POST(self):
            if urlparse(self.path).path != "/entries":
                return self._json(404, {"error": "not found"})
            try:
                length = int(self.headers.get("Content-Length", "0"))
                body = json.loads(self.rfile.read(length))
                kind, payload = body["kind"], body["payload"]
            except (ValueError, KeyError, TypeError):
                return self._json(400, {"error": "malformed", "detail": "expected {kind, payload}"})
            try:
                seq, h = board.append(kind, payload)
            except board_log.BoardError as exc:
                status, name = _ERROR_STATUS.get(type(exc), (400, "rejected"))
                return self._json(status, {"error": name, "detail": str(exc)})
            self._json(201, {"seq": seq, "entry_hash": h.hex()})

    return Handler


def make_server(board: board_log.BulletinBoard, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), _make_handler(board))


def serve_in_thread(board: board_log.BulletinBoard, host: str = "127.0.0.1", port: int = 0):
    """Start a server on a daemon thread; returns (server, base_url)."""
    server = make_server(board, host, port)
    t = threading.Thread(target=server.serve_forever, daemon=True)
    t.start()
    h, p = server.server_address[:2]
    return server, f"http://{h}:{p}"
