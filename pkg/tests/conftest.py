"""Shared fixtures: a scripted local chat-completion endpoint."""

import json
import threading
import time
from collections import deque
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest


class ScriptedHandler(BaseHTTPRequestHandler):
    """Replies with the next queued action.

    Actions: a string (reply content), an int (HTTP status to fail with),
    "__hang__" (sleep past client timeouts), "__badjson__" (non-JSON body).
    An empty queue answers "B".
    """

    def do_POST(self):
        server = self.server
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length)) if length else {}
        server.seen_requests.append(
            {"payload": payload, "headers": dict(self.headers)}
        )
        action = server.script.popleft() if server.script else "B"
        if isinstance(action, int):
            self.send_response(action)
            self.end_headers()
            return
        if action == "__hang__":
            time.sleep(2.0)
        if action == "__badjson__":
            body = b"not json"
        else:
            body = json.dumps(
                {"choices": [{"message": {"content": action}}]}
            ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def chat_server():
    server = HTTPServer(("127.0.0.1", 0), ScriptedHandler)
    server.script = deque()
    server.seen_requests = []
    thread = threading.Thread(
        target=server.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True
    )
    thread.start()
    endpoint = f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions"
    yield server, endpoint
    server.shutdown()
    server.server_close()
