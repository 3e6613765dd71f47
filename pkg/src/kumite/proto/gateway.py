"""Browser gateway: a WebSocket endpoint that relays protocol lines to the
TCP server unchanged, one line per text frame.  Stateless pass-through.

Implements the server side of RFC 6455 directly (handshake, masked client
frames, text/ping/pong/close); the package mirror carries no websocket
library.  Fragmented and binary frames are rejected with a close frame.
"""
from __future__ import annotations

import base64
import hashlib
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass, field

from .server import default_port

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


@dataclass
class GatewayConfig:
    host: str = "127.0.0.1"
    port: int = 4748
    upstream_host: str = "127.0.0.1"
    upstream_port: int = field(default_factory=default_port)


def encode_frame(opcode: int, payload: bytes) -> bytes:
    head = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head += bytes([n])
    elif n < (1 << 16):
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + payload


def read_frame(rfile) -> tuple[int, bytes] | None:
    """(opcode, payload) of one client frame, or None on EOF."""
    head = rfile.read(2)
    if len(head) < 2:
        return None
    fin = head[0] & 0x80
    opcode = head[0] & 0x0F
    masked = head[1] & 0x80
    n = head[1] & 0x7F
    if n == 126:
        n = struct.unpack(">H", rfile.read(2))[0]
    elif n == 127:
        n = struct.unpack(">Q", rfile.read(8))[0]
    if not masked:
        raise ValueError("client frames must be masked")
    if not fin:
        raise ValueError("fragmented frames not supported")
    mask = rfile.read(4)
    data = bytearray(rfile.read(n))
    for i in range(n):
        data[i] ^= mask[i % 4]
    return opcode, bytes(data)


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


class _Bridge(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        cfg: GatewayConfig = self.server.config

        # HTTP upgrade
        request_line = self.rfile.readline()
        if not request_line:
            return
        headers: dict[str, str] = {}
        while True:
            line = self.rfile.readline()
            if not line or line in (b"\r\n", b"\n"):
                break
            name, _, value = line.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()
        key = headers.get("sec-websocket-key")
        if key is None or "websocket" not in headers.get("upgrade", "").lower():
            self.wfile.write(b"HTTP/1.1 400 Bad Request\r\n\r\nwebsocket upgrade required\r\n")
            return

        # upstream connection first: refuse the upgrade if it is unreachable
        try:
            upstream = socket.create_connection((cfg.upstream_host, cfg.upstream_port), timeout=5)
        except OSError as exc:
            body = f"upstream {cfg.upstream_host}:{cfg.upstream_port} unreachable: {exc}\r\n"
            self.wfile.write(
                b"HTTP/1.1 502 Bad Gateway\r\nContent-Type: text/plain\r\n\r\n"
                + body.encode("ascii")
            )
            return

        self.wfile.write(
            b"HTTP/1.1 101 Switching Protocols\r\n"
            b"Upgrade: websocket\r\n"
            b"Connection: Upgrade\r\n"
            b"Sec-WebSocket-Accept: " + accept_key(key).encode("ascii") + b"\r\n\r\n"
        )
        self.wfile.flush()

        wlock = threading.Lock()
        done = threading.Event()

        def pump_upstream() -> None:
            # server lines -> one text frame each, newline stripped
            try:
                rf = upstream.makefile("rb")
                while not done.is_set():
                    line = rf.readline()
                    if not line:
                        break
                    with wlock:
                        self.wfile.write(encode_frame(OP_TEXT, line.rstrip(b"\n")))
                        self.wfile.flush()
            except OSError:
                pass
            finally:
                done.set()
                try:
                    with wlock:
                        self.wfile.write(encode_frame(OP_CLOSE, b""))
                        self.wfile.flush()
                except OSError:
                    pass

        pump = threading.Thread(target=pump_upstream, daemon=True)
        pump.start()
        try:
            while not done.is_set():
                try:
                    frame = read_frame(self.rfile)
                except (ValueError, OSError):
                    break
                if frame is None:
                    break
                opcode, payload = frame
                if opcode == OP_TEXT:
                    upstream.sendall(payload + b"\n")
                elif opcode == OP_PING:
                    with wlock:
                        self.wfile.write(encode_frame(OP_PONG, payload))
                        self.wfile.flush()
                elif opcode == OP_CLOSE:
                    break
        finally:
            done.set()
            try:
                upstream.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            upstream.close()
            pump.join(timeout=2)


class _ThreadedTCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class Gateway:
    def __init__(self, config: GatewayConfig | None = None):
        self.config = config or GatewayConfig()
        self._server = _ThreadedTCPServer((self.config.host, self.config.port), _Bridge)
        self._server.config = self.config
        self.port = self._server.server_address[1]
        self._thread: threading.Thread | None = None

    def start(self) -> "Gateway":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "Gateway":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def gateway(config: GatewayConfig | None = None) -> Gateway:
    """Start the browser bridge; returns the running handle."""
    return Gateway(config).start()
