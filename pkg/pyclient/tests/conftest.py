import socket
import threading
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


class StubServer:
    """Replays a canned transcript: asserts every client line matches the
    recorded one and answers with the recorded server lines."""

    def __init__(self, transcript_path):
        self.rows = []
        for row in Path(transcript_path).read_text().splitlines():
            side, _, line = row.partition(": ")
            self.rows.append((side, line))
        self.mismatch = None
        self._srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._srv.bind(("127.0.0.1", 0))
        self._srv.listen(1)
        self.port = self._srv.getsockname()[1]
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self):
        conn, _ = self._srv.accept()
        rf = conn.makefile("rb")
        try:
            for side, line in self.rows:
                if side == "C":
                    got = rf.readline().decode("ascii").rstrip("\n")
                    if got != line:
                        self.mismatch = (line, got)
                        return
                else:
                    conn.sendall((line + "\n").encode("ascii"))
        finally:
            conn.close()
            self._srv.close()

    def join(self):
        self._thread.join(timeout=10)


@pytest.fixture()
def live_server(tmp_path):
    """A real server from the main package (test dependency only)."""
    from kumite.proto import GameServer, ServerConfig

    srv = GameServer(ServerConfig(port=0, replay_dir=tmp_path / "replays")).start()
    yield srv
    srv.stop()
