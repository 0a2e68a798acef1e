"""Threaded TCP file transfer over IPv4.

One file per connection. The client streams a single frame and waits
for a one-byte ack; the server handles each connection in its own
thread, so transfers run concurrently and a malformed frame on one
connection never disturbs another.

Frame layout, bit exact:

    magic     8 bytes  b"ETEAXFER"
    version   1 byte   0x01
    name_len  2 bytes  unsigned big-endian, 1..255
    name      n bytes  UTF-8 file name, no '/', '\\' or NUL
    body_len  8 bytes  unsigned big-endian
    body      m bytes
    crc       4 bytes  CRC-32 over everything preceding, big-endian

Ack bytes: 0x06 stored, 0x15 rejected. The server never interprets the
body; decryption and de-embedding are the receiver's explicit next
steps. Received files land in the output directory under the sent name,
with a numeric suffix (name.1, name.2, ...) appended on collision. The
frame is fully received and CRC-checked in memory before the target
file is created, so a failed or interrupted transfer leaves nothing
behind.
"""

from __future__ import annotations

import logging
import socket
import struct
import threading
import zlib
from pathlib import Path

from .errors import EteaError

log = logging.getLogger(__name__)

FRAME_MAGIC = b"ETEAXFER"
FRAME_VERSION = 1
ACK_OK = 0x06
ACK_REJECT = 0x15
DEFAULT_PORT = 7474
DEFAULT_TIMEOUT = 30.0  # seconds; a stalled peer must not pin a handler forever
DEFAULT_MAX_BODY = 1 << 30  # refuse absurd length fields before allocating

_NAME_LEN = struct.Struct(">H")
_BODY_LEN = struct.Struct(">Q")
_CRC = struct.Struct(">I")


class ConnectFailed(EteaError):
    """Could not establish the TCP connection."""


class Rejected(EteaError):
    """The server acked 0x15 (or hung up without storing the file)."""


class IoError(EteaError):
    """The connection failed after it was established."""


class BindFailed(EteaError):
    """The server could not bind its listening port."""


class FrameError(EteaError):
    """Incoming bytes do not form a valid transfer frame."""


def _validate_name(name: str) -> None:
    raw = name.encode("utf-8")
    if not raw or len(raw) > 255:
        raise FrameError("file name must be 1..255 UTF-8 bytes")
    if "/" in name or "\\" in name or "\x00" in name or name in (".", ".."):
        raise FrameError(f"unsafe file name {name!r}")


def encode_frame(filename: str, body: bytes) -> bytes:
    """Serialize one transfer frame; validates the file name."""
    _validate_name(filename)
    name = filename.encode("utf-8")
    parts = [
        FRAME_MAGIC,
        bytes([FRAME_VERSION]),
        _NAME_LEN.pack(len(name)),
        name,
        _BODY_LEN.pack(len(body)),
        body,
    ]
    crc = 0
    for part in parts:
        crc = zlib.crc32(part, crc)
    parts.append(_CRC.pack(crc))
    return b"".join(parts)


def _recv_exact(conn: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = conn.recv(min(65536, n - len(buf)))
        if not chunk:
            raise FrameError("connection closed mid-frame")
        buf.extend(chunk)
    return bytes(buf)


def read_frame(conn: socket.socket, max_body: int = DEFAULT_MAX_BODY) -> tuple[str, bytes]:
    """Read and verify one frame from a socket; returns (filename, body)."""
    head = _recv_exact(conn, len(FRAME_MAGIC) + 1 + _NAME_LEN.size)
    if head[:8] != FRAME_MAGIC:
        raise FrameError("bad frame magic")
    if head[8] != FRAME_VERSION:
        raise FrameError(f"unsupported frame version {head[8]}")
    (name_len,) = _NAME_LEN.unpack_from(head, 9)
    if not 1 <= name_len <= 255:
        raise FrameError(f"name length {name_len} out of range")
    name_raw = _recv_exact(conn, name_len)
    body_len_raw = _recv_exact(conn, _BODY_LEN.size)
    (body_len,) = _BODY_LEN.unpack(body_len_raw)
    if body_len > max_body:
        raise FrameError(f"declared body of {body_len} bytes exceeds limit {max_body}")
    body = _recv_exact(conn, body_len)
    (stored_crc,) = _CRC.unpack(_recv_exact(conn, _CRC.size))
    crc = zlib.crc32(head)
    crc = zlib.crc32(name_raw, crc)
    crc = zlib.crc32(body_len_raw, crc)
    crc = zlib.crc32(body, crc)
    if crc != stored_crc:
        raise FrameError("frame checksum mismatch")
    try:
        name = name_raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FrameError(f"file name is not valid UTF-8: {exc}") from None
    _validate_name(name)
    return name, body


def send_file(
    host: str, port: int, path: str | Path, timeout: float = DEFAULT_TIMEOUT
) -> int:
    """Send one file; returns the ack byte (ACK_OK) on success.

    Raises ConnectFailed when no connection comes up, Rejected when the
    server refuses the frame, IoError when the connection breaks mid
    transfer. The file is read before connecting, so unreadable paths
    fail with a plain OSError and no socket is opened.
    """
    path = Path(path)
    frame = encode_frame(path.name, path.read_bytes())
    try:
        conn = socket.create_connection((host, port), timeout=timeout)
    except OSError as exc:
        raise ConnectFailed(f"cannot connect to {host}:{port}: {exc}") from None
    with conn:
        conn.settimeout(timeout)
        try:
            conn.sendall(frame)
            ack = conn.recv(1)
        except OSError as exc:
            raise IoError(f"transfer to {host}:{port} failed: {exc}") from None
    if not ack:
        raise Rejected("server closed the connection without an ack")
    if ack[0] == ACK_REJECT:
        raise Rejected("server rejected the transfer")
    if ack[0] != ACK_OK:
        raise IoError(f"unexpected ack byte {ack[0]:#04x}")
    return ack[0]


class FileServer:
    """Accepts connections concurrently and stores one file per frame.

    Per-connection errors are logged, acked 0x15 and never take the
    server down. Use as a context manager or call start()/stop();
    ``serve_forever`` blocks for command-line use. Binding port 0 picks
    a free port, readable from ``.port`` after start().
    """

    def __init__(
        self,
        host: str = "0.0.0.0",
        port: int = DEFAULT_PORT,
        out_dir: str | Path = ".",
        *,
        read_timeout: float = DEFAULT_TIMEOUT,
        max_body: int = DEFAULT_MAX_BODY,
    ) -> None:
        self.host = host
        self.port = port
        self.out_dir = Path(out_dir)
        self.read_timeout = read_timeout
        self.max_body = max_body
        self._listener: socket.socket | None = None
        self._accept_thread: threading.Thread | None = None
        self._name_lock = threading.Lock()

    def start(self) -> "FileServer":
        if self._listener is not None:
            return self
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            listener = socket.create_server((self.host, self.port))
        except OSError as exc:
            raise BindFailed(f"cannot serve on {self.host}:{self.port}: {exc}") from None
        self._listener = listener
        self.port = listener.getsockname()[1]
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="etea-accept", daemon=True
        )
        self._accept_thread.start()
        log.info("listening on %s:%d, storing into %s", self.host, self.port, self.out_dir)
        return self

    def stop(self) -> None:
        listener, self._listener = self._listener, None
        if listener is not None:
            listener.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5)
            self._accept_thread = None

    def __enter__(self) -> "FileServer":
        return self.start()

    def __exit__(self, *exc_info: object) -> None:
        self.stop()

    def serve_forever(self) -> None:
        self.start()
        assert self._accept_thread is not None
        self._accept_thread.join()

    def _accept_loop(self) -> None:
        listener = self._listener
        while listener is not None and self._listener is listener:
            try:
                conn, addr = listener.accept()
            except OSError:
                break  # listener closed by stop()
            threading.Thread(
                target=self._handle, args=(conn, addr), name="etea-handler", daemon=True
            ).start()

    def _handle(self, conn: socket.socket, addr: tuple[str, int]) -> None:
        with conn:
            conn.settimeout(self.read_timeout)
            try:
                name, body = read_frame(conn, self.max_body)
            except (FrameError, OSError) as exc:
                log.warning("rejected transfer from %s:%d: %s", addr[0], addr[1], exc)
                self._ack(conn, ACK_REJECT)
                return
            try:
                path = self._store(name, body)
            except OSError as exc:
                log.error("cannot store %r from %s:%d: %s", name, addr[0], addr[1], exc)
                self._ack(conn, ACK_REJECT)
                return
            log.info("stored %s (%d bytes) from %s:%d", path, len(body), addr[0], addr[1])
            self._ack(conn, ACK_OK)

    @staticmethod
    def _ack(conn: socket.socket, code: int) -> None:
        try:
            conn.sendall(bytes([code]))
        except OSError:
            pass  # peer already gone; nothing left to tell it

    def _store(self, name: str, body: bytes) -> Path:
        # exclusive create reserves the name atomically, the lock keeps
        # suffix numbering tidy under concurrent collisions
        with self._name_lock:
            suffix = 0
            path = self.out_dir / name
            while True:
                try:
                    handle = path.open("xb")
                    break
                except FileExistsError:
                    suffix += 1
                    path = self.out_dir / f"{name}.{suffix}"
        try:
            with handle:
                handle.write(body)
        except OSError:
            path.unlink(missing_ok=True)
            raise
        return path


def serve(
    host: str = "0.0.0.0",
    port: int = DEFAULT_PORT,
    out_dir: str | Path = ".",
    *,
    read_timeout: float = DEFAULT_TIMEOUT,
    max_body: int = DEFAULT_MAX_BODY,
) -> None:
    """Run a server until interrupted; blocks forever on success."""
    server = FileServer(
        host, port, out_dir, read_timeout=read_timeout, max_body=max_body
    ).start()
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
