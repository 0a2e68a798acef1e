"""Command-line front end for the whole pipeline.

The sender-side one-shot is ``seal`` (encrypt a document, embed it in a
carrier) followed by ``send``; the receiver runs ``serve`` and then
``open`` (extract, decrypt) on the stored file. Each stage also exists
as its own subcommand, and the compositions are exact: ``seal`` equals
``encrypt`` plus ``embed``, ``open`` equals ``extract`` plus
``decrypt``.

Keys live in files of 32 hex digits (``keygen`` writes one) so they
never show up in shell history, and they must reach the receiver out of
band: the transport never carries key material.

Output files are written to a temporary name and renamed into place, so
a failing command leaves no partial output behind.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import analysis, codec, stego, transfer
from .cipher import Key128
from .errors import EteaError


class BadKeyFile(EteaError):
    """The key file does not hold exactly 32 hex digits."""


# one stable exit code per failure class, documented in --help
EXIT_CODES: list[tuple[type[EteaError], int]] = [
    (BadKeyFile, 3),
    (codec.BadMagic, 4),
    (codec.BadChecksum, 5),
    (codec.BadPadding, 6),
    (codec.LengthMismatch, 7),
    (stego.EmptyCarrier, 8),
    (stego.AlreadyEmbedded, 9),
    (stego.NoMagic, 10),
    (stego.CorruptTrailer, 11),
    (transfer.ConnectFailed, 12),
    (transfer.Rejected, 13),
    (transfer.BindFailed, 14),
    (transfer.IoError, 15),
    (transfer.FrameError, 15),
]
OS_ERROR_EXIT = 16

_EPILOG = """\
exit codes:
  0   success
  2   usage error
  3   bad key file
  4   not a sealed payload (bad magic or unsupported version)
  5   payload checksum mismatch (corruption)
  6   payload padding invalid (wrong key or tampering)
  7   payload length inconsistent
  8   carrier file is empty
  9   carrier already contains an embedded payload (use --force)
  10  no embedded payload found
  11  stego trailer corrupt
  12  cannot connect to server
  13  transfer rejected by server
  14  cannot bind server port
  15  network transfer failed
  16  file I/O error
"""


def _read_key(path: str) -> Key128:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BadKeyFile(f"cannot read key file {path}: {exc}") from None
    try:
        return Key128.from_hex(text)
    except ValueError as exc:
        raise BadKeyFile(f"{path}: {exc}") from None


def _write_file(path: str, data: bytes) -> None:
    """Atomic write: temp file in the target directory, rename into place."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _cmd_keygen(args: argparse.Namespace) -> int:
    _write_file(args.outfile, (Key128.random().to_hex() + "\n").encode("ascii"))
    return 0


def _cmd_encrypt(args: argparse.Namespace) -> int:
    key = _read_key(args.key)
    plaintext = Path(args.infile).read_bytes()
    _write_file(args.outfile, codec.seal(plaintext, key).to_bytes())
    return 0


def _cmd_decrypt(args: argparse.Namespace) -> int:
    key = _read_key(args.key)
    sealed = Path(args.infile).read_bytes()
    _write_file(args.outfile, codec.open(sealed, key))
    return 0


def _cmd_embed(args: argparse.Namespace) -> int:
    carrier = Path(args.carrier).read_bytes()
    payload = Path(args.infile).read_bytes()
    _write_file(args.outfile, stego.embed(carrier, payload, force=args.force).to_bytes())
    return 0


def _cmd_extract(args: argparse.Namespace) -> int:
    carrier, payload = stego.extract(Path(args.infile).read_bytes())
    _write_file(args.outfile, payload)
    if args.carrier_out:
        _write_file(args.carrier_out, carrier)
    return 0


def _cmd_seal(args: argparse.Namespace) -> int:
    key = _read_key(args.key)
    plaintext = Path(args.infile).read_bytes()
    carrier = Path(args.carrier).read_bytes()
    sealed = codec.seal(plaintext, key).to_bytes()
    _write_file(args.outfile, stego.embed(carrier, sealed, force=args.force).to_bytes())
    return 0


def _cmd_open(args: argparse.Namespace) -> int:
    key = _read_key(args.key)
    _, payload = stego.extract(Path(args.infile).read_bytes())
    _write_file(args.outfile, codec.open(payload, key))
    return 0


def _cmd_send(args: argparse.Namespace) -> int:
    transfer.send_file(args.host, args.port, args.infile, timeout=args.timeout)
    print(f"accepted: {args.infile} -> {args.host}:{args.port}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    transfer.serve(args.host, args.port, args.out_dir, read_timeout=args.timeout)
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    eq = analysis.equivalent_key_trials(args.keys, args.blocks, args.seed)
    report = analysis.avalanche(args.trials, args.seed)
    print(eq.to_text())
    print()
    print(report.to_text())
    if args.csv:
        _write_file(args.csv, report.to_csv().encode("ascii"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etea",
        description="Encrypt, hide inside a carrier file, and transfer over TCP.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name: str, help_text: str, func) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("keygen", "write a fresh random key file (32 hex digits)", _cmd_keygen)
    p.add_argument("--out", dest="outfile", required=True, help="key file to write")

    p = add("encrypt", "seal a file into an encrypted container", _cmd_encrypt)
    p.add_argument("--key", required=True, help="key file")
    p.add_argument("--in", dest="infile", required=True, help="plaintext file")
    p.add_argument("--out", dest="outfile", required=True, help="container file to write")

    p = add("decrypt", "open an encrypted container", _cmd_decrypt)
    p.add_argument("--key", required=True, help="key file")
    p.add_argument("--in", dest="infile", required=True, help="container file")
    p.add_argument("--out", dest="outfile", required=True, help="plaintext file to write")

    p = add("embed", "hide a payload file inside a carrier file", _cmd_embed)
    p.add_argument("--carrier", required=True, help="carrier file (e.g. a video)")
    p.add_argument("--in", dest="infile", required=True, help="payload file")
    p.add_argument("--out", dest="outfile", required=True, help="stego file to write")
    p.add_argument("--force", action="store_true", help="embed even if already embedded")

    p = add("extract", "recover the hidden payload from a stego file", _cmd_extract)
    p.add_argument("--in", dest="infile", required=True, help="stego file")
    p.add_argument("--out", dest="outfile", required=True, help="payload file to write")
    p.add_argument("--carrier-out", help="also write the recovered carrier here")

    p = add("seal", "encrypt and embed in one step", _cmd_seal)
    p.add_argument("--key", required=True, help="key file")
    p.add_argument("--in", dest="infile", required=True, help="plaintext file")
    p.add_argument("--carrier", required=True, help="carrier file (e.g. a video)")
    p.add_argument("--out", dest="outfile", required=True, help="stego file to write")
    p.add_argument("--force", action="store_true", help="embed even if already embedded")

    p = add("open", "extract and decrypt in one step", _cmd_open)
    p.add_argument("--key", required=True, help="key file")
    p.add_argument("--in", dest="infile", required=True, help="stego file")
    p.add_argument("--out", dest="outfile", required=True, help="plaintext file to write")

    p = add("send", "send a file to a receiving server", _cmd_send)
    p.add_argument("--host", required=True, help="server IPv4 address")
    p.add_argument("--port", type=int, default=transfer.DEFAULT_PORT, help="server port")
    p.add_argument("--in", dest="infile", required=True, help="file to send")
    p.add_argument("--timeout", type=float, default=transfer.DEFAULT_TIMEOUT,
                   help="socket timeout in seconds")

    p = add("serve", "receive files until interrupted", _cmd_serve)
    p.add_argument("--host", default="0.0.0.0", help="address to bind")
    p.add_argument("--port", type=int, default=transfer.DEFAULT_PORT, help="port to bind")
    p.add_argument("--out-dir", required=True, help="directory for received files")
    p.add_argument("--timeout", type=float, default=transfer.DEFAULT_TIMEOUT,
                   help="per-connection read timeout in seconds")

    p = add("analyze", "demonstrate equivalent keys and the avalanche effect", _cmd_analyze)
    p.add_argument("--trials", type=int, default=10000, help="avalanche trials")
    p.add_argument("--seed", type=int, default=0, help="seed for reproducible reports")
    p.add_argument("--keys", type=int, default=100, help="equivalent-key classes to test")
    p.add_argument("--blocks", type=int, default=100, help="blocks per key class")
    p.add_argument("--csv", help="also write the avalanche histogram as CSV")

    return parser


def _exit_code(exc: EteaError) -> int:
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EteaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return OS_ERROR_EXIT


if __name__ == "__main__":
    sys.exit(main())
