"""e2ev <command> --workspace DIR [--config FILE]

Workspace layout::

    manifest.json   board.ndjson   board.lock
    receipts/       reports/       secrets/  (trustee, device, authority and code keys)

Nothing under ``secrets/`` is ever copied into a published file.
"""

from __future__ import annotations

import argparse
import contextlib
import fcntl
import json
import os
import random
import subprocess
import sys
from pathlib import Path

from . import constants
from .ballot import ElectionManifest
from .board import BoardError, BulletinBoard
from .device import DeviceConfig, VotingDevice
from .election import Election, ElectionSecrets
from .elgamal import TrusteeShare
from .group import GroupParams, system_rng
from .signature import SigningKey
from .tally import TallyError, close_board, publish_tally

DEFAULTS = {
    "election_id": "election",
    "candidates": ["A", "B", "C"],
    "trustees": 1,
    "group": "toy",
    "receipt_mode": constants.RECEIPT_SIGNED,
    "seed": None,
}


class CliError(Exception):
    pass


class Workspace:
    def __init__(self, root: Path):
        self.root = root
        self.manifest = root / "manifest.json"
        self.board = root / "board.ndjson"
        self.lock = root / "board.lock"
        self.receipts = root / "receipts"
        self.reports = root / "reports"
        self.secrets = root / "secrets"

    @contextlib.contextmanager
    def writer(self):
        """Exclusive board-writer lock held for the duration of a command."""
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.lock, "a") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def load_manifest(self) -> ElectionManifest:
        if not self.manifest.exists():
            raise CliError(f"no election in {self.root}; run setup first")
        return ElectionManifest.from_bytes(self.manifest.read_bytes()).prepare()

    def open_board(self) -> BulletinBoard:
        try:
            return BulletinBoard.open(self.board)
        except (OSError, BoardError) as exc:
            raise CliError(f"cannot open board: {exc}") from exc

    def _write_secret(self, name: str, obj: dict) -> None:
        path = self.secrets / name
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=1)
            fh.write("\n")

    def save_secrets(self, params: GroupParams, secrets: ElectionSecrets) -> None:
        self.secrets.mkdir(mode=0o700, exist_ok=True)
        for share in secrets.shares:
            self._write_secret(f"trustee-{share.index}.json", {"index": share.index, "sk": params.encode(share.sk)})
        self._write_secret("device.json", {"sk": params.encode(secrets.device_key.sk)})
        self._write_secret("authority.json", {"sk": params.encode(secrets.authority_key.sk)})
        self._write_secret("code_key.json", {"code_key": secrets.code_key.hex()})

    def _read_secret(self, name: str) -> dict:
        try:
            return json.loads((self.secrets / name).read_text())
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read secret {name}: {exc}") from exc

    def signing_key(self, params: GroupParams, name: str) -> SigningKey:
        sk = params.decode_scalar(self._read_secret(name)["sk"])
        return SigningKey(sk, params.gpow(sk))

    def code_key(self) -> bytes:
        return bytes.fromhex(self._read_secret("code_key.json")["code_key"])

    def shares(self, params: GroupParams, n: int) -> list[TrusteeShare]:
        out = []
        for i in range(n):
            obj = self._read_secret(f"trustee-{i}.json")
            out.append(TrusteeShare(obj["index"], params.decode_scalar(obj["sk"])))
        return out


def _config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read config: {exc}") from exc
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _rng(cfg: dict, board_len: int) -> random.Random:
    # A fixed seed is combined with the board length so separate invocations
    # never reuse a nonce.
    if cfg["seed"] is None:
        return system_rng()
    return random.Random(f"{cfg['seed']}/{board_len}")


def _selection(manifest: ElectionManifest, value: str) -> int:
    if value in manifest.candidates:
        return manifest.candidates.index(value)
    try:
        idx = int(value)
    except ValueError:
        raise CliError(f"unknown candidate {value!r}; choose from {', '.join(manifest.candidates)}") from None
    if not 0 <= idx < manifest.n_candidates:
        raise CliError(f"candidate index {idx} out of range")
    return idx


def cmd_setup(ws: Workspace, args) -> int:
    cfg = _config(args)
    if ws.manifest.exists() or ws.board.exists():
        raise CliError(f"{ws.root} already holds an election")
    candidates = cfg["candidates"]
    if isinstance(candidates, str):
        candidates = [c for c in candidates.split(",") if c]
    with ws.writer():
        el = Election.setup(
            cfg["election_id"],
            candidates,
            GroupParams.named(cfg["group"]),
            n_trustees=int(cfg["trustees"]),
            receipt_mode=cfg["receipt_mode"],
            rng=_rng(cfg, 0),
            board_path=ws.board,
        )
        ws.save_secrets(el.manifest.params, el.secrets)
        ws.manifest.write_bytes(el.manifest_bytes())
        ws.receipts.mkdir(exist_ok=True)
        ws.reports.mkdir(exist_ok=True)
    print(json.dumps({"manifest_hash": el.manifest.manifest_hash.hex(), "board_entries": len(el.board)}))
    return 0


def _device(ws: Workspace, manifest: ElectionManifest, cfg: dict, board: BulletinBoard) -> VotingDevice:
    return VotingDevice(
        manifest, ws.signing_key(manifest.params, "device.json"), ws.code_key(), DeviceConfig(), _rng(cfg, len(board))
    )


def cmd_vote(ws: Workspace, args) -> int:
    cfg = _config(args)
    manifest = ws.load_manifest()
    with ws.writer():
        board = ws.open_board()
        device = _device(ws, manifest, cfg, board)
        session, _ = device.begin(_selection(manifest, args.selection))
        receipt = device.finalize_cast(session, board)
    data = receipt.to_bytes(manifest.params) + b"\n"
    ws.receipts.mkdir(exist_ok=True)
    (ws.receipts / f"{receipt.ballot_hash.hex()}.json").write_bytes(data)
    sys.stdout.write(data.decode())
    return 0


def cmd_challenge(ws: Workspace, args) -> int:
    cfg = _config(args)
    manifest = ws.load_manifest()
    with ws.writer():
        board = ws.open_board()
        device = _device(ws, manifest, cfg, board)
        session, commitment = device.begin(_selection(manifest, args.selection))
        device.finalize_challenge(session, board)
    print(json.dumps({"challenged": commitment.hex(), "seq": len(board) - 1}))
    return 0


def cmd_tally(ws: Workspace, args) -> int:
    cfg = _config(args)
    manifest = ws.load_manifest()
    params = manifest.params
    with ws.writer():
        board = ws.open_board()
        artifact = publish_tally(board, ws.shares(params, len(manifest.trustee_pks)))
        close_board(board, ws.signing_key(params, "authority.json"), ws.code_key(), _rng(cfg, len(board)))
    print(json.dumps({"counts": dict(zip(manifest.candidates, artifact.counts)), "total_cast": artifact.total_cast}))
    return 0


def cmd_verify(ws: Workspace, args) -> int:
    ws.reports.mkdir(parents=True, exist_ok=True)
    report = Path(args.report) if args.report else ws.reports / "report.json"
    cmd = [
        sys.executable,
        "-m",
        "e2ev.verifier",
        "--manifest",
        str(ws.manifest),
        "--board",
        str(ws.board),
        "--report",
        str(report),
    ]
    if args.receipt:
        cmd += ["--receipt", str(args.receipt)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    sys.stderr.write(proc.stderr)
    if report.exists():
        obj = json.loads(report.read_text())
        print(json.dumps({"verdict": obj["verdict"], "counts": obj["counts"], "report": str(report)}))
    return proc.returncode


def cmd_simulate(ws: Workspace, args) -> int:
    from .sim.__main__ import main as sim_main

    if not args.config:
        raise CliError("simulate needs --config with a simulation config")
    ws.reports.mkdir(parents=True, exist_ok=True)
    out = args.out or str(ws.reports / "simulation.csv")
    return sim_main([args.mode, "--config", args.config, "--out", out])


def cmd_serve(ws: Workspace, args) -> int:
    from .board.server import make_server

    with ws.writer():
        board = ws.open_board()
        server = make_server(board, args.host, args.port)
        host, port = server.server_address[:2]
        print(json.dumps({"url": f"http://{host}:{port}"}), flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            server.server_close()
    return 0


COMMANDS = {
    "setup": cmd_setup,
    "vote": cmd_vote,
    "challenge": cmd_challenge,
    "tally": cmd_tally,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "serve": cmd_serve,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="e2ev", description="Desk-scale end-to-end verifiable election.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--workspace", required=True, type=Path)
        p.add_argument("--config", help="JSON config file; flags override its values")
        return p

    p = add("setup", "generate keys, write the manifest and start the board")
    p.add_argument("--election-id", dest="election_id")
    p.add_argument("--candidates", help="comma-separated candidate names")
    p.add_argument("--trustees", type=int)
    p.add_argument("--group", choices=("toy", "production"))
    p.add_argument("--receipt-mode", dest="receipt_mode", choices=constants.RECEIPT_MODES)
    p.add_argument("--seed", type=int)
    for name, help in (("vote", "encrypt and cast one ballot"), ("challenge", "encrypt and open one ballot")):
        p = add(name, help)
        p.add_argument("--selection", required=True, help="candidate name or index")
        p.add_argument("--seed", type=int)
    p = add("tally", "decrypt the tally and close the board")
    p.add_argument("--seed", type=int)
    p = add("verify", "run the standalone verifier")
    p.add_argument("--receipt", type=Path)
    p.add_argument("--report", type=Path)
    p = add("simulate", "run the detection simulator")
    p.add_argument("--mode", choices=("run", "sweep"), default="run")
    p.add_argument("--out")
    p = add("serve", "serve the board over HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    ws = Workspace(args.workspace)
    try:
        return COMMANDS[args.command](ws, args)
    except (CliError, BoardError, TallyError, ValueError) as exc:
        print(f"e2ev {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
