"""Append-only hash-chained bulletin board stored as newline-delimited JSON."""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

from .. import constants
from ..ballot import ChallengeRecord, ElectionManifest, ManifestError, verify_ballot
from ..group import GroupError
from ..hashing import canonical_json, sha256, u64
from ..signature import Signature, close_message, verify_signature


class BoardError(Exception):
    """Base class for append rejections."""


class BoardClosed(BoardError):
    pass


class DuplicateBallot(BoardError):
    pass


class MalformedPayload(BoardError):
    pass


class InvalidBallot(BoardError):
    pass


class OrderingError(BoardError):
    """Manifest not first, or a second manifest/tally."""


class CorruptBoard(BoardError):
    """Persisted board fails to decode or chain."""


_HEX = frozenset("0123456789abcdef")


def _hex(s, n: int) -> bytes:
    if not isinstance(s, str) or len(s) != 2 * n or not _HEX.issuperset(s):
        raise ValueError(f"expected {n}-byte lowercase hex")
    return bytes.fromhex(s)


def entry_hash(prev_hash: bytes, seq: int, kind: str, payload: bytes) -> bytes:
    return sha256(prev_hash + u64(seq) + bytes([constants.KIND_TAGS[kind]]) + payload)


def _line_prefix(seq: int, prev_hash: bytes, kind: str) -> bytes:
    return f'{{"seq":{seq},"prev_hash":"{prev_hash.hex()}","kind":"{kind}","payload":'.encode("ascii")


def _line_suffix(h: bytes) -> bytes:
    return f',"entry_hash":"{h.hex()}"}}'.encode("ascii")


@dataclass(frozen=True)
class BoardEntry:
    seq: int
    prev_hash: bytes
    kind: str
    payload: bytes
    entry_hash: bytes

    def to_line(self) -> bytes:
        return _line_prefix(self.seq, self.prev_hash, self.kind) + self.payload + _line_suffix(self.entry_hash)

    def recompute_hash(self) -> bytes:
        return entry_hash(self.prev_hash, self.seq, self.kind, self.payload)

    def payload_json(self):
        return json.loads(self.payload)

    @classmethod
    def from_line(cls, line: bytes) -> "BoardEntry":
        """Strict decode: the line must be exactly the canonical rendering.

        The payload bytes are sliced out of the line as stored, not re-serialized.
        """
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise CorruptBoard("entry is not JSON") from exc
        if not isinstance(obj, dict) or tuple(obj) != constants.ENTRY_FIELDS:
            raise CorruptBoard("entry fields missing or out of order")
        seq, kind = obj["seq"], obj["kind"]
        if type(seq) is not int or seq < 0 or kind not in constants.KIND_TAGS:
            raise CorruptBoard("bad seq or kind")
        try:
            prev, h = _hex(obj["prev_hash"], 32), _hex(obj["entry_hash"], 32)
        except ValueError as exc:
            raise CorruptBoard(str(exc)) from exc
        prefix, suffix = _line_prefix(seq, prev, kind), _line_suffix(h)
        if not (line.startswith(prefix) and line.endswith(suffix)):
            raise CorruptBoard("entry is not canonically encoded")
        payload = line[len(prefix) : len(line) - len(suffix)]
        if canonical_json(json.loads(payload)) != payload:
            raise CorruptBoard("payload is not canonically encoded")
        return cls(seq, prev, kind, payload, h)


class Found(NamedTuple):
    seq: int
    kind: str


class ChainResult(NamedTuple):
    ok: bool
    bad_seq: int | None
    reason: str | None
    closed: bool

    def __bool__(self) -> bool:
        return self.ok


def verify_chain(entries: Sequence[BoardEntry]) -> ChainResult:
    """Recompute every hash and link; report the earliest inconsistent seq.

    A chain without a Close entry is accepted (hash chains cannot detect
    tail truncation) but ``closed`` is False.
    """
    prev = constants.GENESIS_PREV_HASH
    closed = False
    for i, e in enumerate(entries):
        if closed:
            return ChainResult(False, i, "entry after Close", True)
        if e.seq != i:
            return ChainResult(False, i, "seq out of order", closed)
        if e.prev_hash != prev:
            return ChainResult(False, i, "prev_hash does not link", closed)
        if e.recompute_hash() != e.entry_hash:
            return ChainResult(False, i, "entry_hash does not recompute", closed)
        if (e.kind == constants.KIND_MANIFEST) != (i == 0):
            return ChainResult(False, i, "Manifest must be exactly entry 0", closed)
        closed = e.kind == constants.KIND_CLOSE
        prev = e.entry_hash
    return ChainResult(True, None, None, closed)


class BoardSnapshot:
    """Immutable view of a board prefix with ballot-hash indexes."""

    def __init__(self, entries: Sequence[BoardEntry]):
        self.entries = tuple(entries)
        self._index: dict[bytes, Found] | None = None
        self._manifest: ElectionManifest | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[BoardEntry]:
        return iter(self.entries)

    def to_bytes(self) -> bytes:
        return b"".join(e.to_line() + b"\n" for e in self.entries)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BoardSnapshot":
        lines = data.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        return cls([BoardEntry.from_line(line) for line in lines])

    def manifest(self) -> ElectionManifest:
        if self._manifest is None:
            if not self.entries or self.entries[0].kind != constants.KIND_MANIFEST:
                raise CorruptBoard("board has no manifest")
            self._manifest = ElectionManifest.from_json(self.entries[0].payload_json()).prepare()
        return self._manifest

    def entries_of(self, kind: str) -> list[BoardEntry]:
        return [e for e in self.entries if e.kind == kind]

    def _build_index(self) -> dict[bytes, Found]:
        if self._index is None:
            index = {}
            for e in self.entries:
                if e.kind == constants.KIND_CAST:
                    h = _hex(e.payload_json()["ballot_hash"], 32)
                elif e.kind == constants.KIND_CHALLENGED:
                    h = _hex(e.payload_json()["ballot"]["ballot_hash"], 32)
                else:
                    continue
                index.setdefault(h, Found(e.seq, e.kind))
            self._index = index
        return self._index

    def lookup(self, ballot_hash: bytes) -> Found | None:
        return self._build_index().get(ballot_hash)

    def cast_hashes(self) -> list[bytes]:
        return [_hex(e.payload_json()["ballot_hash"], 32) for e in self.entries_of(constants.KIND_CAST)]

    def close_payload(self) -> dict | None:
        if self.entries and self.entries[-1].kind == constants.KIND_CLOSE:
            return self.entries[-1].payload_json()
        return None

    def code_key(self) -> bytes | None:
        close = self.close_payload()
        return None if close is None else bytes.fromhex(close["code_key"])


def lookup(snapshot: BoardSnapshot, ballot_hash: bytes) -> Found | None:
    return snapshot.lookup(ballot_hash)


def read_snapshot(path: str | os.PathLike) -> BoardSnapshot:
    """Read the complete lines of a board file.

    A trailing line without newline is an append in progress and is ignored,
    so readers always see a consistent prefix.
    """
    data = Path(path).read_bytes()
    end = data.rfind(b"\n") + 1
    return BoardSnapshot.from_bytes(data[:end])


class BulletinBoard:
    """Single-writer board; every entry is on disk before ``append`` returns."""

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: list[BoardEntry] = []
        self._lock = threading.Lock()
        self._manifest: ElectionManifest | None = None
        self._cast: set[bytes] = set()
        self._challenged: set[bytes] = set()
        self._has_tally = False
        self._closed = False

    @classmethod
    def open(cls, path: str | os.PathLike) -> "BulletinBoard":
        """Load an existing board file, replaying it through the append policy."""
        board = cls(None)
        snap = read_snapshot(path)
        result = verify_chain(snap.entries)
        if not result.ok:
            raise CorruptBoard(f"seq {result.bad_seq}: {result.reason}")
        for e in snap.entries:
            board._admit(e.kind, e.payload, len(board._entries))
            board._entries.append(e)
        board.path = Path(path)
        return board

    # -- read side --------------------------------------------------------

    @property
    def closed(self) -> bool:
        return self._closed

    @property
    def manifest(self) -> ElectionManifest | None:
        return self._manifest

    def __len__(self) -> int:
        return len(self._entries)

    def snapshot(self) -> BoardSnapshot:
        with self._lock:
            return BoardSnapshot(list(self._entries))

    def lookup(self, ballot_hash: bytes) -> Found | None:
        return self.snapshot().lookup(ballot_hash)

    # -- write side -------------------------------------------------------

    def append(self, kind: str, payload: dict | bytes) -> tuple[int, bytes]:
        if kind not in constants.KIND_TAGS:
            raise MalformedPayload(f"unknown kind {kind!r}")
        if isinstance(payload, (bytes, bytearray)):
            payload = bytes(payload)
            try:
                if canonical_json(json.loads(payload)) != payload:
                    raise MalformedPayload("payload is not canonical JSON")
            except ValueError as exc:
                raise MalformedPayload("payload is not JSON") from exc
        else:
            payload = canonical_json(payload)
        with self._lock:
            seq = len(self._entries)
            prev = self._entries[-1].entry_hash if self._entries else constants.GENESIS_PREV_HASH
            self._admit(kind, payload, seq, prev)
            e = BoardEntry(seq, prev, kind, payload, entry_hash(prev, seq, kind, payload))
            if self.path is not None:
                with open(self.path, "ab") as fh:
                    fh.write(e.to_line() + b"\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            self._entries.append(e)
            return seq, e.entry_hash

    def _admit(self, kind: str, payload: bytes, seq: int, prev: bytes | None = None) -> None:
        """Apply the append policy and update indexes, or raise BoardError."""
        if self._closed:
            raise BoardClosed("board is closed")
        if kind == constants.KIND_MANIFEST:
            if seq != 0:
                raise OrderingError("Manifest only at seq 0")
            try:
                self._manifest = ElectionManifest.from_json(json.loads(payload)).prepare()
            except (ManifestError, ValueError) as exc:
                raise MalformedPayload(f"manifest: {exc}") from exc
            return
        if self._manifest is None:
            raise OrderingError("first entry must be the Manifest")
        m = self._manifest
        obj = json.loads(payload)
        if kind == constants.KIND_CAST:
            check = verify_ballot(m, obj)
            if check.reason == "decode":
                raise MalformedPayload("cast ballot does not decode")
            if not check:
                raise InvalidBallot(check.reason)
            self._claim_hash(bytes.fromhex(obj["ballot_hash"]), self._cast)
        elif kind == constants.KIND_CHALLENGED:
            try:
                rec = ChallengeRecord.from_json(m.params, obj)
            except (GroupError, KeyError, TypeError, ValueError) as exc:
                raise MalformedPayload(f"challenge record: {exc}") from exc
            check = verify_ballot(m, rec.ballot)
            if not check:
                raise InvalidBallot(check.reason)
            self._claim_hash(rec.ballot.ballot_hash, self._challenged)
        elif kind == constants.KIND_TALLY:
            if self._has_tally:
                raise OrderingError("tally already published")
            if not isinstance(obj, dict) or tuple(obj) != constants.TALLY_FIELDS:
                raise MalformedPayload("bad tally artifact")
            self._has_tally = True
        elif kind == constants.KIND_CLOSE:
            self._check_close(obj, seq, prev if prev is not None else self._entries[-1].entry_hash)
            self._closed = True

    def _claim_hash(self, h: bytes, target: set[bytes]) -> None:
        if h in self._cast or h in self._challenged:
            raise DuplicateBallot(h.hex())
        target.add(h)

    def _check_close(self, obj, seq: int, prev: bytes) -> None:
        m = self._manifest
        if not isinstance(obj, dict) or tuple(obj) != constants.CLOSE_FIELDS:
            raise MalformedPayload("bad close object")
        if obj["entry_count"] != seq + 1:
            raise MalformedPayload("close entry_count must equal the final entry count")
        try:
            code_key = _hex(obj["code_key"], constants.CODE_KEY_BYTES)
            sig = Signature.from_json(m.params, obj["signature"])
        except (GroupError, ValueError) as exc:
            raise MalformedPayload(f"close: {exc}") from exc
        if sha256(code_key) != m.code_key_commitment:
            raise MalformedPayload("code key does not match the manifest commitment")
        msg = close_message(m.manifest_hash, seq + 1, prev, code_key)
        if not verify_signature(m.params, m.authority_pk, msg, sig):
            raise MalformedPayload("close signature invalid")
