import json
import random
import threading
import urllib.error
import urllib.request

import pytest

from e2ev import constants
from e2ev.ballot import PlainBallot, encrypt_ballot
from e2ev.board import (
    BoardClosed,
    BoardEntry,
    BoardSnapshot,
    BulletinBoard,
    CorruptBoard,
    DuplicateBallot,
    InvalidBallot,
    MalformedPayload,
    OrderingError,
    entry_hash,
    lookup,
    read_snapshot,
    verify_chain,
)
from e2ev.board.server import serve_in_thread
from e2ev.election import Election
from e2ev.group import GroupParams

from conftest import build_election


@pytest.fixture
def election(tmp_path):
    return Election.setup(
        "b", ["A", "B", "C"], GroupParams.toy(), n_trustees=1, rng=random.Random(3), board_path=tmp_path / "board.ndjson"
    )


def test_genesis(election):
    e = election.board.snapshot().entries[0]
    assert e.seq == 0 and e.prev_hash == bytes(32) and e.kind == "Manifest"
    assert e.entry_hash == entry_hash(bytes(32), 0, "Manifest", e.payload)


def test_entry_hash_definition():
    payload = b'{"x":1}'
    import hashlib

    expected = hashlib.sha256(bytes(32) + (5).to_bytes(8, "big") + bytes([3]) + payload).digest()
    assert entry_hash(bytes(32), 5, "TallyArtifact", payload) == expected


def test_line_format(election):
    line = election.board.snapshot().entries[0].to_line()
    obj = json.loads(line)
    assert tuple(obj) == constants.ENTRY_FIELDS
    assert BoardEntry.from_line(line) == election.board.snapshot().entries[0]


def test_policy_rejections(election):
    board, m = election.board, election.manifest
    with pytest.raises(OrderingError):
        board.append("Manifest", m.to_bytes())
    eb, _ = encrypt_ballot(m, PlainBallot(0), random.Random(1))
    obj = eb.to_json(m.params)
    board.append("CastBallot", obj)
    with pytest.raises(DuplicateBallot):
        board.append("CastBallot", obj)
    bad = dict(obj, ballot_hash="00" * 32)
    with pytest.raises(InvalidBallot):
        board.append("CastBallot", bad)
    with pytest.raises(MalformedPayload):
        board.append("CastBallot", {"nonce": 1})
    with pytest.raises(MalformedPayload):
        board.append("CastBallot", b'{"a": 1}')
    with pytest.raises(MalformedPayload):
        board.append("Unknown", {})
    with pytest.raises(MalformedPayload):
        board.append("Close", {"entry_count": 99, "code_key": "00", "signature": {}})
    assert len(board) == 2


def test_first_entry_must_be_manifest():
    board = BulletinBoard()
    with pytest.raises(OrderingError):
        board.append("CastBallot", {})


def test_close_blocks_appends(election):
    election.finish(random.Random(1))
    assert election.board.closed
    with pytest.raises(BoardClosed):
        election.board.append("CastBallot", {})


def test_persisted_file_matches_snapshot_and_reopens(election, tmp_path):
    dev = election.device(rng=random.Random(2))
    for sel in (0, 1):
        s, _ = dev.begin(sel)
        dev.finalize_cast(s, election.board)
    path = tmp_path / "board.ndjson"
    assert path.read_bytes() == election.board.snapshot().to_bytes()
    reopened = BulletinBoard.open(path)
    assert len(reopened) == 3
    assert reopened.snapshot().to_bytes() == path.read_bytes()


def test_reopen_rejects_tampered_file(election, tmp_path):
    path = tmp_path / "board.ndjson"
    data = path.read_bytes().replace(b'"A"', b'"Z"')
    path.write_bytes(data)
    with pytest.raises(CorruptBoard):
        BulletinBoard.open(path)


def test_read_snapshot_ignores_partial_tail(election, tmp_path):
    path = tmp_path / "board.ndjson"
    with open(path, "ab") as fh:
        fh.write(b'{"seq":1,"prev')
    assert len(read_snapshot(path)) == 1


def test_verify_chain_and_truncation(closed_election):
    el, _ = closed_election
    entries = el.board.snapshot().entries
    full = verify_chain(entries)
    assert full.ok and full.closed
    prefix = verify_chain(entries[:5])
    assert prefix.ok and not prefix.closed


def test_verify_chain_single_bit_fuzz(closed_election):
    el, _ = closed_election
    data = el.board.snapshot().to_bytes()
    lines = data.split(b"\n")[:-1]
    for i in range(0, len(data), 7):
        for bit in (0, 3, 6):
            m = bytearray(data)
            m[i] ^= 1 << bit
            mutated_line = data.count(b"\n", 0, i)
            try:
                snap = BoardSnapshot.from_bytes(bytes(m))
            except (CorruptBoard, ValueError):
                continue
            res = verify_chain(snap.entries)
            if len(snap.entries) != len(lines):
                assert not res.ok
                continue
            assert not res.ok
            assert res.bad_seq in (mutated_line, mutated_line + 1)


def test_lookup_separates_lists():
    el, receipts = build_election(GroupParams.toy(), [0, 1], challenges=[2], seed=11, close=False)
    snap = el.board.snapshot()
    found = lookup(snap, receipts[0].ballot_hash)
    assert found.kind == "CastBallot" and found.seq == 2
    challenged = snap.entries_of("ChallengedBallot")[0]
    assert lookup(snap, bytes.fromhex(challenged.payload_json()["ballot"]["ballot_hash"])).kind == "ChallengedBallot"
    assert lookup(snap, random.Random(1).randbytes(32)) is None


def test_concurrent_appends_serialize(election):
    m = election.manifest
    ballots = [encrypt_ballot(m, PlainBallot(i % 3), random.Random(i))[0].to_json(m.params) for i in range(12)]
    errors = []

    def worker(objs):
        for o in objs:
            try:
                election.board.append("CastBallot", o)
            except Exception as exc:  # pragma: no cover - failure path
                errors.append(exc)

    threads = [threading.Thread(target=worker, args=(ballots[k::3],)) for k in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    snap = election.board.snapshot()
    assert verify_chain(snap.entries).ok
    assert [e.seq for e in snap.entries] == list(range(13))


def test_snapshots_are_prefix_extensions(election):
    m = election.manifest
    before = election.board.snapshot().to_bytes()
    eb, _ = encrypt_ballot(m, PlainBallot(1), random.Random(99))
    election.board.append("CastBallot", eb.to_json(m.params))
    after = election.board.snapshot().to_bytes()
    assert after.startswith(before) and len(after) > len(before)


def _get(url):
    try:
        with urllib.request.urlopen(url) as r:
            return r.status, r.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


def _post(url, obj):
    req = urllib.request.Request(url, data=json.dumps(obj).encode(), method="POST")
    try:
        with urllib.request.urlopen(req) as r:
            return r.status, json.loads(r.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


def test_wire_service(election):
    server, url = serve_in_thread(election.board)
    try:
        m = election.manifest
        eb, _ = encrypt_ballot(m, PlainBallot(0), random.Random(5))
        status, body = _post(url + "/entries", {"kind": "CastBallot", "payload": eb.to_json(m.params)})
        assert status == 201 and body["seq"] == 1
        status, body = _post(url + "/entries", {"kind": "CastBallot", "payload": eb.to_json(m.params)})
        assert status == 409 and body["error"] == "duplicate"
        status, body = _post(url + "/entries", {"nope": 1})
        assert status == 400
        status, raw = _get(url + "/ballots/" + eb.ballot_hash.hex())
        assert status == 200 and json.loads(raw) == {"status": "Found", "seq": 1, "kind": "CastBallot"}
        status, raw = _get(url + "/ballots/" + "00" * 32)
        assert status == 404
        status, raw = _get(url + "/entries?from=1")
        page = json.loads(raw)
        assert page["next"] == 2 and len(page["entries"]) == 1
        status, raw = _get(url + "/snapshot")
        assert raw == election.board.snapshot().to_bytes()
    finally:
        server.shutdown()
        server.server_close()
