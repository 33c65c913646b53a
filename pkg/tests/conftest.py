import random

import pytest

from e2ev.election import Election
from e2ev.group import GroupParams


@pytest.fixture(scope="session")
def tiny():
    """p = 23, q = 11, g = 2: small enough to check by hand."""
    return GroupParams(23, 11, 2).validate()


@pytest.fixture(scope="session")
def toy():
    return GroupParams.toy()


@pytest.fixture
def rng():
    return random.Random(20240601)


def build_election(params, votes, challenges=(), seed=1, n_trustees=2, receipt_mode="signed", close=True):
    """Small election: cast ``votes`` (candidate indices), challenge ``challenges``, then tally and close."""
    r = random.Random(seed)
    el = Election.setup("test", ["A", "B", "C"], params, n_trustees=n_trustees, receipt_mode=receipt_mode, rng=r)
    dev = el.device(rng=r)
    receipts = []
    for sel in challenges:
        s, _ = dev.begin(sel)
        dev.finalize_challenge(s, el.board)
    for sel in votes:
        s, _ = dev.begin(sel)
        receipts.append(dev.finalize_cast(s, el.board))
    if close:
        el.finish(r)
    return el, receipts


@pytest.fixture(scope="session")
def closed_election(toy):
    """Toy election: 6 cast (2,2,2 after one challenge), tallied and closed."""
    return build_election(toy, [0, 1, 2, 0, 1, 2], challenges=[1], seed=7)


def rechain(el, mutate, rng=None):
    """Board bytes after ``mutate(seq, payload_obj)`` edits payloads, with hashes and Close re-signed.

    Models an attacker who controls the board writer and the authority key:
    only the cryptographic content can expose the edit.
    """
    from e2ev import constants
    from e2ev.board import BoardEntry, BoardSnapshot, entry_hash
    from e2ev.hashing import canonical_json
    from e2ev.signature import close_message, sign

    rng = rng or random.Random(0)
    params = el.manifest.params
    out = []
    for e in el.board.snapshot().entries:
        obj = mutate(e.seq, e.payload_json())
        prev = out[-1].entry_hash if out else bytes(32)
        if e.kind == constants.KIND_CLOSE:
            msg = close_message(el.manifest.manifest_hash, obj["entry_count"], prev, el.secrets.code_key)
            obj["signature"] = sign(params, el.secrets.authority_key, msg, rng).to_json(params)
        payload = canonical_json(obj)
        out.append(BoardEntry(e.seq, prev, e.kind, payload, entry_hash(prev, e.seq, e.kind, payload)))
    return BoardSnapshot(out).to_bytes()


def fuzzed_claims(el, receipts, n, rng):
    """Claims a defamer could assemble without observation: random or altered receipts."""
    from e2ev.dispute import ClaimKind, DisputeClaim, Receipt
    from e2ev.signature import Signature

    params = el.manifest.params
    cast = [r.ballot_hash for r in receipts]
    for _ in range(n):
        kind = rng.choice(list(ClaimKind))
        mode = rng.randrange(4)
        base = rng.choice(receipts)
        if mode == 0:
            rc = Receipt(rng.randbytes(32), rng.choice(["AA", "ZZ", "QX"]), None)
        elif mode == 1:
            sig = Signature(params.random_scalar(rng), params.random_scalar(rng))
            rc = Receipt(rng.choice(cast + [rng.randbytes(32)]), base.return_code, sig)
        elif mode == 2:
            rc = Receipt(base.ballot_hash, "AA" if base.return_code != "AA" else "AB", base.signature)
        else:
            rc = base
        yield DisputeClaim(rc, kind, False)
