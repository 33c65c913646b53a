"""Independent verification of a published election.

Inputs are the manifest file and the board file, as bytes.  Nothing here
trusts or imports the code that produced them; only ``e2ev.constants`` is
shared.  Checks run in the fixed order of ``constants.CHECK_ORDER``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .. import constants as C
from .arith import Group, challenge, discrete_log, sha256
from .report import Check, VerificationReport

_HEX = frozenset("0123456789abcdef")


class Bad(Exception):
    """A decoding or verification fault with its evidence."""

    def __init__(self, field: str, expected: str, found: str, reason: str | None = None):
        super().__init__(field)
        self.field, self.expected, self.found = field, expected, found
        self.reason = reason


def _short(x) -> str:
    s = x if isinstance(x, str) else json.dumps(x, separators=(",", ":"))
    return s if len(s) <= 80 else s[:77] + "..."


def _obj(x, fields, where: str) -> dict:
    if not isinstance(x, dict) or tuple(x) != tuple(fields):
        found = ",".join(x) if isinstance(x, dict) else type(x).__name__
        raise Bad(where, "fields " + ",".join(fields), found, "structure")
    return x


def _list(x, n: int | None, where: str) -> list:
    if not isinstance(x, list) or (n is not None and len(x) != n):
        found = f"length {len(x)}" if isinstance(x, list) else type(x).__name__
        raise Bad(where, "list" if n is None else f"list of length {n}", found, "structure")
    return x


def _int(x, where: str, lo: int = 0) -> int:
    if type(x) is not int or x < lo:
        raise Bad(where, f"integer >= {lo}", _short(x), "structure")
    return x


def _hexb(x, n: int, where: str) -> bytes:
    if not isinstance(x, str) or len(x) != 2 * n or not _HEX.issuperset(x):
        raise Bad(where, f"{n}-byte lowercase hex", _short(x), "encoding")
    return bytes.fromhex(x)


def _num(grp: Group, x, where: str) -> int:
    return int.from_bytes(_hexb(x, grp.width, where), "big")


def _elem(grp: Group, x, where: str) -> int:
    v = _num(grp, x, where)
    if not grp.member(v):
        raise Bad(where, "element of the order-q subgroup", x, "subgroup")
    return v


def _scalar(grp: Group, x, where: str) -> int:
    v = _num(grp, x, where)
    if v >= grp.q:
        raise Bad(where, "scalar below q", x, "range")
    return v


def _canon(obj) -> bytes:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True).encode("ascii")


@dataclass
class _Entry:
    seq: int
    kind: str
    payload: bytes
    obj: object
    entry_hash: bytes
    prev_hash: bytes


@dataclass
class _Manifest:
    grp: Group
    n: int
    pk: int
    trustee_pks: list
    device_pk: int
    authority_pk: int
    code_commit: bytes
    receipt_mode: str
    mhash: bytes


class _Run:
    def __init__(self):
        self.fails: dict[str, list[Check]] = {name: [] for name in C.CHECK_ORDER}

    def fail(self, check: str, seq, bad: Bad) -> None:
        self.fails[check].append(
            Check(check, False, bad.reason or bad.field, seq, bad.field, bad.expected, bad.found)
        )

    def report(self) -> VerificationReport:
        checks = []
        for name in C.CHECK_ORDER:
            fs = sorted(self.fails[name], key=lambda c: (c.seq is None, c.seq or 0))
            checks.extend(fs or [Check(name, True)])
        return VerificationReport(checks)


# -- decode ----------------------------------------------------------------


def _decode(run: _Run, manifest_bytes: bytes, board_bytes: bytes):
    try:
        mobj = json.loads(manifest_bytes)
        if not isinstance(mobj, dict):
            raise ValueError("not an object")
    except (ValueError, UnicodeDecodeError) as exc:
        pos = getattr(exc, "pos", 0) or 0
        run.fail("decode", None, Bad("manifest-file", "JSON object", f"byte offset {pos}", "decode"))
        return None
    if board_bytes and not board_bytes.endswith(b"\n"):
        run.fail("decode", None, Bad("board-file", "newline-terminated lines", f"byte offset {len(board_bytes)}", "decode"))
        return None
    lines = board_bytes.split(b"\n")[:-1] if board_bytes else []
    parsed = []
    offset = 0
    for i, line in enumerate(lines):
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("not an object")
        except (ValueError, UnicodeDecodeError) as exc:
            pos = offset + (getattr(exc, "pos", 0) or 0)
            run.fail("decode", i, Bad("board-file", "JSON object per line", f"byte offset {pos}", "decode"))
            return None
        parsed.append((line, obj))
        offset += len(line) + 1
    return mobj, parsed


# -- chain -----------------------------------------------------------------


def _entry(i: int, line: bytes, obj: dict) -> _Entry:
    _obj(obj, C.ENTRY_FIELDS, "entry")
    seq = _int(obj["seq"], "seq")
    kind = obj["kind"]
    if kind not in C.KIND_TAGS:
        raise Bad("kind", "one of " + ",".join(C.KIND_TAGS), _short(kind), "structure")
    prev = _hexb(obj["prev_hash"], 32, "prev_hash")
    h = _hexb(obj["entry_hash"], 32, "entry_hash")
    prefix = f'{{"seq":{seq},"prev_hash":"{prev.hex()}","kind":"{kind}","payload":'.encode()
    suffix = f',"entry_hash":"{h.hex()}"}}'.encode()
    if not (line.startswith(prefix) and line.endswith(suffix)):
        raise Bad("entry", "canonical entry encoding", "non-canonical bytes", "encoding")
    payload = line[len(prefix) : len(line) - len(suffix)]
    if _canon(obj["payload"]) != payload:
        raise Bad("payload", "canonical JSON payload", "non-canonical bytes", "encoding")
    return _Entry(seq, kind, payload, obj["payload"], h, prev)


def _chain(run: _Run, parsed) -> list:
    entries: list[_Entry | None] = []
    prev = C.GENESIS_PREV_HASH
    closed_at = None
    for i, (line, obj) in enumerate(parsed):
        try:
            e = _entry(i, line, obj)
        except Bad as bad:
            run.fail("chain", i, bad)
            entries.append(None)
            prev = None
            continue
        entries.append(e)
        recomputed = sha256(e.prev_hash + e.seq.to_bytes(8, "big") + bytes([C.KIND_TAGS[e.kind]]) + e.payload)
        bad = None
        if e.seq != i:
            bad = Bad("seq", str(i), str(e.seq), "seq")
        elif prev is not None and e.prev_hash != prev:
            bad = Bad("prev_hash", prev.hex(), e.prev_hash.hex(), "link")
        elif recomputed != e.entry_hash:
            bad = Bad("entry_hash", recomputed.hex(), e.entry_hash.hex(), "hash")
        elif (e.kind == C.KIND_MANIFEST) != (i == 0):
            bad = Bad("kind", "Manifest exactly at seq 0", e.kind, "ordering")
        elif closed_at is not None:
            bad = Bad("kind", "nothing after Close", e.kind, "ordering")
        if bad is not None:
            run.fail("chain", i, bad)
        if e.kind == C.KIND_CLOSE and closed_at is None:
            closed_at = i
        prev = e.entry_hash
    if not entries or entries[-1] is None or entries[-1].kind != C.KIND_CLOSE:
        run.fail("chain", len(entries), Bad("close", "signed Close entry", "end of board", "truncated"))
    return entries


def _close(run: _Run, entries: list, m: _Manifest) -> None:
    e = entries[-1] if entries else None
    if e is None or e.kind != C.KIND_CLOSE:
        return
    try:
        obj = _obj(e.obj, C.CLOSE_FIELDS, "close")
        count = _int(obj["entry_count"], "close.entry_count")
        if count != len(entries):
            raise Bad("close.entry_count", str(len(entries)), str(count), "count")
        key = _hexb(obj["code_key"], C.CODE_KEY_BYTES, "close.code_key")
        if sha256(key) != m.code_commit:
            raise Bad("close.code_key", "key matching code_key_commitment", sha256(key).hex(), "commitment")
        sig = _obj(obj["signature"], C.SIGNATURE_FIELDS, "close.signature")
        c, z = _scalar(m.grp, sig["c"], "close.signature.c"), _scalar(m.grp, sig["z"], "close.signature.z")
        msg = C.CLOSE_MESSAGE_PREFIX + m.mhash + count.to_bytes(8, "big") + e.prev_hash + key
        if not _schnorr_ok(m.grp, m.authority_pk, msg, c, z):
            raise Bad("close.signature", "authority signature", "invalid", "signature")
    except Bad as bad:
        run.fail("chain", e.seq, bad)


def _schnorr_ok(grp: Group, pk: int, msg: bytes, c: int, z: int) -> bool:
    r = grp.exp(grp.g, z) * grp.exp(pk, -c) % grp.p
    return challenge(C.TAG_SIG, grp.q, grp.b(pk), grp.b(r), msg) == c


# -- manifest --------------------------------------------------------------


def _manifest(run: _Run, manifest_bytes: bytes, mobj: dict, entries: list) -> _Manifest | None:
    first = entries[0] if entries else None
    if first is None or first.kind != C.KIND_MANIFEST:
        run.fail("manifest", 0, Bad("manifest", "Manifest entry at seq 0", "missing", "missing"))
        source = mobj
    else:
        source = first.obj
        file_bytes = manifest_bytes[:-1] if manifest_bytes.endswith(b"\n") else manifest_bytes
        if file_bytes != first.payload:
            run.fail(
                "manifest",
                0,
                Bad("manifest-file", sha256(first.payload).hex(), sha256(file_bytes).hex(), "file-mismatch"),
            )
    try:
        return _parse_manifest(source)
    except Bad as bad:
        run.fail("manifest", 0, bad)
        return None


def _parse_manifest(obj) -> _Manifest:
    _obj(obj, C.MANIFEST_FIELDS, "manifest")
    gobj = _obj(obj["group"], C.GROUP_FIELDS, "group")
    for k in C.GROUP_FIELDS:
        if not isinstance(gobj[k], str) or not gobj[k] or not _HEX.issuperset(gobj[k]):
            raise Bad(f"group.{k}", "lowercase hex", _short(gobj[k]), "encoding")
    p, q, g = (int(gobj[k], 16) for k in C.GROUP_FIELDS)
    grp = Group(p, q, g)
    for k, v in zip(C.GROUP_FIELDS, (p, q, g)):
        if len(gobj[k]) != 2 * grp.width:
            raise Bad(f"group.{k}", f"{grp.width}-byte hex", _short(gobj[k]), "encoding")
    problems = grp.problems()
    if problems:
        raise Bad("group", "safe-prime subgroup", "; ".join(problems), "group")
    cands = _list(obj["candidates"], None, "candidates")
    if len(cands) < 2 or not all(isinstance(c, str) for c in cands) or len(set(cands)) != len(cands):
        raise Bad("candidates", ">= 2 distinct names", _short(cands), "candidates")
    if not isinstance(obj["election_id"], str):
        raise Bad("election_id", "string", _short(obj["election_id"]), "structure")
    pk = _elem(grp, obj["election_pk"], "election_pk")
    tpks = [_elem(grp, x, f"trustee_pks[{i}]") for i, x in enumerate(_list(obj["trustee_pks"], None, "trustee_pks"))]
    if not tpks:
        raise Bad("trustee_pks", "at least one trustee key", "[]", "structure")
    joint = 1
    for x in tpks:
        joint = joint * x % p
    if joint != pk:
        raise Bad("election_pk", grp.b(joint).hex(), obj["election_pk"], "joint-key")
    device_pk = _elem(grp, obj["device_pk"], "device_pk")
    authority_pk = _elem(grp, obj["authority_pk"], "authority_pk")
    commit = _hexb(obj["code_key_commitment"], 32, "code_key_commitment")
    if obj["receipt_mode"] not in C.RECEIPT_MODES:
        raise Bad("receipt_mode", "/".join(C.RECEIPT_MODES), _short(obj["receipt_mode"]), "structure")
    if obj["hash_alg"] != C.HASH_ALG:
        raise Bad("hash_alg", C.HASH_ALG, _short(obj["hash_alg"]), "structure")
    mhash = _hexb(obj["manifest_hash"], 32, "manifest_hash")
    body = {k: obj[k] for k in C.MANIFEST_FIELDS if k != "manifest_hash"}
    recomputed = sha256(_canon(body))
    if recomputed != mhash:
        raise Bad("manifest_hash", recomputed.hex(), mhash.hex(), "hash")
    for base in (g, pk, device_pk, authority_pk):
        grp.fix(base)
    return _Manifest(grp, len(cands), pk, tpks, device_pk, authority_pk, commit, obj["receipt_mode"], mhash)


# -- ballots ---------------------------------------------------------------


@dataclass
class _Ballot:
    nonce: bytes
    cts: list
    bps: list
    sp: tuple
    bhash: bytes


def _parse_ballot(m: _Manifest, obj, pre: str = "") -> _Ballot:
    grp = m.grp
    _obj(obj, C.BALLOT_FIELDS, pre + "ballot")
    nonce = _hexb(obj["nonce"], C.BALLOT_NONCE_BYTES, pre + "nonce")
    cts = []
    for i, c in enumerate(_list(obj["ciphertexts"], m.n, pre + "ciphertexts")):
        _obj(c, C.CIPHERTEXT_FIELDS, f"{pre}ciphertexts[{i}]")
        cts.append((_elem(grp, c["a"], f"{pre}ciphertexts[{i}].a"), _elem(grp, c["b"], f"{pre}ciphertexts[{i}].b")))
    bps = []
    for i, bp in enumerate(_list(obj["bit_proofs"], m.n, pre + "bit_proofs")):
        w = f"{pre}bit-proof[{i}]"
        _obj(bp, C.BIT_PROOF_FIELDS, w)
        bps.append(
            tuple(_elem(grp, bp[k], f"{w}.{k}") for k in ("a0", "b0", "a1", "b1"))
            + tuple(_scalar(grp, bp[k], f"{w}.{k}") for k in ("c0", "c1", "z0", "z1"))
        )
    sp = _obj(obj["sum_proof"], C.CP_PROOF_FIELDS, pre + "sum-proof")
    sp = (
        _elem(grp, sp["t_g"], pre + "sum-proof.t_g"),
        _elem(grp, sp["t_h"], pre + "sum-proof.t_h"),
        _scalar(grp, sp["c"], pre + "sum-proof.c"),
        _scalar(grp, sp["z"], pre + "sum-proof.z"),
    )
    bhash = _hexb(obj["ballot_hash"], 32, pre + "ballot_hash")
    return _Ballot(nonce, cts, bps, sp, bhash)


def _check_ballot(m: _Manifest, b: _Ballot, pre: str = "") -> None:
    grp, pk = m.grp, m.pk
    enc = grp.b
    p, q, g = grp.p, grp.q, grp.g
    for i, ((a, bb), (a0, b0, a1, b1, c0, c1, z0, z1)) in enumerate(zip(b.cts, b.bps)):
        ctx = m.mhash + b.nonce + i.to_bytes(4, "big")
        ch = challenge(C.TAG_BIT, q, ctx, enc(pk), enc(a), enc(bb), enc(a0), enc(b0), enc(a1), enc(b1))
        b_over_g = bb * pow(g, -1, p) % p
        ok = (
            (c0 + c1) % q == ch
            and grp.exp(g, z0) == a0 * grp.exp(a, c0) % p
            and grp.exp(pk, z0) == b0 * grp.exp(bb, c0) % p
            and grp.exp(g, z1) == a1 * grp.exp(a, c1) % p
            and grp.exp(pk, z1) == b1 * grp.exp(b_over_g, c1) % p
        )
        if not ok:
            raise Bad(f"{pre}bit-proof[{i}]", "valid 0/1 proof", "verification failed", "bit-proof")
    big_a = big_b = 1
    for a, bb in b.cts:
        big_a, big_b = big_a * a % p, big_b * bb % p
    y = big_b * pow(g, -1, p) % p
    t_g, t_h, c, z = b.sp
    ctx = m.mhash + b.nonce
    ok = (
        challenge(C.TAG_SUM, q, ctx, enc(pk), enc(big_a), enc(y), enc(t_g), enc(t_h)) == c
        and grp.exp(g, z) == t_g * grp.exp(big_a, c) % p
        and grp.exp(pk, z) == t_h * grp.exp(y, c) % p
    )
    if not ok:
        raise Bad(pre + "sum-proof", "valid exactly-one proof", "verification failed", "sum-proof")
    body = b.nonce + b"".join(enc(ca) + enc(cb) for ca, cb in b.cts)
    body += b"".join(b"".join(enc(v) for v in bp) for bp in b.bps) + b"".join(enc(v) for v in b.sp)
    h = sha256(body)
    if h != b.bhash:
        raise Bad(pre + "ballot-hash", h.hex(), b.bhash.hex(), "ballot-hash")


def _ballots(run: _Run, entries: list, m: _Manifest) -> list:
    """Check cast and challenged ballots; return the decodable cast ballots."""
    cast: list[_Ballot] = []
    seen: dict[bytes, int] = {}
    for e in entries:
        if e is None or e.kind not in (C.KIND_CAST, C.KIND_CHALLENGED):
            continue
        is_cast = e.kind == C.KIND_CAST
        pre = "" if is_cast else "ballot."
        try:
            rec = None if is_cast else _obj(e.obj, C.CHALLENGE_FIELDS, "challenge")
            b = _parse_ballot(m, e.obj if is_cast else rec["ballot"], pre)
            if is_cast:
                cast.append(b)
            if b.bhash in seen:
                raise Bad(pre + "ballot_hash", "unique ballot hash", f"duplicate of seq {seen[b.bhash]}", "duplicate")
            seen[b.bhash] = e.seq
            _check_ballot(m, b, pre)
            if rec is not None:
                _check_opening(m, b, rec)
        except Bad as bad:
            run.fail("ballot" if is_cast else "challenge", e.seq, bad)
    return cast


def _check_opening(m: _Manifest, b: _Ballot, rec: dict) -> None:
    grp = m.grp
    claimed = rec["claimed"]
    if type(claimed) is not int or not 0 <= claimed < m.n:
        raise Bad("claimed", f"candidate index in [0, {m.n})", _short(claimed), "structure")
    rs = [_scalar(grp, r, f"randomness[{i}]") for i, r in enumerate(_list(rec["randomness"], m.n, "randomness"))]
    for i, ((a, bb), r) in enumerate(zip(b.cts, rs)):
        if r == 0:
            raise Bad(f"randomness[{i}]", "scalar in [1, q-1]", "0", "range")
        ea = grp.exp(grp.g, r)
        eb = grp.exp(grp.g, int(i == claimed)) * grp.exp(m.pk, r) % grp.p
        if (ea, eb) != (a, bb):
            raise Bad(
                f"opening[{i}]",
                grp.b(ea).hex() + grp.b(eb).hex(),
                grp.b(a).hex() + grp.b(bb).hex(),
                "challenge-mismatch",
            )


# -- tally -----------------------------------------------------------------


def _tally(run: _Run, entries: list, m: _Manifest, cast: list) -> list | None:
    grp = m.grp
    p = grp.p
    tallies = [e for e in entries if e is not None and e.kind == C.KIND_TALLY]
    n_cast = sum(1 for e in entries if e is not None and e.kind == C.KIND_CAST)
    if len(tallies) != 1:
        seq = len(entries) - 1 if tallies == [] else tallies[1].seq
        run.fail("aggregate", seq, Bad("tally", "exactly one TallyArtifact", f"{len(tallies)} found", "tally"))
        return None
    t = tallies[0]
    n_tr = len(m.trustee_pks)
    try:
        obj = _obj(t.obj, C.TALLY_FIELDS, "tally")
        aggs = []
        for i, c in enumerate(_list(obj["aggregates"], m.n, "aggregates")):
            _obj(c, C.CIPHERTEXT_FIELDS, f"aggregates[{i}]")
            aggs.append((_elem(grp, c["a"], f"aggregates[{i}].a"), _elem(grp, c["b"], f"aggregates[{i}].b")))
        partials = []
        for i, row in enumerate(_list(obj["partials"], m.n, "partials")):
            prow = []
            for j, pd in enumerate(_list(row, n_tr, f"partials[{i}]")):
                w = f"partials[{i}][{j}]"
                _obj(pd, C.PARTIAL_FIELDS, w)
                if pd["trustee"] != j or type(pd["trustee"]) is not int:
                    raise Bad(w + ".trustee", str(j), _short(pd["trustee"]), "structure")
                pr = _obj(pd["proof"], C.CP_PROOF_FIELDS, w + ".proof")
                prow.append(
                    (
                        _elem(grp, pd["partial"], w + ".partial"),
                        _elem(grp, pr["t_g"], w + ".proof.t_g"),
                        _elem(grp, pr["t_h"], w + ".proof.t_h"),
                        _scalar(grp, pr["c"], w + ".proof.c"),
                        _scalar(grp, pr["z"], w + ".proof.z"),
                    )
                )
            partials.append(prow)
        counts = [_int(x, f"counts[{i}]") for i, x in enumerate(_list(obj["counts"], m.n, "counts"))]
        total_cast = _int(obj["total_cast"], "total_cast")
    except Bad as bad:
        run.fail("aggregate", t.seq, bad)
        return None

    # aggregate recomputation
    ra, rb = [1] * m.n, [1] * m.n
    for b in cast:
        for i, (a, bb) in enumerate(b.cts):
            ra[i], rb[i] = ra[i] * a % p, rb[i] * bb % p
    for i, (a, bb) in enumerate(aggs):
        if (ra[i], rb[i]) != (a, bb):
            run.fail(
                "aggregate",
                t.seq,
                Bad(f"aggregates[{i}]", grp.b(ra[i]).hex() + grp.b(rb[i]).hex(), grp.b(a).hex() + grp.b(bb).hex(), "aggregate-mismatch"),
            )

    # decryption proofs
    enc = grp.b
    for i, ((a, _), row) in enumerate(zip(aggs, partials)):
        for j, (part, t_g, t_h, c, z) in enumerate(row):
            pk_j = m.trustee_pks[j]
            ctx = m.mhash + i.to_bytes(4, "big") + j.to_bytes(4, "big")
            ok = (
                challenge(C.TAG_DEC, grp.q, ctx, enc(a), enc(pk_j), enc(part), enc(t_g), enc(t_h)) == c
                and grp.exp(grp.g, z) == t_g * grp.exp(pk_j, c) % p
                and grp.exp(a, z) == t_h * grp.exp(part, c) % p
            )
            if not ok:
                run.fail("decryption", t.seq, Bad(f"partials[{i}][{j}].proof", "valid decryption proof", "verification failed", "decryption-proof"))

    # exponent recovery vs published counts
    recomputed = []
    for i, ((_, bb), row) in enumerate(zip(aggs, partials)):
        denom = 1
        for part, *_ in row:
            denom = denom * part % p
        gm = bb * pow(denom, -1, p) % p
        val = discrete_log(grp, gm, n_cast, C.LINEAR_SCAN_LIMIT)
        recomputed.append(val)
        if val is None:
            run.fail("count", t.seq, Bad(f"counts[{i}]", f"count in [0, {n_cast}]", "no such count", "count-unrecoverable"))
        elif val != counts[i]:
            run.fail("count", t.seq, Bad(f"counts[{i}]", str(val), str(counts[i]), "count-mismatch"))

    if total_cast != n_cast:
        run.fail("total", t.seq, Bad("total_cast", str(n_cast), str(total_cast), "total-mismatch"))
    if sum(counts) != n_cast:
        run.fail("total", t.seq, Bad("counts", f"sum {n_cast} (cast ballots)", f"sum {sum(counts)}", "total-mismatch"))
    return None if any(v is None for v in recomputed) else recomputed


# -- receipts --------------------------------------------------------------

INCLUDED, MISSING, SIGNATURE_INVALID = "Included", "Missing", "SignatureInvalid"


def check_receipt(receipt_bytes: bytes, m: _Manifest, entries: list) -> tuple[str, Bad | None]:
    grp = m.grp
    try:
        obj = _obj(json.loads(receipt_bytes), C.RECEIPT_FIELDS, "receipt")
        bh = _hexb(obj["ballot_hash"], 32, "receipt.ballot_hash")
        code = obj["return_code"]
        if not (isinstance(code, str) and len(code) == C.CODE_LENGTH and all(ch in C.CODE_ALPHABET for ch in code)):
            raise Bad("receipt.return_code", "two letters A-Z", _short(code), "structure")
        if m.receipt_mode == C.RECEIPT_SIGNED:
            sig = _obj(obj["signature"], C.SIGNATURE_FIELDS, "receipt.signature")
            c, z = _scalar(grp, sig["c"], "receipt.signature.c"), _scalar(grp, sig["z"], "receipt.signature.z")
            if not _schnorr_ok(grp, m.device_pk, C.RECEIPT_MESSAGE_PREFIX + bh + code.encode(), c, z):
                raise Bad("receipt.signature", "device signature", "invalid", "signature")
    except (Bad, ValueError) as exc:
        bad = exc if isinstance(exc, Bad) else Bad("receipt", "receipt JSON", "undecodable", "decode")
        return SIGNATURE_INVALID, bad
    for e in entries:
        if e is not None and e.kind == C.KIND_CAST and isinstance(e.obj, dict) and e.obj.get("ballot_hash") == bh.hex():
            return INCLUDED, None
    return MISSING, Bad("receipt.ballot_hash", "CastBallot entry", "absent", "receipt-missing")


# -- driver ----------------------------------------------------------------


def verify_election(manifest_bytes: bytes, board_bytes: bytes, receipt_bytes: bytes | None = None) -> VerificationReport:
    run = _Run()
    decoded = _decode(run, manifest_bytes, board_bytes)
    if decoded is None:
        report = run.report()
        report.decode_error = True
        return report
    mobj, parsed = decoded
    entries = _chain(run, parsed)
    m = _manifest(run, manifest_bytes, mobj, entries)
    counts = None
    if m is None:
        for name in C.CHECK_ORDER[3:]:
            run.fail(name, 0, Bad("manifest", "usable manifest", "unusable", "skipped"))
    else:
        _close(run, entries, m)
        cast = _ballots(run, entries, m)
        counts = _tally(run, entries, m, cast)
    report = run.report()
    report.counts = counts
    if receipt_bytes is not None:
        if m is None:
            report.receipt = SIGNATURE_INVALID
        else:
            status, bad = check_receipt(receipt_bytes, m, entries)
            report.receipt = status
            if bad is None:
                report.checks.append(Check("receipt", True))
            else:
                report.checks.append(Check("receipt", False, bad.reason, None, bad.field, bad.expected, bad.found))
    return report
