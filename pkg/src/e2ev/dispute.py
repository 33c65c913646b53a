"""Receipts, return codes, adjudication of complaints, and dummy-vote audits."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import constants
from .ballot import ChallengeRecord, ElectionManifest, PlainBallot, open_ballot
from .group import GroupError, GroupParams
from .hashing import canonical_json, keyed_digest
from .signature import Signature, receipt_message, verify_signature


def issue_return_code(ballot_hash: bytes, code_key: bytes) -> str:
    """Two letters A-Z from a keyed hash of the ballot hash (676 codes)."""
    n = int.from_bytes(keyed_digest(constants.TAG_CODE, code_key, ballot_hash), "big")
    n %= constants.CODE_SPACE
    letters = []
    for _ in range(constants.CODE_LENGTH):
        n, k = divmod(n, len(constants.CODE_ALPHABET))
        letters.append(constants.CODE_ALPHABET[k])
    return "".join(reversed(letters))


def expected_defamation_successes(n_claims: int) -> float:
    """Mean number of correct blind guesses among ``n_claims`` code guesses."""
    if n_claims < 0:
        raise ValueError("n_claims must be >= 0")
    return n_claims / constants.CODE_SPACE


@dataclass(frozen=True)
class Receipt:
    ballot_hash: bytes
    return_code: str
    signature: Signature | None

    def message(self) -> bytes:
        return receipt_message(self.ballot_hash, self.return_code)

    def to_json(self, params: GroupParams) -> dict:
        return {
            "ballot_hash": self.ballot_hash.hex(),
            "return_code": self.return_code,
            "signature": None if self.signature is None else self.signature.to_json(params),
        }

    def to_bytes(self, params: GroupParams) -> bytes:
        return canonical_json(self.to_json(params))

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "Receipt":
        """Decode a receipt; a malformed signature decodes as an invalid one."""
        if not isinstance(obj, dict) or tuple(obj) != constants.RECEIPT_FIELDS:
            raise ValueError("bad receipt object")
        bh, code = obj["ballot_hash"], obj["return_code"]
        if not isinstance(bh, str) or len(bh) != 64 or not set(bh) <= _HEX_DIGITS:
            raise ValueError("bad ballot hash")
        if not _is_code(code):
            raise ValueError("bad return code")
        sig = None
        if obj["signature"] is not None:
            try:
                sig = Signature.from_json(params, obj["signature"])
            except GroupError:
                sig = _INVALID_SIGNATURE
        return cls(bytes.fromhex(bh), code, sig)


_HEX_DIGITS = frozenset("0123456789abcdef")

# Stand-in for a signature that could not be decoded; never verifies because
# c is out of range.
_INVALID_SIGNATURE = Signature(-1, -1)


def _is_code(code) -> bool:
    return (
        isinstance(code, str)
        and len(code) == constants.CODE_LENGTH
        and all(ch in constants.CODE_ALPHABET for ch in code)
    )


def receipt_signature_valid(manifest: ElectionManifest, receipt: Receipt) -> bool:
    if receipt.signature is None or not _is_code(receipt.return_code):
        return False
    return verify_signature(manifest.params, manifest.device_pk, receipt.message(), receipt.signature)


class ClaimKind(str, enum.Enum):
    NOT_INCLUDED = "NotIncluded"
    WRONG_CODE = "WrongCode"


class Outcome(str, enum.Enum):
    UPHELD = "Upheld"
    REJECTED = "Rejected"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DisputeClaim:
    receipt: Receipt
    kind: ClaimKind
    observed_issuance: bool = False

    def to_json(self, params: GroupParams) -> dict:
        return {
            "receipt": self.receipt.to_json(params),
            "kind": self.kind.value,
            "observed_issuance": self.observed_issuance,
        }

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "DisputeClaim":
        if not isinstance(obj, dict) or tuple(obj) != constants.CLAIM_FIELDS:
            raise ValueError("bad claim object")
        if not isinstance(obj["observed_issuance"], bool):
            raise ValueError("observed_issuance must be a boolean")
        return cls(Receipt.from_json(params, obj["receipt"]), ClaimKind(obj["kind"]), obj["observed_issuance"])


@dataclass(frozen=True)
class AdjudicationResult:
    outcome: Outcome
    rationale: str
    locator: dict = field(default_factory=dict)

    def render(self) -> str:
        """Plain-text report followed by a JSON locator block."""
        return f"{self.outcome.value}: {self.rationale}\n" + json.dumps(self.locator, sort_keys=True) + "\n"


def adjudicate(claim: DisputeClaim, snapshot, manifest: ElectionManifest | None = None) -> AdjudicationResult:
    """Decide a complaint from the receipt, the board and (after close) the code key.

    Signed receipts (the default mode):

    ========================  ==========================  ============
    signature                 board / code                outcome
    ========================  ==========================  ============
    invalid, observed         any                         Upheld
    invalid, unobserved       any                         Inconclusive
    valid                     ballot absent from cast     Upheld
    valid, NotIncluded        ballot cast                 Rejected
    valid, WrongCode          cast, code != recomputed    Upheld
    valid, WrongCode          cast, code == recomputed    Rejected
    ========================  ==========================  ============

    Code-only receipts carry no signature; the return code is the only proof
    the claimant saw the ballot committed, so a claim stands iff the code
    matches (WrongCode), or matches and the ballot is absent (NotIncluded).
    """
    manifest = manifest or snapshot.manifest()
    receipt = claim.receipt
    found = snapshot.lookup(receipt.ballot_hash)
    cast = found is not None and found.kind == constants.KIND_CAST
    loc = {"ballot_hash": receipt.ballot_hash.hex(), "seq": found.seq if found else None}
    code_key = snapshot.code_key()

    if manifest.receipt_mode == constants.RECEIPT_CODE_ONLY:
        if code_key is None:
            return AdjudicationResult(Outcome.INCONCLUSIVE, "code key not yet published", loc)
        expected = issue_return_code(receipt.ballot_hash, code_key)
        if receipt.return_code != expected:
            return AdjudicationResult(Outcome.REJECTED, "return code does not match; possession not shown", loc)
        if claim.kind == ClaimKind.NOT_INCLUDED and cast:
            return AdjudicationResult(Outcome.REJECTED, f"ballot is cast at seq {found.seq}", loc)
        return AdjudicationResult(Outcome.UPHELD, "return code matches the keyed code for this ballot", loc)

    if not receipt_signature_valid(manifest, receipt):
        loc["signature"] = "invalid"
        if claim.observed_issuance:
            return AdjudicationResult(
                Outcome.UPHELD, "observer saw the device issue a receipt with an invalid signature", loc
            )
        return AdjudicationResult(
            Outcome.INCONCLUSIVE, "invalid signature without observed issuance; forgery cannot be excluded", loc
        )
    loc["signature"] = "valid"
    if not cast:
        return AdjudicationResult(Outcome.UPHELD, "validly signed receipt but ballot is not on the cast list", loc)
    if claim.kind == ClaimKind.NOT_INCLUDED:
        return AdjudicationResult(Outcome.REJECTED, f"ballot is cast at seq {found.seq}", loc)
    if code_key is None:
        return AdjudicationResult(Outcome.INCONCLUSIVE, "code key not yet published", loc)
    expected = issue_return_code(receipt.ballot_hash, code_key)
    loc.update(expected_code=expected, found_code=receipt.return_code)
    if receipt.return_code != expected:
        return AdjudicationResult(Outcome.UPHELD, "device signed a return code that does not match", loc)
    return AdjudicationResult(Outcome.REJECTED, "return code matches the published code key", loc)


@dataclass(frozen=True)
class DummySession:
    ballot_hash: bytes
    selection: int

    def to_json(self) -> dict:
        return {"ballot_hash": self.ballot_hash.hex(), "selection": self.selection}

    @classmethod
    def from_json(cls, obj: dict) -> "DummySession":
        return cls(bytes.fromhex(obj["ballot_hash"]), int(obj["selection"]))


@dataclass
class AuditReport:
    sessions: int
    inconsistencies: list[dict]
    cast_leaks: list[dict]

    @property
    def ok(self) -> bool:
        return not self.inconsistencies and not self.cast_leaks

    def to_json(self) -> dict:
        return {
            "sessions": self.sessions,
            "inconsistencies": self.inconsistencies,
            "cast_leaks": self.cast_leaks,
        }


def load_dummies(data: bytes) -> list[DummySession]:
    return [DummySession.from_json(o) for o in json.loads(data)]


def dummy_vote_audit(snapshot, dummies: Sequence[DummySession] | Iterable[DummySession]) -> AuditReport:
    """Check that every scripted dummy session was challenged and opens to its script."""
    manifest = snapshot.manifest()
    params = manifest.params
    challenged = {}
    for e in snapshot.entries_of(constants.KIND_CHALLENGED):
        rec = ChallengeRecord.from_json(params, json.loads(e.payload))
        challenged[rec.ballot.ballot_hash] = (e.seq, rec)
    inconsistencies, leaks = [], []
    dummies = list(dummies)
    for d in dummies:
        found = snapshot.lookup(d.ballot_hash)
        if found is not None and found.kind == constants.KIND_CAST:
            leaks.append({"ballot_hash": d.ballot_hash.hex(), "seq": found.seq})
            continue
        if d.ballot_hash not in challenged:
            inconsistencies.append({"ballot_hash": d.ballot_hash.hex(), "problem": "not on challenged list"})
            continue
        seq, rec = challenged[d.ballot_hash]
        transcript = {"seq": seq, "scripted": d.selection, "claimed": rec.claimed, "record": rec.to_json(params)}
        if rec.claimed != d.selection:
            inconsistencies.append({**transcript, "problem": "claimed selection differs from script"})
        elif not open_ballot(manifest, rec.ballot, rec.randomness, PlainBallot(d.selection)):
            inconsistencies.append({**transcript, "problem": "opening does not match the encryption"})
    return AuditReport(len(dummies), inconsistencies, leaks)
