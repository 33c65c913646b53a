"""Election manifest, encrypted ballots, and opening of challenged ballots."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

from . import constants
from .elgamal import Ciphertext, encrypt_bit, homomorphic_sum
from .group import GroupError, GroupParams, Rng, random_nonce
from .hashing import canonical_json, sha256, u32
from .proofs import BitProof, SumProof, prove_bit, prove_sum, verify_bit, verify_sum


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ElectionManifest:
    election_id: str
    candidates: tuple[str, ...]
    params: GroupParams
    election_pk: int
    trustee_pks: tuple[int, ...]
    device_pk: int
    authority_pk: int
    code_key_commitment: bytes
    receipt_mode: str
    hash_alg: str
    manifest_hash: bytes

    @classmethod
    def create(
        cls,
        election_id: str,
        candidates: Sequence[str],
        params: GroupParams,
        election_pk: int,
        trustee_pks: Sequence[int],
        device_pk: int,
        authority_pk: int,
        code_key: bytes,
        receipt_mode: str = constants.RECEIPT_SIGNED,
    ) -> "ElectionManifest":
        m = cls(
            election_id,
            tuple(candidates),
            params,
            election_pk,
            tuple(trustee_pks),
            device_pk,
            authority_pk,
            sha256(code_key),
            receipt_mode,
            constants.HASH_ALG,
            b"",
        )
        m = replace(m, manifest_hash=sha256(canonical_json(m._body())))
        m.check()
        return m

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    def _body(self) -> dict:
        enc = self.params.encode
        return {
            "election_id": self.election_id,
            "candidates": list(self.candidates),
            "group": self.params.to_json(),
            "election_pk": enc(self.election_pk),
            "trustee_pks": [enc(x) for x in self.trustee_pks],
            "device_pk": enc(self.device_pk),
            "authority_pk": enc(self.authority_pk),
            "code_key_commitment": self.code_key_commitment.hex(),
            "receipt_mode": self.receipt_mode,
            "hash_alg": self.hash_alg,
        }

    def to_json(self) -> dict:
        return {**self._body(), "manifest_hash": self.manifest_hash.hex()}

    def to_bytes(self) -> bytes:
        return canonical_json(self.to_json())

    def check(self) -> None:
        """Raise ManifestError unless the manifest is internally consistent."""
        if len(self.candidates) < 2:
            raise ManifestError("at least two candidates required")
        if len(set(self.candidates)) != len(self.candidates):
            raise ManifestError("duplicate candidate names")
        if self.receipt_mode not in constants.RECEIPT_MODES:
            raise ManifestError("unknown receipt mode")
        if self.hash_alg != constants.HASH_ALG:
            raise ManifestError("unsupported hash algorithm")
        if not self.trustee_pks:
            raise ManifestError("no trustees")
        p = self.params
        try:
            p.validate()
        except GroupError as exc:
            raise ManifestError(str(exc)) from exc
        for x in (self.election_pk, self.device_pk, self.authority_pk, *self.trustee_pks):
            if not p.is_member(x) or x == 1:
                raise ManifestError("public key outside the group")
        joint = 1
        for x in self.trustee_pks:
            joint = p.mul(joint, x)
        if joint != self.election_pk:
            raise ManifestError("election key is not the product of trustee keys")
        if self.manifest_hash != sha256(canonical_json(self._body())):
            raise ManifestError("manifest hash does not recompute")

    @classmethod
    def from_json(cls, obj: dict) -> "ElectionManifest":
        if not isinstance(obj, dict) or tuple(obj) != constants.MANIFEST_FIELDS:
            raise ManifestError("bad manifest object")
        try:
            params = GroupParams.from_json(obj["group"])
            cands = obj["candidates"]
            if not isinstance(cands, list) or not all(isinstance(c, str) for c in cands):
                raise ManifestError("candidates must be a list of names")
            if not isinstance(obj["election_id"], str) or not isinstance(obj["trustee_pks"], list):
                raise ManifestError("bad manifest field types")
            m = cls(
                obj["election_id"],
                tuple(cands),
                params,
                params.decode_element(obj["election_pk"]),
                tuple(params.decode_element(x) for x in obj["trustee_pks"]),
                params.decode_element(obj["device_pk"]),
                params.decode_element(obj["authority_pk"]),
                _hex32(obj["code_key_commitment"]),
                obj["receipt_mode"],
                obj["hash_alg"],
                _hex32(obj["manifest_hash"]),
            )
        except (GroupError, TypeError, ValueError) as exc:
            if isinstance(exc, ManifestError):
                raise
            raise ManifestError(str(exc)) from exc
        m.check()
        return m

    @classmethod
    def from_bytes(cls, data: bytes) -> "ElectionManifest":
        try:
            obj = json.loads(data)
        except ValueError as exc:
            raise ManifestError("manifest is not JSON") from exc
        m = cls.from_json(obj)
        if m.to_bytes() != data.rstrip(b"\n"):
            raise ManifestError("manifest is not canonically encoded")
        return m

    def prepare(self) -> "ElectionManifest":
        """Build fixed-base tables for the group's hot bases."""
        for base in (self.params.g, self.election_pk, self.device_pk, self.authority_pk):
            self.params.fix_base(base)
        return self


def _hex32(s) -> bytes:
    try:
        return _hexbytes(s, 32)
    except GroupError as exc:
        raise ManifestError(str(exc)) from exc


@dataclass(frozen=True)
class PlainBallot:
    selection: int

    def check(self, manifest: ElectionManifest) -> None:
        if not isinstance(self.selection, int) or not 0 <= self.selection < manifest.n_candidates:
            raise ValueError(f"selection {self.selection!r} out of range")

    def vector(self, n: int) -> list[int]:
        return [int(i == self.selection) for i in range(n)]


@dataclass(frozen=True)
class BallotRandomness:
    rs: tuple[int, ...]

    def total(self, q: int) -> int:
        return sum(self.rs) % q


@dataclass(frozen=True)
class EncryptedBallot:
    nonce: bytes
    ciphertexts: tuple[Ciphertext, ...]
    bit_proofs: tuple[BitProof, ...]
    sum_proof: SumProof
    ballot_hash: bytes

    def body_bytes(self, params: GroupParams) -> bytes:
        """Nonce, ciphertexts, bit proofs, sum proof: the bytes the ballot hash covers."""
        return (
            self.nonce
            + b"".join(c.to_bytes(params) for c in self.ciphertexts)
            + b"".join(bp.to_bytes(params) for bp in self.bit_proofs)
            + self.sum_proof.to_bytes(params)
        )

    def compute_hash(self, params: GroupParams) -> bytes:
        return sha256(self.body_bytes(params))

    def to_json(self, params: GroupParams) -> dict:
        return {
            "nonce": self.nonce.hex(),
            "ciphertexts": [c.to_json(params) for c in self.ciphertexts],
            "bit_proofs": [bp.to_json(params) for bp in self.bit_proofs],
            "sum_proof": self.sum_proof.to_json(params),
            "ballot_hash": self.ballot_hash.hex(),
        }

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "EncryptedBallot":
        """Decode, raising GroupError on any structural or encoding fault."""
        if not isinstance(obj, dict) or tuple(obj) != constants.BALLOT_FIELDS:
            raise GroupError("bad ballot object")
        nonce = _hexbytes(obj["nonce"], constants.BALLOT_NONCE_BYTES)
        cts, bps = obj["ciphertexts"], obj["bit_proofs"]
        if not isinstance(cts, list) or not isinstance(bps, list):
            raise GroupError("ciphertexts and bit_proofs must be lists")
        return cls(
            nonce,
            tuple(Ciphertext.from_json(params, c) for c in cts),
            tuple(BitProof.from_json(params, bp) for bp in bps),
            SumProof.from_json(params, obj["sum_proof"]),
            _hexbytes(obj["ballot_hash"], 32),
        )


_HEX = frozenset("0123456789abcdef")


def _hexbytes(s, n: int) -> bytes:
    if not isinstance(s, str) or len(s) != 2 * n or not _HEX.issuperset(s):
        raise GroupError(f"expected {n}-byte lowercase hex")
    return bytes.fromhex(s)


@dataclass(frozen=True)
class ChallengeRecord:
    """A spoiled ballot with everything needed to open it publicly."""

    ballot: EncryptedBallot
    randomness: BallotRandomness
    claimed: int

    def to_json(self, params: GroupParams) -> dict:
        return {
            "ballot": self.ballot.to_json(params),
            "randomness": [params.encode(r) for r in self.randomness.rs],
            "claimed": self.claimed,
        }

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "ChallengeRecord":
        if not isinstance(obj, dict) or tuple(obj) != constants.CHALLENGE_FIELDS:
            raise GroupError("bad challenge record")
        rs = obj["randomness"]
        claimed = obj["claimed"]
        if not isinstance(rs, list) or type(claimed) is not int:
            raise GroupError("bad challenge record field types")
        return cls(
            EncryptedBallot.from_json(params, obj["ballot"]),
            BallotRandomness(tuple(params.decode_scalar(r) for r in rs)),
            claimed,
        )


def bit_context(manifest_hash: bytes, nonce: bytes, index: int) -> bytes:
    return manifest_hash + nonce + u32(index)


def sum_context(manifest_hash: bytes, nonce: bytes) -> bytes:
    return manifest_hash + nonce


def encrypt_ballot(
    manifest: ElectionManifest, plain: PlainBallot, rng: Rng, encrypt_as: int | None = None
) -> tuple[EncryptedBallot, BallotRandomness]:
    """Encrypt a one-of-n selection with bit proofs and an exactly-one proof.

    ``encrypt_as`` lets a device encrypt a different candidate than the voter
    chose (the cheating device); the result is still a well-formed ballot.
    """
    plain.check(manifest)
    target = PlainBallot(plain.selection if encrypt_as is None else encrypt_as)
    target.check(manifest)
    params, pk = manifest.params, manifest.election_pk
    n = manifest.n_candidates
    nonce = random_nonce(rng)
    rs = tuple(params.random_scalar(rng) for _ in range(n))
    bits = target.vector(n)
    cts = tuple(encrypt_bit(params, pk, m, r) for m, r in zip(bits, rs))
    bps = tuple(
        prove_bit(params, pk, c, m, r, bit_context(manifest.manifest_hash, nonce, i), rng)
        for i, (c, m, r) in enumerate(zip(cts, bits, rs))
    )
    rnd = BallotRandomness(rs)
    sp = prove_sum(
        params,
        pk,
        homomorphic_sum(params, cts),
        rnd.total(params.q),
        sum_context(manifest.manifest_hash, nonce),
        rng,
    )
    eb = EncryptedBallot(nonce, cts, bps, sp, b"")
    eb = EncryptedBallot(nonce, cts, bps, sp, eb.compute_hash(params))
    return eb, rnd


class BallotCheck(NamedTuple):
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


ACCEPT = BallotCheck(True)


def verify_ballot(manifest: ElectionManifest, eb: EncryptedBallot | dict | bytes) -> BallotCheck:
    """Check per-candidate bit proofs, the exactly-one proof and the hash, in that order.

    Proofs come first so that a flipped ciphertext or proof byte is reported
    against the proof it breaks rather than as a bare hash mismatch.
    """
    params, pk = manifest.params, manifest.election_pk
    if not isinstance(eb, EncryptedBallot):
        try:
            obj = json.loads(eb) if isinstance(eb, (bytes, str)) else eb
            eb = EncryptedBallot.from_json(params, obj)
        except (GroupError, ValueError, TypeError, KeyError):
            return BallotCheck(False, "decode")
    if len(eb.ciphertexts) != manifest.n_candidates or len(eb.bit_proofs) != manifest.n_candidates:
        return BallotCheck(False, "candidate-count")
    for i, (c, bp) in enumerate(zip(eb.ciphertexts, eb.bit_proofs)):
        if not verify_bit(params, pk, c, bp, bit_context(manifest.manifest_hash, eb.nonce, i)):
            return BallotCheck(False, f"bit-proof[{i}]")
    total = homomorphic_sum(params, eb.ciphertexts)
    if not verify_sum(params, pk, total, eb.sum_proof, sum_context(manifest.manifest_hash, eb.nonce)):
        return BallotCheck(False, "sum-proof")
    if eb.compute_hash(params) != eb.ballot_hash:
        return BallotCheck(False, "ballot-hash")
    return ACCEPT


def open_ballot(
    manifest: ElectionManifest, eb: EncryptedBallot, rnd: BallotRandomness, claimed: PlainBallot
) -> bool:
    """True iff re-encrypting ``claimed`` under ``rnd`` reproduces ``eb``'s ciphertexts."""
    params, pk = manifest.params, manifest.election_pk
    n = manifest.n_candidates
    if len(rnd.rs) != n or len(eb.ciphertexts) != n:
        return False
    try:
        claimed.check(manifest)
        expect = [encrypt_bit(params, pk, m, r) for m, r in zip(claimed.vector(n), rnd.rs)]
    except ValueError:
        return False
    return all(
        params.to_bytes(x.a) == params.to_bytes(y.a) and params.to_bytes(x.b) == params.to_bytes(y.b)
        for x, y in zip(expect, eb.ciphertexts)
    )
