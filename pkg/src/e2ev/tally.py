"""Homomorphic tally of the cast list, with provable decryption."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import constants
from .ballot import ElectionManifest, EncryptedBallot, verify_ballot
from .board import BoardSnapshot, BulletinBoard, verify_chain
from .elgamal import Ciphertext, TrusteeShare, combine_shares, recover_exponent
from .group import GroupParams, Rng
from .hashing import u32
from .proofs import DecryptionProof, decrypt_share, verify_decryption
from .signature import SigningKey, close_message, sign


class TallyError(RuntimeError):
    pass


def decryption_context(manifest_hash: bytes, candidate: int, trustee: int) -> bytes:
    return manifest_hash + u32(candidate) + u32(trustee)


@dataclass(frozen=True)
class PartialDecryption:
    trustee: int
    partial: int
    proof: DecryptionProof

    def to_json(self, params: GroupParams) -> dict:
        return {"trustee": self.trustee, "partial": params.encode(self.partial), "proof": self.proof.to_json(params)}


@dataclass(frozen=True)
class TallyArtifact:
    aggregates: tuple[Ciphertext, ...]
    partials: tuple[tuple[PartialDecryption, ...], ...]
    counts: tuple[int, ...]
    total_cast: int

    def to_json(self, params: GroupParams) -> dict:
        return {
            "aggregates": [c.to_json(params) for c in self.aggregates],
            "partials": [[pd.to_json(params) for pd in row] for row in self.partials],
            "counts": list(self.counts),
            "total_cast": self.total_cast,
        }


def aggregate(snapshot: BoardSnapshot) -> tuple[list[Ciphertext], int]:
    """Per-candidate product of all cast ciphertexts, in board order.

    Returns the aggregates and the number of cast ballots.  Any cast ballot
    failing verification aborts: the board should have refused it.
    """
    result = verify_chain(snapshot.entries)
    if not result.ok:
        raise TallyError(f"chain invalid at seq {result.bad_seq}: {result.reason}")
    manifest = snapshot.manifest()
    params = manifest.params
    n = manifest.n_candidates
    a = [1] * n
    b = [1] * n
    total = 0
    for e in snapshot.entries_of(constants.KIND_CAST):
        obj = e.payload_json()
        check = verify_ballot(manifest, obj)
        if not check:
            raise TallyError(f"invalid cast ballot at seq {e.seq}: {check.reason}")
        eb = EncryptedBallot.from_json(params, obj)
        for i, c in enumerate(eb.ciphertexts):
            a[i] = a[i] * c.a % params.p
            b[i] = b[i] * c.b % params.p
        total += 1
    return [Ciphertext(x, y) for x, y in zip(a, b)], total


def decrypt_tally(
    manifest: ElectionManifest,
    aggregates: Sequence[Ciphertext],
    shares: Sequence[TrusteeShare],
    total_cast: int,
) -> TallyArtifact:
    """Decrypt every aggregate with all trustee shares and recover the counts."""
    params = manifest.params
    n_trustees = len(manifest.trustee_pks)
    by_index = {s.index: s for s in shares}
    if sorted(by_index) != list(range(n_trustees)):
        raise TallyError("every trustee share is required")
    rows = []
    counts = []
    for i, agg in enumerate(aggregates):
        row = []
        for t in range(n_trustees):
            share = by_index[t]
            if share.public(params) != manifest.trustee_pks[t]:
                raise TallyError(f"share {t} does not match its published key")
            ctx = decryption_context(manifest.manifest_hash, i, t)
            partial, proof = decrypt_share(params, share, agg, ctx)
            if not verify_decryption(params, manifest.trustee_pks[t], agg, partial, proof, ctx):
                raise TallyError(f"decryption proof failed for candidate {i}, trustee {t}")
            row.append(PartialDecryption(t, partial, proof))
        gm = combine_shares(params, agg, [pd.partial for pd in row], n_trustees)
        m = recover_exponent(params, gm, total_cast)
        if m is None:
            raise TallyError(f"aggregate {i} does not decrypt to a count in [0, {total_cast}]")
        rows.append(tuple(row))
        counts.append(m)
    return TallyArtifact(tuple(aggregates), tuple(rows), tuple(counts), total_cast)


def publish_tally(board: BulletinBoard, shares: Sequence[TrusteeShare]) -> TallyArtifact:
    snap = board.snapshot()
    aggregates, total = aggregate(snap)
    manifest = snap.manifest()
    artifact = decrypt_tally(manifest, aggregates, shares, total)
    board.append(constants.KIND_TALLY, artifact.to_json(manifest.params))
    return artifact


def close_board(board: BulletinBoard, authority_key: SigningKey, code_key: bytes, rng: Rng) -> int:
    """Append the signed Close entry, publishing the return-code key."""
    manifest = board.manifest
    seq = len(board)
    prev = board.snapshot().entries[-1].entry_hash
    msg = close_message(manifest.manifest_hash, seq + 1, prev, code_key)
    sig = sign(manifest.params, authority_key, msg, rng)
    board.append(
        constants.KIND_CLOSE,
        {"entry_count": seq + 1, "code_key": code_key.hex(), "signature": sig.to_json(manifest.params)},
    )
    return seq
