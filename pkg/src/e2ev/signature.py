"""Schnorr signatures in the election group (domain ``e2ev/sig/v1``)."""

from __future__ import annotations

from dataclasses import dataclass

from . import constants
from .group import GroupError, GroupParams, Rng
from .hashing import derive_challenge


@dataclass(frozen=True)
class Signature:
    c: int
    z: int

    def to_json(self, params: GroupParams) -> dict:
        return {"c": params.encode(self.c), "z": params.encode(self.z)}

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "Signature":
        if not isinstance(obj, dict) or tuple(obj) != constants.SIGNATURE_FIELDS:
            raise GroupError("bad signature object")
        return cls(params.decode_scalar(obj["c"]), params.decode_scalar(obj["z"]))


@dataclass(frozen=True)
class SigningKey:
    sk: int
    pk: int

    @classmethod
    def generate(cls, params: GroupParams, rng: Rng) -> "SigningKey":
        sk = params.random_scalar(rng)
        return cls(sk, params.gpow(sk))


def _challenge(params: GroupParams, pk: int, commitment: int, message: bytes) -> int:
    enc = params.to_bytes
    return derive_challenge(constants.TAG_SIG, enc(pk), enc(commitment), message, q=params.q)


def sign(params: GroupParams, key: SigningKey, message: bytes, rng: Rng) -> Signature:
    w = params.random_scalar(rng)
    c = _challenge(params, key.pk, params.gpow(w), message)
    return Signature(c, (w + c * key.sk) % params.q)


def verify_signature(params: GroupParams, pk: int, message: bytes, sig: Signature) -> bool:
    if not (0 <= sig.c < params.q and 0 <= sig.z < params.q):
        return False
    commitment = params.mul(params.gpow(sig.z), params.pow(pk, -sig.c))
    return _challenge(params, pk, commitment, message) == sig.c


def receipt_message(ballot_hash: bytes, return_code: str) -> bytes:
    return constants.RECEIPT_MESSAGE_PREFIX + ballot_hash + return_code.encode("ascii")


def close_message(manifest_hash: bytes, entry_count: int, prev_hash: bytes, code_key: bytes) -> bytes:
    return (
        constants.CLOSE_MESSAGE_PREFIX
        + manifest_hash
        + entry_count.to_bytes(8, "big")
        + prev_hash
        + code_key
    )
