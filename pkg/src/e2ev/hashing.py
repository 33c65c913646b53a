"""Hashing, Fiat-Shamir challenge derivation and canonical JSON."""

from __future__ import annotations

import hashlib
import hmac
import json
from typing import Any

from . import constants


class UnknownDomainTag(ValueError):
    pass


def canonical_json(obj: Any) -> bytes:
    """Compact, ASCII-only JSON with insertion-ordered keys."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True, allow_nan=False).encode("ascii")


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def u32(n: int) -> bytes:
    return n.to_bytes(4, "big")


def u64(n: int) -> bytes:
    return n.to_bytes(8, "big")


def length_prefixed(*parts: bytes) -> bytes:
    return b"".join(u32(len(part)) + part for part in parts)


def _check_tag(tag: str) -> bytes:
    if tag not in constants.DOMAIN_TAGS:
        raise UnknownDomainTag(tag)
    return tag.encode("ascii")


def challenge_digest(tag: str, *fields: bytes) -> bytes:
    return sha256(length_prefixed(_check_tag(tag), *fields))


def derive_challenge(tag: str, *fields: bytes, q: int) -> int:
    """SHA-256 over the length-prefixed tag and fields, reduced mod q."""
    return int.from_bytes(challenge_digest(tag, *fields), "big") % q


def keyed_digest(tag: str, key: bytes, *fields: bytes) -> bytes:
    """HMAC-SHA256 under ``key`` of the length-prefixed tag and fields."""
    return hmac.new(key, length_prefixed(_check_tag(tag), *fields), hashlib.sha256).digest()


def deterministic_scalar(secret: int, q: int, *fields: bytes) -> int:
    """Nonce in [1, q-1] derived from a secret and the statement.

    Used where output must be reproducible from the same inputs (tally proofs).
    The SHAKE output is 128 bits wider than q so the bias of the reduction is
    negligible.
    """
    width = (q.bit_length() + 7) // 8
    h = hashlib.shake_256(length_prefixed(secret.to_bytes(width, "big"), *fields))
    return int.from_bytes(h.digest(width + 16), "big") % (q - 1) + 1
