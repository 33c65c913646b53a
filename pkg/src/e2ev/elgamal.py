"""Exponential ElGamal over a safe-prime subgroup, with additive n-of-n keys."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import constants
from .group import GroupError, GroupParams, Rng


class CombineError(ValueError):
    """Partial decryptions cannot be combined (missing or rejected shares)."""


@dataclass(frozen=True)
class TrusteeShare:
    index: int
    sk: int

    def public(self, params: GroupParams) -> int:
        return params.gpow(self.sk)


@dataclass(frozen=True)
class Ciphertext:
    a: int
    b: int

    def to_json(self, params: GroupParams) -> dict:
        return {"a": params.encode(self.a), "b": params.encode(self.b)}

    def to_bytes(self, params: GroupParams) -> bytes:
        return params.to_bytes(self.a) + params.to_bytes(self.b)

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "Ciphertext":
        if not isinstance(obj, dict) or tuple(obj) != constants.CIPHERTEXT_FIELDS:
            raise GroupError("bad ciphertext object")
        return cls(params.decode_element(obj["a"]), params.decode_element(obj["b"]))


IDENTITY = Ciphertext(1, 1)


def keygen(
    params: GroupParams,
    n_trustees: int,
    rng: Rng | None = None,
    secrets: Sequence[int] | None = None,
) -> tuple[int, list[TrusteeShare]]:
    """Split a fresh election key into ``n_trustees`` additive shares.

    ``secrets`` forces the share values (tests and key ceremonies replayed
    from a transcript).  Returns the joint public key and the shares.
    """
    if n_trustees < 1:
        raise ValueError("n_trustees must be >= 1")
    params.validate()
    if secrets is None:
        if rng is None:
            raise ValueError("rng required when secrets are not given")
        while True:
            secrets = [params.random_scalar(rng) for _ in range(n_trustees)]
            if sum(secrets) % params.q:
                break
    if len(secrets) != n_trustees:
        raise ValueError("one secret per trustee")
    for s in secrets:
        if not 1 <= s < params.q:
            raise ValueError("share out of range [1, q-1]")
    if sum(secrets) % params.q == 0:
        raise ValueError("shares sum to zero; public key would be the identity")
    shares = [TrusteeShare(i, s) for i, s in enumerate(secrets)]
    pk = 1
    for s in shares:
        pk = params.mul(pk, s.public(params))
    return pk, shares


def encrypt_bit(params: GroupParams, pk: int, m: int, r: int) -> Ciphertext:
    """Encrypt m in {0, 1} as (g^r, g^m pk^r)."""
    if m not in (0, 1):
        raise ValueError("plaintext must be 0 or 1")
    if not 1 <= r < params.q:
        raise ValueError("randomness out of range [1, q-1]")
    return encrypt_exponent(params, pk, m, r)


def encrypt_exponent(params: GroupParams, pk: int, m: int, r: int) -> Ciphertext:
    """Unchecked exponential encryption; used to build adversarial inputs."""
    return Ciphertext(params.gpow(r), params.mul(params.gpow(m), params.pow(pk, r)))


def homomorphic_add(params: GroupParams, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    for x in (c1.a, c1.b, c2.a, c2.b):
        if not params.is_member(x):
            raise GroupError("ciphertext component outside the subgroup")
    return Ciphertext(params.mul(c1.a, c2.a), params.mul(c1.b, c2.b))


def homomorphic_sum(params: GroupParams, cts: Iterable[Ciphertext]) -> Ciphertext:
    a = b = 1
    for c in cts:
        a = a * c.a % params.p
        b = b * c.b % params.p
    return Ciphertext(a, b)


def partial_decrypt(params: GroupParams, share: TrusteeShare, c: Ciphertext) -> int:
    return params.pow(c.a, share.sk)


def combine_shares(params: GroupParams, c: Ciphertext, partials: Sequence[int | None], n_trustees: int) -> int:
    """Return g^m = b / prod(partials).  All n trustees must be present."""
    if len(partials) != n_trustees or any(x is None for x in partials):
        raise CombineError("every trustee's partial decryption is required")
    denom = 1
    for x in partials:
        denom = params.mul(denom, x)
    return params.div(c.b, denom)


def recover_exponent(params: GroupParams, y: int, bound: int) -> int | None:
    """Smallest m in [0, bound] with g^m = y, else None.

    Linear scan up to ``LINEAR_SCAN_LIMIT``, baby-step/giant-step above it.
    """
    if bound < 0:
        raise ValueError("bound must be >= 0")
    if bound <= constants.LINEAR_SCAN_LIMIT:
        return _linear_log(params, y, bound)
    return _bsgs_log(params, y, bound)


def _linear_log(params: GroupParams, y: int, bound: int) -> int | None:
    acc = 1
    for m in range(bound + 1):
        if acc == y:
            return m
        acc = acc * params.g % params.p
    return None


def _bsgs_log(params: GroupParams, y: int, bound: int) -> int | None:
    step = math.isqrt(bound) + 1
    baby = {}
    acc = 1
    for j in range(step):
        baby.setdefault(acc, j)
        acc = acc * params.g % params.p
    giant = params.inv(params.pow(params.g, step))
    gamma = y
    for i in range(step + 1):
        j = baby.get(gamma)
        if j is not None:
            m = i * step + j
            return m if m <= bound else None
        gamma = gamma * giant % params.p
    return None
