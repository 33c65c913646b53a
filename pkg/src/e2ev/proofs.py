"""Non-interactive sigma protocols: disjunctive bit proofs and Chaum-Pedersen.

Every challenge is bound to a caller-supplied context (manifest hash plus the
ballot or tally coordinates), the statement and the full commitment set.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass

from . import constants
from .elgamal import Ciphertext, TrusteeShare, partial_decrypt
from .group import GroupError, GroupParams, Rng
from .hashing import deterministic_scalar, derive_challenge


@dataclass(frozen=True)
class BitProof:
    a0: int
    b0: int
    a1: int
    b1: int
    c0: int
    c1: int
    z0: int
    z1: int

    def to_json(self, params: GroupParams) -> dict:
        return {k: params.encode(v) for k, v in zip(constants.BIT_PROOF_FIELDS, astuple(self))}

    def to_bytes(self, params: GroupParams) -> bytes:
        return b"".join(params.to_bytes(v) for v in astuple(self))

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "BitProof":
        if not isinstance(obj, dict) or tuple(obj) != constants.BIT_PROOF_FIELDS:
            raise GroupError("bad bit proof object")
        elems = [params.decode_element(obj[k]) for k in ("a0", "b0", "a1", "b1")]
        scalars = [params.decode_scalar(obj[k]) for k in ("c0", "c1", "z0", "z1")]
        return cls(*elems, *scalars)


@dataclass(frozen=True)
class ChaumPedersenProof:
    """Proof that log_g(x) = log_h(y): commitments (t_g, t_h), challenge, response."""

    t_g: int
    t_h: int
    c: int
    z: int

    def to_json(self, params: GroupParams) -> dict:
        return {k: params.encode(v) for k, v in zip(constants.CP_PROOF_FIELDS, astuple(self))}

    def to_bytes(self, params: GroupParams) -> bytes:
        return b"".join(params.to_bytes(v) for v in astuple(self))

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "ChaumPedersenProof":
        if not isinstance(obj, dict) or tuple(obj) != constants.CP_PROOF_FIELDS:
            raise GroupError("bad Chaum-Pedersen proof object")
        return cls(
            params.decode_element(obj["t_g"]),
            params.decode_element(obj["t_h"]),
            params.decode_scalar(obj["c"]),
            params.decode_scalar(obj["z"]),
        )


DecryptionProof = ChaumPedersenProof
SumProof = ChaumPedersenProof


def _bit_challenge(params, pk, c, commitments, context):
    enc = params.to_bytes
    return derive_challenge(
        constants.TAG_BIT,
        context,
        enc(pk),
        enc(c.a),
        enc(c.b),
        *(enc(x) for x in commitments),
        q=params.q,
    )


def prove_bit(
    params: GroupParams, pk: int, c: Ciphertext, m: int, r: int, context: bytes, rng: Rng
) -> BitProof:
    """Prove that ``c`` encrypts 0 or 1, simulating the branch not taken."""
    if m not in (0, 1):
        raise ValueError("can only prove plaintexts 0 or 1")
    q = params.q
    s = 1 - m
    c_s = rng.randrange(q)
    z_s = rng.randrange(q)
    b_over_gs = params.div(c.b, params.gpow(s))
    sim = (
        params.mul(params.gpow(z_s), params.pow(c.a, -c_s)),
        params.mul(params.pow(pk, z_s), params.pow(b_over_gs, -c_s)),
    )
    w = params.random_scalar(rng)
    real = (params.gpow(w), params.pow(pk, w))
    a0, b0 = real if m == 0 else sim
    a1, b1 = sim if m == 0 else real
    ch = _bit_challenge(params, pk, c, (a0, b0, a1, b1), context)
    c_m = (ch - c_s) % q
    z_m = (w + c_m * r) % q
    if m == 0:
        return BitProof(a0, b0, a1, b1, c_m, c_s, z_m, z_s)
    return BitProof(a0, b0, a1, b1, c_s, c_m, z_s, z_m)


def _scalars_in_range(params: GroupParams, *xs: int) -> bool:
    # Without this, c + q or z + q would verify as well: malleable.
    return all(0 <= x < params.q for x in xs)


def verify_bit(params: GroupParams, pk: int, c: Ciphertext, proof: BitProof, context: bytes) -> bool:
    if not _scalars_in_range(params, proof.c0, proof.c1, proof.z0, proof.z1):
        return False
    ch = _bit_challenge(params, pk, c, (proof.a0, proof.b0, proof.a1, proof.b1), context)
    if (proof.c0 + proof.c1) % params.q != ch:
        return False
    for j, (aj, bj, cj, zj) in enumerate(
        ((proof.a0, proof.b0, proof.c0, proof.z0), (proof.a1, proof.b1, proof.c1, proof.z1))
    ):
        if params.gpow(zj) != params.mul(aj, params.pow(c.a, cj)):
            return False
        b_over_gj = c.b if j == 0 else params.div(c.b, params.g)
        if params.pow(pk, zj) != params.mul(bj, params.pow(b_over_gj, cj)):
            return False
    return True


def _cp_challenge(tag, params, h, x, y, t_g, t_h, context):
    enc = params.to_bytes
    return derive_challenge(tag, context, enc(h), enc(x), enc(y), enc(t_g), enc(t_h), q=params.q)


def prove_equal_logs(
    tag: str, params: GroupParams, h: int, x: int, y: int, secret: int, context: bytes, w: int
) -> ChaumPedersenProof:
    """Prove x = g^secret and y = h^secret with commitment nonce ``w``."""
    t_g, t_h = params.gpow(w), params.pow(h, w)
    c = _cp_challenge(tag, params, h, x, y, t_g, t_h, context)
    return ChaumPedersenProof(t_g, t_h, c, (w + c * secret) % params.q)


def verify_equal_logs(
    tag: str, params: GroupParams, h: int, x: int, y: int, proof: ChaumPedersenProof, context: bytes
) -> bool:
    if not _scalars_in_range(params, proof.c, proof.z):
        return False
    if proof.c != _cp_challenge(tag, params, h, x, y, proof.t_g, proof.t_h, context):
        return False
    return params.gpow(proof.z) == params.mul(proof.t_g, params.pow(x, proof.c)) and params.pow(
        h, proof.z
    ) == params.mul(proof.t_h, params.pow(y, proof.c))


def prove_sum(
    params: GroupParams, pk: int, total: Ciphertext, r_sum: int, context: bytes, rng: Rng
) -> SumProof:
    """Prove ``total`` encrypts exactly 1 using the summed randomness."""
    y = params.div(total.b, params.g)
    return prove_equal_logs(
        constants.TAG_SUM, params, pk, total.a, y, r_sum, context, params.random_scalar(rng)
    )


def verify_sum(params: GroupParams, pk: int, total: Ciphertext, proof: SumProof, context: bytes) -> bool:
    y = params.div(total.b, params.g)
    return verify_equal_logs(constants.TAG_SUM, params, pk, total.a, y, proof, context)


def decrypt_share(
    params: GroupParams, share: TrusteeShare, c: Ciphertext, context: bytes
) -> tuple[int, DecryptionProof]:
    """Partial decryption a^sk_i with a proof that log_g(pk_i) = log_a(a^sk_i).

    The proof nonce is derived from the share and the statement, so identical
    inputs give byte-identical output.
    """
    partial = partial_decrypt(params, share, c)
    pk_i = share.public(params)
    enc = params.to_bytes
    w = deterministic_scalar(share.sk, params.q, context, enc(c.a), enc(c.b))
    proof = prove_equal_logs(constants.TAG_DEC, params, c.a, pk_i, partial, share.sk, context, w)
    return partial, proof


def verify_decryption(
    params: GroupParams, pk_i: int, c: Ciphertext, partial: int, proof: DecryptionProof, context: bytes
) -> bool:
    return verify_equal_logs(constants.TAG_DEC, params, c.a, pk_i, partial, proof, context)
