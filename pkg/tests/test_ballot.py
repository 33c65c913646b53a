import json
import random
from dataclasses import replace

import pytest

from e2ev import constants
from e2ev.ballot import (
    BallotRandomness,
    ElectionManifest,
    EncryptedBallot,
    ManifestError,
    PlainBallot,
    bit_context,
    encrypt_ballot,
    open_ballot,
    sum_context,
    verify_ballot,
)
from e2ev.elgamal import encrypt_bit, encrypt_exponent, keygen
from e2ev.group import GroupParams
from e2ev.proofs import prove_bit, prove_sum
from e2ev.signature import SigningKey


def make_manifest(params, rng, n_candidates=3, receipt_mode="signed"):
    pk, shares = keygen(params, 2, rng)
    dev, auth = SigningKey.generate(params, rng), SigningKey.generate(params, rng)
    m = ElectionManifest.create(
        "e1",
        [f"C{i}" for i in range(n_candidates)],
        params,
        pk,
        [s.public(params) for s in shares],
        dev.pk,
        auth.pk,
        bytes(32),
        receipt_mode,
    )
    return m.prepare(), shares


@pytest.fixture(scope="module")
def manifest():
    return make_manifest(GroupParams.toy(), random.Random(2))[0]


def test_manifest_roundtrip_and_hash(manifest):
    data = manifest.to_bytes()
    assert ElectionManifest.from_bytes(data) == manifest
    assert ElectionManifest.from_bytes(data + b"\n") == manifest
    obj = json.loads(data)
    assert tuple(obj) == constants.MANIFEST_FIELDS


@pytest.mark.parametrize(
    "field,value",
    [
        ("candidates", ["only"]),
        ("candidates", ["A", "A"]),
        ("receipt_mode", "printed"),
        ("hash_alg", "md5"),
        ("election_id", "other"),
    ],
)
def test_manifest_tamper_rejected(manifest, field, value):
    obj = manifest.to_json()
    obj[field] = value
    with pytest.raises(ManifestError):
        ElectionManifest.from_json(obj)


def test_manifest_rejects_wrong_joint_key(manifest):
    obj = manifest.to_json()
    params = manifest.params
    obj["election_pk"] = params.encode(params.mul(manifest.election_pk, params.g))
    with pytest.raises(ManifestError):
        ElectionManifest.from_json(obj)


def test_manifest_rejects_noncanonical_bytes(manifest):
    with pytest.raises(ManifestError):
        ElectionManifest.from_bytes(json.dumps(manifest.to_json(), indent=1).encode())


def test_plain_ballot_vector(manifest):
    assert PlainBallot(1).vector(3) == [0, 1, 0]
    for bad in (-1, 3):
        with pytest.raises(ValueError):
            PlainBallot(bad).check(manifest)


def test_encrypt_ballot_plaintext_vector(manifest):
    rng = random.Random(4)
    eb, rnd = encrypt_ballot(manifest, PlainBallot(1), rng)
    params, pk = manifest.params, manifest.election_pk
    assert [encrypt_bit(params, pk, m, r) for m, r in zip((0, 1, 0), rnd.rs)] == list(eb.ciphertexts)
    assert rnd.total(params.q) == sum(rnd.rs) % params.q
    assert verify_ballot(manifest, eb)
    assert verify_ballot(manifest, eb.to_json(params))
    assert verify_ballot(manifest, json.dumps(eb.to_json(params)).encode())


def test_fresh_randomness_distinct_hashes(manifest):
    rng = random.Random(4)
    a, _ = encrypt_ballot(manifest, PlainBallot(2), rng)
    b, _ = encrypt_ballot(manifest, PlainBallot(2), rng)
    assert a.ballot_hash != b.ballot_hash


def test_ballot_json_roundtrip(manifest):
    params = manifest.params
    eb, _ = encrypt_ballot(manifest, PlainBallot(0), random.Random(1))
    assert EncryptedBallot.from_json(params, eb.to_json(params)) == eb
    assert tuple(eb.to_json(params)) == constants.BALLOT_FIELDS


def _crafted(manifest, bits, rng):
    """Ballot with arbitrary plaintext vector, honest-looking proofs where possible."""
    params, pk = manifest.params, manifest.election_pk
    nonce = rng.randbytes(16)
    rs = [params.random_scalar(rng) for _ in bits]
    cts = [encrypt_exponent(params, pk, m, r) for m, r in zip(bits, rs)]
    bps = []
    for i, (c, m, r) in enumerate(zip(cts, bits, rs)):
        ctx = bit_context(manifest.manifest_hash, nonce, i)
        bps.append(prove_bit(params, pk, c, m if m in (0, 1) else 1, r, ctx, rng))
    total = cts[0]
    for c in cts[1:]:
        total = type(c)(total.a * c.a % params.p, total.b * c.b % params.p)
    sp = prove_sum(params, pk, total, sum(rs) % params.q, sum_context(manifest.manifest_hash, nonce), rng)
    eb = EncryptedBallot(nonce, tuple(cts), tuple(bps), sp, b"")
    return replace(eb, ballot_hash=eb.compute_hash(params))


def test_two_selections_fail_sum_proof(manifest):
    eb = _crafted(manifest, (1, 1, 0), random.Random(8))
    assert verify_ballot(manifest, eb) == (False, "sum-proof")


def test_exactly_one_soundness_fuzz(manifest):
    rng = random.Random(10)
    vectors = [(0, 0, 0), (1, 1, 0), (1, 1, 1), (0, 2, 0), (2, 0, 0), (0, 1, 1)]
    accepted = 0
    for k in range(1000):
        bits = vectors[k % len(vectors)]
        accepted += bool(verify_ballot(manifest, _crafted(manifest, bits, rng)))
    assert accepted == 0


def test_proof_byte_flip_names_the_bit_proof(manifest):
    params = manifest.params
    eb, _ = encrypt_ballot(manifest, PlainBallot(2), random.Random(3))
    for i in range(3):
        for field in constants.BIT_PROOF_FIELDS:
            obj = eb.to_json(params)
            h = obj["bit_proofs"][i][field]
            obj["bit_proofs"][i][field] = h[:-1] + ("0" if h[-1] != "0" else "1")
            check = verify_ballot(manifest, obj)
            assert check.reason in (f"bit-proof[{i}]", "decode")


def test_ciphertext_flip_names_a_proof(manifest):
    params = manifest.params
    eb, _ = encrypt_ballot(manifest, PlainBallot(0), random.Random(3))
    obj = eb.to_json(params)
    a = params.decode_element(obj["ciphertexts"][1]["a"])
    obj["ciphertexts"][1]["a"] = params.encode(params.mul(a, params.g))
    assert verify_ballot(manifest, obj) == (False, "bit-proof[1]")


def test_hash_mismatch_and_decode_and_count(manifest):
    params = manifest.params
    eb, _ = encrypt_ballot(manifest, PlainBallot(0), random.Random(3))
    obj = eb.to_json(params)
    obj["ballot_hash"] = "00" * 32
    assert verify_ballot(manifest, obj) == (False, "ballot-hash")
    assert verify_ballot(manifest, b"{not json") == (False, "decode")
    obj = eb.to_json(params)
    obj["ciphertexts"] = obj["ciphertexts"][:2]
    obj["bit_proofs"] = obj["bit_proofs"][:2]
    assert verify_ballot(manifest, obj).reason in ("candidate-count", "decode")


def test_open_ballot(manifest):
    rng = random.Random(12)
    eb, rnd = encrypt_ballot(manifest, PlainBallot(1), rng)
    assert open_ballot(manifest, eb, rnd, PlainBallot(1))
    assert not open_ballot(manifest, eb, rnd, PlainBallot(2))
    cheat, crnd = encrypt_ballot(manifest, PlainBallot(1), rng, encrypt_as=2)
    assert verify_ballot(manifest, cheat)
    assert not open_ballot(manifest, cheat, crnd, PlainBallot(1))
    assert not open_ballot(manifest, eb, BallotRandomness(rnd.rs[:2]), PlainBallot(1))
    assert not open_ballot(manifest, eb, rnd, PlainBallot(7))


def test_opening_soundness_random_mismatches(manifest):
    rng = random.Random(13)
    params = manifest.params
    eb, rnd = encrypt_ballot(manifest, PlainBallot(0), rng)
    false_consistent = 0
    for k in range(10_000):
        rs = list(rnd.rs)
        rs[k % 3] = params.random_scalar(rng)
        claim = PlainBallot(rng.randrange(3))
        if rs == list(rnd.rs) and claim.selection == 0:
            continue
        false_consistent += open_ballot(manifest, eb, BallotRandomness(tuple(rs)), claim)
    assert false_consistent == 0


def test_production_ballot():
    params = GroupParams.production()
    m, _ = make_manifest(params, random.Random(6))
    eb, rnd = encrypt_ballot(m, PlainBallot(2), random.Random(6))
    assert verify_ballot(m, eb)
    assert open_ballot(m, eb, rnd, PlainBallot(2))
