"""Serialization constants and format definitions.

This is the only module the standalone verifier shares with the rest of the
toolkit.  It must stay free of imports from the package so that a third party
can copy it next to ``e2ev/verifier`` and build the verifier from nothing else.
"""

HASH_ALG = "sha256"

# Fiat-Shamir / signature / return-code domain separation registry.
TAG_BIT = "e2ev/bit/v1"
TAG_SUM = "e2ev/sum/v1"
TAG_DEC = "e2ev/dec/v1"
TAG_SIG = "e2ev/sig/v1"
TAG_CODE = "e2ev/code/v1"
DOMAIN_TAGS = (TAG_BIT, TAG_SUM, TAG_DEC, TAG_SIG, TAG_CODE)

# Board entry kinds and the tag byte mixed into each entry hash.
KIND_MANIFEST = "Manifest"
KIND_CAST = "CastBallot"
KIND_CHALLENGED = "ChallengedBallot"
KIND_TALLY = "TallyArtifact"
KIND_CLOSE = "Close"
KIND_TAGS = {
    KIND_MANIFEST: 0,
    KIND_CAST: 1,
    KIND_CHALLENGED: 2,
    KIND_TALLY: 3,
    KIND_CLOSE: 4,
}

GENESIS_PREV_HASH = bytes(32)
BALLOT_NONCE_BYTES = 16
CODE_KEY_BYTES = 32

# Two-letter return codes over A-Z.
CODE_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
CODE_LENGTH = 2
CODE_SPACE = len(CODE_ALPHABET) ** CODE_LENGTH

RECEIPT_SIGNED = "signed"
RECEIPT_CODE_ONLY = "code"
RECEIPT_MODES = (RECEIPT_SIGNED, RECEIPT_CODE_ONLY)

# Fixed JSON field orders.  Every published object is compact JSON
# (separators "," and ":"), ASCII only, with keys in exactly this order.
ENTRY_FIELDS = ("seq", "prev_hash", "kind", "payload", "entry_hash")
GROUP_FIELDS = ("p", "q", "g")
MANIFEST_FIELDS = (
    "election_id",
    "candidates",
    "group",
    "election_pk",
    "trustee_pks",
    "device_pk",
    "authority_pk",
    "code_key_commitment",
    "receipt_mode",
    "hash_alg",
    "manifest_hash",
)
CIPHERTEXT_FIELDS = ("a", "b")
BIT_PROOF_FIELDS = ("a0", "b0", "a1", "b1", "c0", "c1", "z0", "z1")
CP_PROOF_FIELDS = ("t_g", "t_h", "c", "z")
SIGNATURE_FIELDS = ("c", "z")
BALLOT_FIELDS = ("nonce", "ciphertexts", "bit_proofs", "sum_proof", "ballot_hash")
CHALLENGE_FIELDS = ("ballot", "randomness", "claimed")
PARTIAL_FIELDS = ("trustee", "partial", "proof")
TALLY_FIELDS = ("aggregates", "partials", "counts", "total_cast")
CLOSE_FIELDS = ("entry_count", "code_key", "signature")
RECEIPT_FIELDS = ("ballot_hash", "return_code", "signature")
CLAIM_FIELDS = ("receipt", "kind", "observed_issuance")
REPORT_FIELDS = ("verdict", "checks", "counts", "receipt")
CHECK_FIELDS = ("check", "ok", "reason", "seq", "field", "expected", "found")

# Fixed check order; two conforming verifiers report the same first failure.
CHECK_ORDER = (
    "decode",
    "chain",
    "manifest",
    "ballot",
    "challenge",
    "aggregate",
    "decryption",
    "count",
    "total",
)

# Signed messages are the concatenation of these parts (see signature.py).
CLOSE_MESSAGE_PREFIX = b"e2ev/close"
RECEIPT_MESSAGE_PREFIX = b"e2ev/receipt"

# 32-bit safe prime for exhaustive tests and sweeps: largest p < 2**32 with
# p = 2q + 1, q prime.  g = 4 is a square, hence generates the order-q subgroup.
TOY_GROUP = {"p": 0xFFFFFF2F, "q": 0x7FFFFF97, "g": 4}

# 2048-bit MODP safe prime (RFC 3526 group 14).  p = 7 mod 8, so 2 is a
# square and generates the order-q subgroup.
PRODUCTION_GROUP = {
    "p": int(
        "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
        "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
        "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
        "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
        "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
        "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
        "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
        "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
        "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
        "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
        "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
        16,
    ),
    "q": None,
    "g": 2,
}
PRODUCTION_GROUP["q"] = (PRODUCTION_GROUP["p"] - 1) // 2

# Exponent recovery switches from a linear scan to baby-step/giant-step above this.
LINEAR_SCAN_LIMIT = 10**6
