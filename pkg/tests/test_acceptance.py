"""Acceptance run: one PASS/FAIL line per criterion.

    pytest tests/test_acceptance.py -v -s
"""

import json
import random
import time

import numpy as np
import pytest

from e2ev import constants
from e2ev.dispute import Outcome, Receipt, adjudicate, receipt_signature_valid
from e2ev.elgamal import encrypt_bit, encrypt_exponent, keygen
from e2ev.election import Election
from e2ev.group import GroupParams
from e2ev.proofs import BitProof, ChaumPedersenProof, decrypt_share, prove_bit, verify_bit, verify_decryption
from e2ev.signature import Signature
from e2ev.sim import SimConfig, SweepConfig, defamation_pipeline, estimate_defamation, estimate_detection, sweep
from e2ev.verifier import verify_election

from conftest import build_election, fuzzed_claims
from test_verifier import _run_verifier, _standalone


@pytest.fixture
def report(capsys):
    def emit(n: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {title} ({detail})")
        assert ok, detail

    return emit


def test_criterion_1_production_lifecycle(report):
    t0 = time.perf_counter()
    r = random.Random(1)
    el = Election.setup("lifecycle", ["A", "B", "C"], GroupParams.production(), n_trustees=3, rng=r)
    dev = el.device(rng=r)
    truth = [0, 0, 0]
    for _ in range(100):
        sel = r.randrange(3)
        truth[sel] += 1
        s, _ = dev.begin(sel)
        dev.finalize_cast(s, el.board)
    el.finish(r)
    rep = verify_election(el.manifest_bytes(), el.board_bytes())
    elapsed = time.perf_counter() - t0
    ok = rep.verdict == "PASS" and rep.counts == truth and elapsed < 60
    report(1, "2048-bit 100-voter lifecycle", ok, f"verdict {rep.verdict}, counts {rep.counts} vs {truth}, {elapsed:.1f}s")


def _entry_of_offset(board: bytes) -> list[int]:
    """Line index (= seq) for every byte of the board file."""
    out, seq = [], 0
    for b in board:
        out.append(seq)
        seq += b == 0x0A
    return out


def test_criterion_2_single_tamper_detection(report):
    el, _ = build_election(GroupParams.toy(), [0, 1, 2, 0, 1, 2], challenges=[1], seed=7)
    mb, bb = el.manifest_bytes(), el.board_bytes()
    assert len(el.board) == 10
    assert verify_election(mb, bb).verdict == "PASS"
    owner = _entry_of_offset(bb)
    t0 = time.perf_counter()
    decoded = undecodable = misses = 0
    for which, data in (("manifest", mb), ("board", bb)):
        for i in range(len(data)):
            for bit in range(8):
                m = bytearray(data)
                m[i] ^= 1 << bit
                args = (bytes(m), bb) if which == "manifest" else (mb, bytes(m))
                rep = verify_election(*args)
                if rep.decode_error:
                    undecodable += 1
                    continue
                decoded += 1
                f = rep.first_failure()
                target = 0 if which == "manifest" else owner[i]
                if f is None or f.seq != target:
                    misses += 1
    elapsed = time.perf_counter() - t0
    ok = misses == 0 and elapsed < 600
    report(2, "every decodable single-bit mutation located", ok,
           f"{decoded} decoded, {undecodable} rejected at decode, {misses} misses, {elapsed:.0f}s")


def test_criterion_3_challenge_detection(report):
    est = estimate_detection(SimConfig(n_voters=100, q=0.2, f=0.1, trials=10_000, seed=3))
    zero = estimate_detection(SimConfig(n_voters=100, q=0.0, f=0.1, trials=10_000, seed=3))
    ok = abs(est.empirical - 0.867) <= 0.03 and zero.empirical == 0.0
    report(3, "detection at N=100 q=0.2 f=0.1", ok,
           f"empirical {est.empirical:.4f}, analytic {est.analytic:.4f}, q=0 gives {zero.empirical}")


def test_criterion_4_small_q(report):
    rows = sweep(SweepConfig(N=(1000,), q=(0.05,), f=(0.05,), trials=10_000, seed=4))
    ana, emp = float(rows[0]["analytic_challenge"]), float(rows[0]["empirical_challenge"])
    ok = ana >= 0.9 and emp >= 0.9 and abs(ana - 0.918) < 5e-4
    report(4, "sweep row N=1000 q=0.05 f=0.05", ok, f"analytic {ana:.4f}, empirical {emp:.4f}")


def test_criterion_5_defamation_odds(report):
    est = estimate_defamation(1000, 10_000, seed=5)
    el, _ = build_election(GroupParams.toy(), [0, 1, 2, 1], seed=5, receipt_mode=constants.RECEIPT_CODE_ONLY)
    r = random.Random(5)
    pipe = float(np.mean([defamation_pipeline(el, 1000, r) for _ in range(200)]))
    ok = abs(est.mean - 1000 / 676) <= 0.3 and abs(pipe - 1000 / 676) <= 0.3
    report(5, "1000 guessed codes", ok, f"kernel mean {est.mean:.3f}, pipeline mean {pipe:.3f}, expected {1000 / 676:.3f}")


def test_criterion_6_proof_soundness(report):
    toy = GroupParams.toy()
    r = random.Random(6)
    pk, shares = keygen(toy, 2, r)
    ctx = bytes(32)
    forged_bit = forged_dec = 0
    honest_bit = honest_dec = 0
    pk0 = shares[0].public(toy)
    for _ in range(1000):
        c = encrypt_exponent(toy, pk, 2, toy.random_scalar(r))
        c0, c1, z0, z1 = (toy.random_scalar(r) for _ in range(4))
        a0 = toy.mul(toy.gpow(z0), toy.pow(c.a, -c0))
        b0 = toy.mul(toy.pow(pk, z0), toy.pow(c.b, -c0))
        a1 = toy.mul(toy.gpow(z1), toy.pow(c.a, -c1))
        b1 = toy.mul(toy.pow(pk, z1), toy.pow(toy.div(c.b, toy.g), -c1))
        forged_bit += verify_bit(toy, pk, c, BitProof(a0, b0, a1, b1, c0, c1, z0, z1), ctx)

        cd = encrypt_bit(toy, pk, 1, toy.random_scalar(r))
        lie = toy.gpow(toy.random_scalar(r))
        ch, z = toy.random_scalar(r), toy.random_scalar(r)
        t_g = toy.mul(toy.gpow(z), toy.pow(pk0, -ch))
        t_h = toy.mul(toy.pow(cd.a, z), toy.pow(lie, -ch))
        forged_dec += verify_decryption(toy, pk0, cd, lie, ChaumPedersenProof(t_g, t_h, ch, z), ctx)

        m, rr = r.randrange(2), toy.random_scalar(r)
        cb = encrypt_bit(toy, pk, m, rr)
        honest_bit += verify_bit(toy, pk, cb, prove_bit(toy, pk, cb, m, rr, ctx, r), ctx)
        partial, proof = decrypt_share(toy, shares[0], cb, ctx)
        honest_dec += verify_decryption(toy, pk0, cb, partial, proof, ctx)

    el, receipts = build_election(toy, [0, 1, 2], seed=6)
    mb, bb = el.manifest_bytes(), el.board_bytes()
    forged_rc = honest_rc = 0
    for i in range(1000):
        base = receipts[i % 3]
        if i % 2:
            fake = Receipt(base.ballot_hash, base.return_code, Signature(toy.random_scalar(r), toy.random_scalar(r)))
        else:
            fake = Receipt(r.randbytes(32), base.return_code, base.signature)
        forged_rc += receipt_signature_valid(el.manifest, fake)
        forged_rc += verify_election(mb, bb, fake.to_bytes(toy)).receipt != "SignatureInvalid"
        honest_rc += receipt_signature_valid(el.manifest, base)
    ok = forged_bit == forged_dec == forged_rc == 0 and honest_bit == honest_dec == honest_rc == 1000
    report(6, "proof and receipt soundness", ok,
           f"forged accepted: bit {forged_bit}, decryption {forged_dec}, receipt {forged_rc}; "
           f"honest accepted: {honest_bit}, {honest_dec}, {honest_rc} of 1000")


def test_criterion_7_verifier_independence(report, tmp_path):
    el, receipts = build_election(GroupParams.toy(), [0, 2, 2], challenges=[0], seed=8)
    root = _standalone(tmp_path)
    files = {"manifest": el.manifest_bytes(), "board": el.board_bytes(), "receipt": receipts[0].to_bytes(el.manifest.params)}
    for name, data in files.items():
        (tmp_path / f"{name}.in").write_bytes(data)
    outs, codes = [], []
    for seed in ("1", "4242", "1", "4242"):
        out = tmp_path / f"report-{len(outs)}.json"
        args = [f"--{n}" if k % 2 == 0 else str(tmp_path / f"{n}.in") for n in files for k in range(2)]
        proc = _run_verifier(root, args + ["--report", str(out)], seed)
        codes.append(proc.returncode)
        outs.append(out.read_bytes() if out.exists() else b"")
    modules = sorted(p.relative_to(root).as_posix() for p in root.rglob("*.py"))
    ok = codes == [0] * 4 and len(set(outs)) == 1 and json.loads(outs[0])["verdict"] == "PASS"
    report(7, "standalone verifier, byte-identical reports", ok, f"exit codes {codes}, modules {modules}")


def test_criterion_8_exoneration(report):
    el, receipts = build_election(GroupParams.toy(), [0, 1, 2, 0, 1, 2, 0], challenges=[2], seed=9)
    snap = el.board.snapshot()
    outcomes = {o: 0 for o in Outcome}
    for claim in fuzzed_claims(el, receipts, 10_000, random.Random(9)):
        outcomes[adjudicate(claim, snap).outcome] += 1
    ok = outcomes[Outcome.UPHELD] == 0
    report(8, "10^4 unobserved false claims", ok, ", ".join(f"{k.value} {v}" for k, v in outcomes.items()))
