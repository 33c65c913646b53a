"""Adversarial election simulator: single full-pipeline trials and Monte Carlo estimates."""

from __future__ import annotations

import csv
import io
import itertools
import json
import random
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from .. import constants
from ..ballot import BallotRandomness, PlainBallot, open_ballot
from ..device import DeviceConfig
from ..dispute import ClaimKind, DisputeClaim, Outcome, Receipt, adjudicate
from ..election import Election
from ..group import GroupParams
from ..verifier import verify_election
from . import kernels
from ._jit import BACKEND

CHANNEL_CHALLENGE = "challenge-mismatch"
CHANNEL_RECEIPT = "receipt-missing"
CHANNEL_VERIFIER = "verifier-fail"
CHANNELS = (CHANNEL_CHALLENGE, CHANNEL_RECEIPT, CHANNEL_VERIFIER)

CSV_COLUMNS = (
    "N",
    "q",
    "rho",
    "f",
    "d",
    "trials",
    "analytic_challenge",
    "empirical_challenge",
    "analytic_receipt",
    "empirical_receipt",
)


def _seed_for(seed: int, *index: int) -> int:
    """Independent 32-bit child seed for a trial or sweep cell."""
    return int(np.random.SeedSequence([seed, *index]).generate_state(1)[0])


@dataclass(frozen=True)
class SimConfig:
    n_voters: int = 100
    n_candidates: int = 3
    q: float = 0.0
    rho: float = 0.0
    f: float = 0.0
    d: float = 0.0
    trials: int = 1000
    seed: int = 0
    group: str = "toy"
    n_trustees: int = 2
    method: str = "kernel"

    def __post_init__(self):
        for name in ("q", "rho", "f", "d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.n_voters < 1:
            raise ValueError("n_voters must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n_candidates < 2:
            raise ValueError("n_candidates must be >= 2")
        if self.method not in ("kernel", "pipeline"):
            raise ValueError(f"method must be 'kernel' or 'pipeline', got {self.method!r}")

    @classmethod
    def from_dict(cls, obj: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def analytic_challenge(self) -> float:
        return 1.0 - (1.0 - self.q * self.f) ** self.n_voters

    def analytic_receipt(self) -> float:
        return 1.0 - (1.0 - self.rho * self.d) ** self.n_voters


@dataclass(frozen=True)
class SimOutcome:
    """One simulated election.  ``tally_error`` counts votes shifted plus votes lost."""

    channels: tuple[str, ...]
    verdict: str
    counts: tuple[int, ...] | None
    truth: tuple[int, ...]
    challenged: int
    caught: int
    receipt_alarms: int
    flipped: int
    dropped: int
    votes_shifted: int
    votes_lost: int

    @property
    def detected(self) -> bool:
        return bool(self.channels)

    @property
    def tally_error(self) -> int:
        return self.votes_shifted + self.votes_lost

    def to_json(self) -> dict:
        return {**asdict(self), "detected": self.detected, "tally_error": self.tally_error}

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_json(), separators=(",", ":"), sort_keys=True).encode() + b"\n"


def _recorded_choice(params: GroupParams, sk: int, ballot_obj: dict) -> int:
    """Index whose ciphertext decrypts to 1 (-1 if none do)."""
    for i, c in enumerate(ballot_obj["ciphertexts"]):
        a, b = params.decode_element(c["a"]), params.decode_element(c["b"])
        if params.div(b, params.pow(a, sk)) == params.g:
            return i
    return -1


def run_election(config: SimConfig, seed: int) -> SimOutcome:
    """Set up, vote, tally, close and verify one election with a possibly cheating device.

    Each voter's device commits to an encryption before the voter's
    challenge coin is drawn, so the device cannot condition on it.
    """
    params = GroupParams.named(config.group)
    crypto_rng = random.Random(_seed_for(seed, 0))
    voter_rng = random.Random(_seed_for(seed, 1))
    el = Election.setup(
        f"sim-{seed}",
        [f"C{i}" for i in range(config.n_candidates)],
        params,
        n_trustees=config.n_trustees,
        rng=crypto_rng,
    )
    device = el.device(DeviceConfig(cheat_rate=config.f, drop_rate=config.d), rng=crypto_rng)

    truth = [0] * config.n_candidates
    intent: dict[bytes, int] = {}
    channels: set[str] = set()
    challenged = caught = alarms = flipped = dropped = 0
    for _ in range(config.n_voters):
        selection = voter_rng.randrange(config.n_candidates)
        truth[selection] += 1
        session, _ = device.begin(selection)
        if voter_rng.random() < config.q:
            challenged += 1
            rnd = BallotRandomness(session.randomness.rs)
            record = device.finalize_challenge(session, el.board)
            if not open_ballot(el.manifest, record.ballot, rnd, PlainBallot(selection)):
                caught += 1
                channels.add(CHANNEL_CHALLENGE)
            session, _ = device.begin(selection)
        receipt = device.finalize_cast(session, el.board)
        if session.dropped:
            dropped += 1
        else:
            intent[receipt.ballot_hash] = selection
            flipped += session.cheated
        if voter_rng.random() < config.rho and el.board.lookup(receipt.ballot_hash) is None:
            alarms += 1
            channels.add(CHANNEL_RECEIPT)

    artifact = el.finish(crypto_rng)
    report = verify_election(el.manifest_bytes(), el.board_bytes())
    if report.verdict != "PASS":
        channels.add(CHANNEL_VERIFIER)

    sk = sum(s.sk for s in el.secrets.shares) % params.q
    shifted = 0
    for e in el.board.snapshot().entries_of(constants.KIND_CAST):
        obj = e.payload_json()
        if _recorded_choice(params, sk, obj) != intent[bytes.fromhex(obj["ballot_hash"])]:
            shifted += 1
    return SimOutcome(
        tuple(c for c in CHANNELS if c in channels),
        report.verdict,
        tuple(artifact.counts),
        tuple(truth),
        challenged,
        caught,
        alarms,
        flipped,
        dropped,
        shifted,
        dropped,
    )


@dataclass(frozen=True)
class DetectionEstimate:
    """Empirical vs analytic detection; the first three fields are the challenge channel."""

    empirical: float
    analytic: float
    deviation: float
    empirical_receipt: float
    analytic_receipt: float
    deviation_receipt: float
    empirical_any: float
    ci: tuple[float, float]
    trials: int
    method: str
    backend: str = field(default=BACKEND)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    from scipy.stats import binomtest

    ci = binomtest(successes, trials).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def estimate_detection(config: SimConfig, backend: str | None = None) -> DetectionEstimate:
    """Monte Carlo detection frequencies next to the independence-model predictions.

    ``config.method == "kernel"`` runs the Bernoulli kernel (fast enough for
    10^4 trials); ``"pipeline"`` runs ``run_election`` per trial.
    """
    if config.trials < 100:
        raise ValueError("estimate_detection needs at least 100 trials")
    if config.method == "kernel":
        m = kernels.detection_trials(
            config.n_voters, config.q, config.rho, config.f, config.d, config.trials, config.seed, backend
        )
        by_challenge = m[:, kernels.CAUGHT] > 0
        by_receipt = m[:, kernels.RECEIPT_ALARMS] > 0
        used = backend or BACKEND
    else:
        outs = [run_election(config, _seed_for(config.seed, t)) for t in range(config.trials)]
        by_challenge = np.array([CHANNEL_CHALLENGE in o.channels for o in outs])
        by_receipt = np.array([CHANNEL_RECEIPT in o.channels for o in outs])
        used = "pipeline"
    emp_c, emp_r = float(by_challenge.mean()), float(by_receipt.mean())
    ana_c, ana_r = config.analytic_challenge(), config.analytic_receipt()
    return DetectionEstimate(
        emp_c,
        ana_c,
        abs(emp_c - ana_c),
        emp_r,
        ana_r,
        abs(emp_r - ana_r),
        float((by_challenge | by_receipt).mean()),
        wilson_interval(int(by_challenge.sum()), config.trials),
        config.trials,
        config.method,
        used,
    )


@dataclass(frozen=True)
class SweepConfig:
    N: Sequence[int]
    q: Sequence[float]
    f: Sequence[float]
    rho: Sequence[float] = (0.0,)
    d: Sequence[float] = (0.0,)
    trials: int = 1000
    seed: int = 0

    @classmethod
    def from_dict(cls, obj: dict) -> "SweepConfig":
        grid = dict(obj.get("grid", {}))
        extra = set(obj) - {"grid", "trials", "seed"}
        if extra:
            raise ValueError(f"unknown sweep keys: {sorted(extra)}")
        unknown = set(grid) - {"N", "q", "f", "rho", "d"}
        if unknown:
            raise ValueError(f"unknown grid axes: {sorted(unknown)}")
        grid = {k: tuple(v) for k, v in grid.items()}
        return cls(**grid, trials=obj.get("trials", 1000), seed=obj.get("seed", 0))

    def cells(self) -> list[SimConfig]:
        axes = (self.N, self.q, self.rho, self.f, self.d)
        if not all(axes):
            raise ValueError("every sweep axis needs at least one value")
        return [
            SimConfig(n_voters=n, q=q, rho=rho, f=f, d=d, trials=self.trials, seed=_seed_for(self.seed, i))
            for i, (n, q, rho, f, d) in enumerate(itertools.product(*axes))
        ]


def result_row(config: SimConfig, est: DetectionEstimate) -> dict:
    return {
        "N": config.n_voters,
        "q": config.q,
        "rho": config.rho,
        "f": config.f,
        "d": config.d,
        "trials": config.trials,
        "analytic_challenge": f"{est.analytic:.6f}",
        "empirical_challenge": f"{est.empirical:.6f}",
        "analytic_receipt": f"{est.analytic_receipt:.6f}",
        "empirical_receipt": f"{est.empirical_receipt:.6f}",
    }


def sweep(grid: SweepConfig, backend: str | None = None) -> list[dict]:
    """One CSV row per grid cell; deterministic for a fixed seed and backend."""
    return [result_row(cfg, estimate_detection(cfg, backend)) for cfg in grid.cells()]


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


@dataclass(frozen=True)
class DefamationEstimate:
    mean: float
    expected: float
    per_claim_rate: float
    trials: int
    n_claims: int


def estimate_defamation(n_claims: int, trials: int, seed: int, backend: str | None = None) -> DefamationEstimate:
    """Uniform two-letter guesses against keyed codes, counted per batch of ``n_claims``."""
    hits = kernels.defamation_trials(n_claims, constants.CODE_SPACE, trials, seed, backend)
    return DefamationEstimate(
        float(hits.mean()), n_claims / constants.CODE_SPACE, float(hits.sum()) / (n_claims * trials), trials, n_claims
    )


def defamation_pipeline(election: Election, n_claims: int, rng: random.Random) -> int:
    """File ``n_claims`` WrongCode claims with guessed codes; return how many are Upheld.

    Each claim targets a random cast ballot.  The election must be closed so
    the code key is public.
    """
    snap = election.board.snapshot()
    hashes = snap.cast_hashes()
    manifest = election.manifest
    upheld = 0
    for _ in range(n_claims):
        h = hashes[rng.randrange(len(hashes))]
        code = "".join(rng.choice(constants.CODE_ALPHABET) for _ in range(constants.CODE_LENGTH))
        claim = DisputeClaim(Receipt(h, code, None), ClaimKind.WRONG_CODE, False)
        upheld += adjudicate(claim, snap, manifest).outcome is Outcome.UPHELD
    return upheld
