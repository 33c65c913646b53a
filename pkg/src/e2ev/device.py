"""Voting device: commit to an encryption, then cast it or open it.

The cast/challenge decision is never an argument to ``begin``; the device has
already published its commitment (the ballot hash) when it learns the choice.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from . import constants
from .ballot import BallotRandomness, ChallengeRecord, ElectionManifest, EncryptedBallot, PlainBallot, encrypt_ballot
from .board import BulletinBoard
from .dispute import Receipt, issue_return_code
from .group import Rng
from .signature import Signature, SigningKey, sign


class SessionError(RuntimeError):
    pass


@dataclass(frozen=True)
class DeviceConfig:
    cheat_rate: float = 0.0
    drop_rate: float = 0.0
    bad_signature_rate: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        for name in ("cheat_rate", "drop_rate", "bad_signature_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @property
    def honest(self) -> bool:
        return self.cheat_rate == 0 and self.drop_rate == 0 and self.bad_signature_rate == 0


class SessionState(enum.Enum):
    IDLE = "Idle"
    COMMITTED = "Committed"
    CAST = "Cast"
    CHALLENGED = "Challenged"


@dataclass
class DeviceSession:
    selection: int
    state: SessionState = SessionState.IDLE
    ballot: EncryptedBallot | None = None
    randomness: BallotRandomness | None = None
    commitment: bytes = b""
    # Device-internal ground truth, read only by the simulator.
    encrypted_selection: int = -1
    dropped: bool = False

    @property
    def cheated(self) -> bool:
        return self.encrypted_selection != self.selection


class VotingDevice:
    """One device with a single session slot.

    ``config`` sets the misbehaviour rates; all rates zero is the honest device.
    """

    def __init__(
        self,
        manifest: ElectionManifest,
        signing_key: SigningKey,
        code_key: bytes,
        config: DeviceConfig = DeviceConfig(),
        rng: Rng | None = None,
    ):
        self.manifest = manifest
        self.signing_key = signing_key
        self.code_key = code_key
        self.config = config
        if rng is None:
            rng = random.Random(config.seed) if config.seed is not None else random.SystemRandom()
        self.rng = rng
        self._active: DeviceSession | None = None

    def begin(self, selection: int) -> tuple[DeviceSession, bytes]:
        if self._active is not None:
            raise SessionError("a session is already in progress")
        plain = PlainBallot(selection)
        plain.check(self.manifest)
        target = selection
        if self.config.cheat_rate and self.rng.random() < self.config.cheat_rate:
            others = [i for i in range(self.manifest.n_candidates) if i != selection]
            target = others[self.rng.randrange(len(others))]
        eb, rnd = encrypt_ballot(self.manifest, plain, self.rng, encrypt_as=target)
        session = DeviceSession(selection, SessionState.COMMITTED, eb, rnd, eb.ballot_hash, target)
        self._active = session
        return session, eb.ballot_hash

    def _consume(self, session: DeviceSession) -> None:
        if session.state is not SessionState.COMMITTED or session is not self._active:
            raise SessionError(f"session is {session.state.value}, expected Committed")
        self._active = None

    def finalize_cast(self, session: DeviceSession, board: BulletinBoard) -> Receipt:
        """Publish the ballot (unless dropped) and return a signed receipt.

        The session is Cast and its randomness erased even if the append
        raises; the error propagates to the caller.
        """
        self._consume(session)
        session.state = SessionState.CAST
        session.randomness = None
        eb = session.ballot
        code = issue_return_code(eb.ballot_hash, self.code_key)
        params = self.manifest.params
        if self.manifest.receipt_mode == constants.RECEIPT_CODE_ONLY:
            sig = None
        else:
            sig = sign(params, self.signing_key, _receipt_message(eb.ballot_hash, code), self.rng)
            if self.config.bad_signature_rate and self.rng.random() < self.config.bad_signature_rate:
                sig = Signature(sig.c, (sig.z + 1) % params.q)
        receipt = Receipt(eb.ballot_hash, code, sig)
        if self.config.drop_rate and self.rng.random() < self.config.drop_rate:
            session.dropped = True
            return receipt
        board.append(constants.KIND_CAST, eb.to_json(params))
        return receipt

    def finalize_challenge(self, session: DeviceSession, board: BulletinBoard) -> ChallengeRecord:
        """Disclose the randomness and post the ballot on the challenged list."""
        self._consume(session)
        session.state = SessionState.CHALLENGED
        record = ChallengeRecord(session.ballot, session.randomness, session.selection)
        board.append(constants.KIND_CHALLENGED, record.to_json(self.manifest.params))
        return record


def _receipt_message(ballot_hash: bytes, code: str) -> bytes:
    return Receipt(ballot_hash, code, None).message()
