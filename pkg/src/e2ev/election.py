"""Election setup: keys, manifest, board and devices in one place."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import constants
from .ballot import ElectionManifest
from .board import BulletinBoard
from .device import DeviceConfig, VotingDevice
from .elgamal import TrusteeShare, keygen
from .group import GroupParams, Rng, system_rng
from .signature import SigningKey
from .tally import TallyArtifact, close_board, publish_tally


@dataclass(frozen=True)
class ElectionSecrets:
    """Everything private: trustee shares, signing keys and the return-code key."""

    shares: tuple[TrusteeShare, ...]
    device_key: SigningKey
    authority_key: SigningKey
    code_key: bytes

    def to_json(self) -> dict:
        return {
            "shares": [s.sk for s in self.shares],
            "device_sk": self.device_key.sk,
            "authority_sk": self.authority_key.sk,
            "code_key": self.code_key.hex(),
        }

    @classmethod
    def from_json(cls, params: GroupParams, obj: dict) -> "ElectionSecrets":
        def key(sk: int) -> SigningKey:
            return SigningKey(sk, params.gpow(sk))

        return cls(
            tuple(TrusteeShare(i, sk) for i, sk in enumerate(obj["shares"])),
            key(obj["device_sk"]),
            key(obj["authority_sk"]),
            bytes.fromhex(obj["code_key"]),
        )


@dataclass
class Election:
    manifest: ElectionManifest
    secrets: ElectionSecrets
    board: BulletinBoard

    @classmethod
    def setup(
        cls,
        election_id: str,
        candidates: Sequence[str],
        params: GroupParams,
        n_trustees: int = 3,
        receipt_mode: str = constants.RECEIPT_SIGNED,
        rng: Rng | None = None,
        board_path: str | Path | None = None,
    ) -> "Election":
        """Generate all keys, write the manifest as board entry 0."""
        rng = rng or system_rng()
        pk, shares = keygen(params, n_trustees, rng)
        device_key = SigningKey.generate(params, rng)
        authority_key = SigningKey.generate(params, rng)
        code_key = rng.randbytes(constants.CODE_KEY_BYTES)
        manifest = ElectionManifest.create(
            election_id,
            candidates,
            params,
            pk,
            [s.public(params) for s in shares],
            device_key.pk,
            authority_key.pk,
            code_key,
            receipt_mode,
        ).prepare()
        if board_path is not None and Path(board_path).exists():
            raise FileExistsError(f"{board_path} already exists")
        board = BulletinBoard(board_path)
        board.append(constants.KIND_MANIFEST, manifest.to_bytes())
        return cls(manifest, ElectionSecrets(tuple(shares), device_key, authority_key, code_key), board)

    def device(self, config: DeviceConfig = DeviceConfig(), rng: Rng | None = None) -> VotingDevice:
        return VotingDevice(self.manifest, self.secrets.device_key, self.secrets.code_key, config, rng)

    def tally(self) -> TallyArtifact:
        return publish_tally(self.board, self.secrets.shares)

    def close(self, rng: Rng | None = None) -> int:
        return close_board(self.board, self.secrets.authority_key, self.secrets.code_key, rng or system_rng())

    def finish(self, rng: Rng | None = None) -> TallyArtifact:
        artifact = self.tally()
        self.close(rng)
        return artifact

    def board_bytes(self) -> bytes:
        return self.board.snapshot().to_bytes()

    def manifest_bytes(self) -> bytes:
        return self.manifest.to_bytes() + b"\n"

    def secrets_bytes(self) -> bytes:
        return json.dumps(self.secrets.to_json(), indent=1).encode() + b"\n"
