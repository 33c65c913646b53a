"""VerificationReport: PASS, or failures each carrying a hand-checkable locator."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .. import constants


@dataclass(frozen=True)
class Check:
    check: str
    ok: bool
    reason: str | None = None
    seq: int | None = None
    field: str | None = None
    expected: str | None = None
    found: str | None = None

    def __post_init__(self):
        if self.check not in constants.CHECK_ORDER and self.check != "receipt":
            raise ValueError(f"unknown check {self.check!r}")
        # A failure without specific evidence is not representable.
        if not self.ok and (self.field is None or self.expected is None or self.found is None):
            raise ValueError("a failing check needs field, expected and found")

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in constants.CHECK_FIELDS}


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)
    counts: list[int] | None = None
    receipt: str | None = None
    decode_error: bool = False
    timing: dict | None = None

    @property
    def verdict(self) -> str:
        return "PASS" if all(c.ok for c in self.checks) else "FAIL"

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    @property
    def exit_code(self) -> int:
        if self.decode_error:
            return 2
        return 0 if self.verdict == "PASS" else 1

    def first_failure(self) -> Check | None:
        fails = self.failures
        return fails[0] if fails else None

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "checks": [c.to_json() for c in self.checks],
            "counts": self.counts,
            "receipt": None if self.receipt is None else {"status": self.receipt},
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_json(), separators=(",", ":"), ensure_ascii=True).encode("ascii") + b"\n"
