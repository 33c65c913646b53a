"""Standalone election verifier.

Depends only on ``e2ev.constants`` and the standard library (gmpy2 is used
for speed when present).  Copy ``constants.py`` and this directory into an
empty ``e2ev`` package to run it without the rest of the toolkit.
"""

from .core import INCLUDED, MISSING, SIGNATURE_INVALID, check_receipt, verify_election
from .report import Check, VerificationReport

__all__ = [
    "Check",
    "INCLUDED",
    "MISSING",
    "SIGNATURE_INVALID",
    "VerificationReport",
    "check_receipt",
    "verify_election",
]
