"""Election simulator and detection statistics."""

from ._jit import BACKEND, HAVE_NUMBA
from .model import (
    CHANNEL_CHALLENGE,
    CHANNEL_RECEIPT,
    CHANNEL_VERIFIER,
    CSV_COLUMNS,
    DefamationEstimate,
    DetectionEstimate,
    SimConfig,
    SimOutcome,
    SweepConfig,
    defamation_pipeline,
    estimate_defamation,
    estimate_detection,
    run_election,
    sweep,
    to_csv,
    wilson_interval,
)

__all__ = [
    "BACKEND",
    "CHANNEL_CHALLENGE",
    "CHANNEL_RECEIPT",
    "CHANNEL_VERIFIER",
    "CSV_COLUMNS",
    "DefamationEstimate",
    "DetectionEstimate",
    "HAVE_NUMBA",
    "SimConfig",
    "SimOutcome",
    "SweepConfig",
    "defamation_pipeline",
    "estimate_defamation",
    "estimate_detection",
    "run_election",
    "sweep",
    "to_csv",
    "wilson_interval",
]
