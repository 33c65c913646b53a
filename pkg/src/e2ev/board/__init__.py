from .log import (
    BoardClosed,
    BoardEntry,
    BoardError,
    BoardSnapshot,
    BulletinBoard,
    ChainResult,
    CorruptBoard,
    DuplicateBallot,
    Found,
    InvalidBallot,
    MalformedPayload,
    OrderingError,
    entry_hash,
    lookup,
    read_snapshot,
    verify_chain,
)

__all__ = [
    "BoardClosed",
    "BoardEntry",
    "BoardError",
    "BoardSnapshot",
    "BulletinBoard",
    "ChainResult",
    "CorruptBoard",
    "DuplicateBallot",
    "Found",
    "InvalidBallot",
    "MalformedPayload",
    "OrderingError",
    "entry_hash",
    "lookup",
    "read_snapshot",
    "verify_chain",
]
