"""Prime-order subgroup of Z_p^* for a safe prime p = 2q + 1."""

from __future__ import annotations

import random
import secrets
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol

import gmpy2
from sympy import isprime

from . import constants


@lru_cache(maxsize=64)
def _isprime(n: int) -> bool:
    return bool(isprime(n))


class GroupError(ValueError):
    """Invalid group parameters or a value outside the group."""


class Rng(Protocol):
    """Randomness source; ``random.Random`` and ``SystemRandom`` both qualify."""

    def randrange(self, start: int, stop: int = ...) -> int: ...

    def random(self) -> float: ...

    def randbytes(self, n: int) -> bytes: ...


def system_rng() -> random.SystemRandom:
    return random.SystemRandom()


def seeded_rng(seed: int | str | bytes) -> random.Random:
    return random.Random(seed)


class FixedBase:
    """Comb table for repeated exponentiation of one base.

    Costs ``ceil(|q| / 8) * 255`` multiplications to build and about
    ``|q| / 8`` multiplications per exponentiation afterwards.
    """

    WINDOW = 8

    def __init__(self, base: int, p: int, exponent_bits: int):
        mod = gmpy2.mpz(p)
        size = 1 << self.WINDOW
        rows = []
        b = gmpy2.mpz(base) % mod
        for _ in range((exponent_bits + self.WINDOW - 1) // self.WINDOW):
            row = [gmpy2.mpz(1)] * size
            acc = gmpy2.mpz(1)
            for j in range(1, size):
                acc = acc * b % mod
                row[j] = acc
            rows.append(row)
            b = acc * b % mod
        self._rows = rows
        self._mod = mod

    def pow(self, e: int) -> int:
        r = gmpy2.mpz(1)
        mod = self._mod
        mask = (1 << self.WINDOW) - 1
        rows = self._rows
        i = 0
        while e:
            d = e & mask
            if d:
                r = r * rows[i][d] % mod
            e >>= self.WINDOW
            i += 1
        return int(r)


# Tables are only worth building for big moduli; small groups use powmod.
_FIXED_BASE_MIN_BITS = 512
_FIXED_BASE_CACHE_SIZE = 32
_HEX = frozenset("0123456789abcdef")
_TABLES: "OrderedDict[tuple[int, int], FixedBase]" = OrderedDict()


@dataclass(frozen=True)
class GroupParams:
    p: int
    q: int
    g: int

    @classmethod
    def toy(cls) -> "GroupParams":
        return cls(**constants.TOY_GROUP)

    @classmethod
    def production(cls) -> "GroupParams":
        return cls(**constants.PRODUCTION_GROUP)

    @classmethod
    def named(cls, name: str) -> "GroupParams":
        if name == "toy":
            return cls.toy()
        if name == "production":
            return cls.production()
        raise GroupError(f"unknown group {name!r}")

    def validate(self) -> "GroupParams":
        """Raise GroupError unless p, q, g describe a safe-prime subgroup."""
        if self.p != 2 * self.q + 1:
            raise GroupError("p != 2q + 1")
        if not (_isprime(self.q) and _isprime(self.p)):
            raise GroupError("p and q must both be prime")
        if not 1 < self.g < self.p or pow(self.g, self.q, self.p) != 1:
            raise GroupError("g does not generate the order-q subgroup")
        return self

    @property
    def width(self) -> int:
        """Encoded byte width of elements and scalars."""
        return (self.p.bit_length() + 7) // 8

    # -- arithmetic -------------------------------------------------------

    def pow(self, base: int, e: int) -> int:
        e %= self.q
        table = _TABLES.get((self.p, base))
        if table is not None:
            return table.pow(e)
        return int(gmpy2.powmod(base, e, self.p))

    def gpow(self, e: int) -> int:
        return self.pow(self.g, e)

    def fix_base(self, base: int) -> None:
        """Precompute a comb table for ``base`` (no-op for small groups)."""
        key = (self.p, base)
        if self.p.bit_length() < _FIXED_BASE_MIN_BITS:
            return
        if key in _TABLES:
            _TABLES.move_to_end(key)
            return
        while len(_TABLES) >= _FIXED_BASE_CACHE_SIZE:
            _TABLES.popitem(last=False)
        _TABLES[key] = FixedBase(base, self.p, self.q.bit_length())

    def mul(self, x: int, y: int) -> int:
        return x * y % self.p

    def inv(self, x: int) -> int:
        return int(gmpy2.invert(x, self.p))

    def div(self, x: int, y: int) -> int:
        return x * self.inv(y) % self.p

    def is_member(self, x: int) -> bool:
        """True iff 1 <= x < p and x lies in the order-q subgroup.

        For a safe prime the order-q subgroup is the quadratic residues, so the
        Jacobi symbol decides membership as x^q = 1 would, at a fraction of the cost.
        """
        return 0 < x < self.p and gmpy2.jacobi(x, self.p) == 1

    def random_scalar(self, rng: Rng) -> int:
        """Uniform scalar in [1, q-1]."""
        return rng.randrange(1, self.q)

    # -- encoding ---------------------------------------------------------

    def encode(self, x: int) -> str:
        return x.to_bytes(self.width, "big").hex()

    def to_bytes(self, x: int) -> bytes:
        return x.to_bytes(self.width, "big")

    def decode_element(self, s: str) -> int:
        x = self._decode_int(s)
        if not self.is_member(x):
            raise GroupError("element is not in the order-q subgroup")
        return x

    def decode_scalar(self, s: str) -> int:
        x = self._decode_int(s)
        if x >= self.q:
            raise GroupError("scalar out of range")
        return x

    def _decode_int(self, s: str) -> int:
        if not isinstance(s, str) or len(s) != 2 * self.width:
            raise GroupError("wrong encoded width")
        if not _HEX.issuperset(s):
            raise GroupError("not lowercase hex")
        return int(s, 16)

    def to_json(self) -> dict:
        return {"p": self.encode(self.p), "q": self.encode(self.q), "g": self.encode(self.g)}

    @classmethod
    def from_json(cls, obj: dict) -> "GroupParams":
        if not isinstance(obj, dict) or tuple(obj) != constants.GROUP_FIELDS:
            raise GroupError("bad group object")
        try:
            p, q, g = (int(obj[k], 16) for k in constants.GROUP_FIELDS)
        except (TypeError, ValueError) as exc:
            raise GroupError("bad group encoding") from exc
        params = cls(p, q, g)
        for k in constants.GROUP_FIELDS:
            if obj[k] != params.encode(getattr(params, k)):
                raise GroupError("non-canonical group encoding")
        return params


def random_nonce(rng: Rng, n: int = constants.BALLOT_NONCE_BYTES) -> bytes:
    return rng.randbytes(n)


def token_bytes(n: int) -> bytes:
    return secrets.token_bytes(n)
