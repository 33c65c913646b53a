"""Self-contained modular arithmetic and hashing for the verifier.

gmpy2 is used when importable purely for speed; every function has a
builtin-int path with identical results.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache

try:
    import gmpy2

    def powmod(b: int, e: int, m: int) -> int:
        return int(gmpy2.powmod(b, e, m))

    def invmod(x: int, m: int) -> int:
        return int(gmpy2.invert(x, m))

    def _mpz(x: int):
        return gmpy2.mpz(x)

except ImportError:  # pragma: no cover - only where gmpy2 is missing
    gmpy2 = None

    def powmod(b: int, e: int, m: int) -> int:
        return pow(b, e, m)

    def invmod(x: int, m: int) -> int:
        return pow(x, -1, m)

    def _mpz(x: int):
        return x


def jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


@lru_cache(maxsize=32)
def is_probable_prime(n: int, rounds: int = 32) -> bool:
    """Miller-Rabin with bases derived from SHA-256 of n, so results are reproducible."""
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n == sp:
            return True
        if n % sp == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    nbytes = n.to_bytes((n.bit_length() + 7) // 8, "big")
    for i in range(rounds):
        seed = hashlib.sha256(nbytes + i.to_bytes(4, "big")).digest()
        a = 2 + int.from_bytes(seed * ((len(nbytes) // 32) + 1), "big") % (n - 3)
        x = powmod(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Group:
    """Order-q subgroup of Z_p^*, p = 2q + 1, as read from a manifest."""

    def __init__(self, p: int, q: int, g: int):
        self.p, self.q, self.g = p, q, g
        self.width = (p.bit_length() + 7) // 8
        self._tables: dict[int, list] = {}

    def problems(self) -> list[str]:
        out = []
        if self.p != 2 * self.q + 1:
            out.append("p != 2q + 1")
        if not is_probable_prime(self.q) or not is_probable_prime(self.p):
            out.append("p or q not prime")
        elif not 1 < self.g < self.p or powmod(self.g, self.q, self.p) != 1:
            out.append("g is not of order q")
        return out

    def member(self, x: int) -> bool:
        if not 0 < x < self.p:
            return False
        if gmpy2 is not None:
            return gmpy2.jacobi(x, self.p) == 1
        return jacobi(x, self.p) == 1

    def fix(self, base: int) -> None:
        if self.p.bit_length() < 512 or base in self._tables:
            return
        mod = _mpz(self.p)
        rows = []
        b = _mpz(base)
        for _ in range((self.q.bit_length() + 7) // 8):
            row = [_mpz(1)] * 256
            acc = _mpz(1)
            for j in range(1, 256):
                acc = acc * b % mod
                row[j] = acc
            rows.append(row)
            b = acc * b % mod
        self._tables[base] = rows

    def exp(self, base: int, e: int) -> int:
        e %= self.q
        rows = self._tables.get(base)
        if rows is None:
            return powmod(base, e, self.p)
        r = _mpz(1)
        i = 0
        while e:
            d = e & 255
            if d:
                r = r * rows[i][d] % self.p
            e >>= 8
            i += 1
        return int(r)

    def b(self, x: int) -> bytes:
        return x.to_bytes(self.width, "big")


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def lp(*parts: bytes) -> bytes:
    return b"".join(len(part).to_bytes(4, "big") + part for part in parts)


def challenge(tag: str, q: int, *fields: bytes) -> int:
    return int.from_bytes(sha256(lp(tag.encode("ascii"), *fields)), "big") % q


def discrete_log(grp: Group, y: int, bound: int, linear_limit: int) -> int | None:
    """Smallest m in [0, bound] with g^m = y."""
    if bound <= linear_limit:
        acc = 1
        for m in range(bound + 1):
            if acc == y:
                return m
            acc = acc * grp.g % grp.p
        return None
    step = 1
    while step * step <= bound:
        step += 1
    baby = {}
    acc = 1
    for j in range(step):
        baby.setdefault(acc, j)
        acc = acc * grp.g % grp.p
    giant = invmod(powmod(grp.g, step, grp.p), grp.p)
    gamma = y
    for i in range(step + 1):
        if gamma in baby:
            m = i * step + baby[gamma]
            return m if m <= bound else None
        gamma = gamma * giant % grp.p
    return None
