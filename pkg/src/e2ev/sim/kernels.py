"""Monte Carlo kernels for detection and defamation statistics.

Each kernel has a numba version and a chunked numpy version.  The two draw
from different generators, so they agree in distribution, not bit for bit;
each is reproducible for a fixed seed.

Per voter and trial the model is: one Bernoulli(q) challenge session (the
device cheats on it with probability f, which the challenge catches), then
one cast session (cheated with probability f, dropped with probability d; a
drop is noticed if the voter checks the receipt, probability rho).
"""

from __future__ import annotations

import numpy as np

from ._jit import HAVE_NUMBA, njit

# Columns of the per-trial result matrix.
CAUGHT, RECEIPT_ALARMS, CHALLENGED, DROPPED, FLIPPED = range(5)
N_COLUMNS = 5

_CHUNK_DRAWS = 1 << 22


@njit(cache=True)
def _detection_numba(n_voters, q, rho, f, d, trials, seed):
    np.random.seed(seed)
    out = np.zeros((trials, 5), np.int64)
    for t in range(trials):
        for _ in range(n_voters):
            if np.random.random() < q:
                out[t, 2] += 1
                if np.random.random() < f:
                    out[t, 0] += 1
            flip = np.random.random() < f
            if np.random.random() < d:
                out[t, 3] += 1
                if np.random.random() < rho:
                    out[t, 1] += 1
            elif flip:
                out[t, 4] += 1
    return out


def _detection_numpy(n_voters, q, rho, f, d, trials, seed):
    rng = np.random.default_rng(seed)
    out = np.zeros((trials, N_COLUMNS), np.int64)
    chunk = max(1, _CHUNK_DRAWS // (5 * n_voters))
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        u = rng.random((stop - start, n_voters, 5))
        challenged = u[..., 0] < q
        cheat_challenge = u[..., 1] < f
        flip = u[..., 2] < f
        dropped = u[..., 3] < d
        checked = u[..., 4] < rho
        out[start:stop, CAUGHT] = (challenged & cheat_challenge).sum(axis=1)
        out[start:stop, RECEIPT_ALARMS] = (dropped & checked).sum(axis=1)
        out[start:stop, CHALLENGED] = challenged.sum(axis=1)
        out[start:stop, DROPPED] = dropped.sum(axis=1)
        out[start:stop, FLIPPED] = (flip & ~dropped).sum(axis=1)
    return out


def detection_trials(
    n_voters: int, q: float, rho: float, f: float, d: float, trials: int, seed: int, backend: str | None = None
) -> np.ndarray:
    """(trials, 5) int64 matrix; columns CAUGHT, RECEIPT_ALARMS, CHALLENGED, DROPPED, FLIPPED."""
    if backend is None:
        backend = "numba" if HAVE_NUMBA else "numpy"
    args = (int(n_voters), float(q), float(rho), float(f), float(d), int(trials), int(seed))
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _detection_numba(*args)
    if backend == "numpy":
        return _detection_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")


@njit(cache=True)
def _defamation_numba(n_claims, space, trials, seed):
    np.random.seed(seed)
    out = np.zeros(trials, np.int64)
    for t in range(trials):
        hits = 0
        for _ in range(n_claims):
            if np.random.randint(0, space) == np.random.randint(0, space):
                hits += 1
        out[t] = hits
    return out


def _defamation_numpy(n_claims, space, trials, seed):
    rng = np.random.default_rng(seed)
    out = np.zeros(trials, np.int64)
    chunk = max(1, _CHUNK_DRAWS // (2 * n_claims))
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        true = rng.integers(0, space, (stop - start, n_claims))
        guess = rng.integers(0, space, (stop - start, n_claims))
        out[start:stop] = (true == guess).sum(axis=1)
    return out


def defamation_trials(n_claims: int, space: int, trials: int, seed: int, backend: str | None = None) -> np.ndarray:
    """Per trial, how many of ``n_claims`` uniform code guesses hit a uniform true code."""
    if backend is None:
        backend = "numba" if HAVE_NUMBA else "numpy"
    args = (int(n_claims), int(space), int(trials), int(seed))
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _defamation_numba(*args)
    if backend == "numpy":
        return _defamation_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")
