"""Seeded random sampling of states, unitaries and channels.

All randomness in the library flows from a master seed through
`spawn_rng`, which derives independent generators from (seed, key path)
pairs via numpy's SeedSequence spawn keys.  Parallel and serial sweeps
therefore see identical streams.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_to_ints(key) -> tuple[int, ...]:
    out = []
    for k in key:
        if isinstance(k, (int, np.integer)):
            out.append(int(k) & 0xFFFFFFFF)
        else:
            out.append(zlib.crc32(str(k).encode("utf-8")))
    return tuple(out)


def spawn_rng(seed, *key) -> np.random.Generator:
    """Generator derived from a master seed and a hashable key path.

    The same (seed, key) pair always yields the same stream, independent
    of how many other streams were spawned before it.
    """
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot re-key an existing Generator; pass a seed")
        return seed
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=_key_to_ints(key))
    return np.random.default_rng(ss)


def as_rng(rng_or_seed) -> np.random.Generator:
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed
    return np.random.default_rng(rng_or_seed)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random d x d unitary (QR of a Ginibre matrix, phase-fixed)."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph


def random_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix with the given rank (Wishart construction)."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return m / np.real(np.trace(m))


def random_kraus_ops(d: int, n_ops: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Kraus operators of a random channel (columns of a Haar isometry)."""
    big = haar_unitary(d * n_ops, rng)
    iso = big[:, :d]  # isometry d -> d * n_ops
    return [iso[k * d:(k + 1) * d, :] for k in range(n_ops)]
