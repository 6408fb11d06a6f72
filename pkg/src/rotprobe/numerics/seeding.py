"""Named random sub-streams fanned out from one root seed."""

from __future__ import annotations

import hashlib

import numpy as np


def _key(*names: object) -> list[int]:
    out = []
    for name in names:
        if isinstance(name, (int, np.integer)):
            out.append(int(name) & 0xFFFFFFFF)
        else:
            digest = hashlib.blake2b(str(name).encode("utf-8"), digest_size=8).digest()
            out.append(int.from_bytes(digest[:4], "little"))
            out.append(int.from_bytes(digest[4:], "little"))
    return out


def stream(root_seed: int, *names: object) -> np.random.Generator:
    """Independent generator for the path ``names`` under ``root_seed``.

    The same (seed, names) always yields the same stream, whatever else has
    been drawn, so components can be seeded and tested in isolation.
    """
    if root_seed is None:
        raise ValueError("a root seed is required")
    seq = np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(_key(*names)))
    return np.random.Generator(np.random.PCG64(seq))
