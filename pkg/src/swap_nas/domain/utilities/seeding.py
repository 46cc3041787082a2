import hashlib

import numpy as np

_MASK_64 = (1 << 64) - 1


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from an arbitrary key, e.g. (master_seed, "cycle", 3, 1)."""
    key = "/".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") & _MASK_64


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK_64))
