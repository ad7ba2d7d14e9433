import hashlib
from typing import Union

import numpy as np

SeedPart = Union[int, float, str]


def derive_seed(*parts: SeedPart) -> int:
    """
    Derive a 64-bit seed from a master seed and any number of stage/node/scenario identifiers.

    The seed only depends on the string form of the parts, so the same stage
    gets the same stream whether the work runs serially or in parallel.

    Args:
        *parts (int, float, str): master seed followed by identifiers, e.g. ``(7, "volumes", "node-3")``.

    Returns:
        int: seed in ``[0, 2**64)``.
    """
    if not parts:
        raise ValueError("derive_seed needs at least one part")
    digest = hashlib.sha256("\x1f".join(str(part) for part in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(*parts: SeedPart) -> np.random.Generator:
    """
    Seeded numpy generator for the stream identified by ``parts``.
    """
    return np.random.default_rng(derive_seed(*parts))
