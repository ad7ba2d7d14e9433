from ddos_analysis.utils.files import atomic_path, atomic_write
from ddos_analysis.utils.seeding import derive_seed, make_rng

__all__ = [
    "atomic_path",
    "atomic_write",
    "derive_seed",
    "make_rng",
]
