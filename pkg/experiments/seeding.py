"""
Seed Derivation - Replica seeds as a frozen 64-bit hash of the campaign coordinates
"""
from hashlib import blake2b

from models.schemas import ExperimentKind


def derive_seed(
    base_seed: int,
    experiment: ExperimentKind,
    parameters: dict[str, float],
    replica_index: int
) -> int:
    """
    8-byte BLAKE2b of (base_seed, experiment, parameter values, replica).
    Parameters enter by value (float.hex, sorted by name), so reordering a
    parameter list does not move any combination onto a different seed.
    """
    values = ",".join(f"{name}={float(value).hex()}" for name, value in sorted(parameters.items()))
    material = f"{base_seed}|{experiment.value}|{values}|{replica_index}"
    digest = blake2b(material.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")
