"""Classical side of the comparison.

Keys, grouping, bit-flip encryption and TP's decoding of measured carriers.
"""

from typing import Tuple

import numpy as np

from ..core.errors import InvalidArgumentError
from ..models.schemas import (
    EncryptedGroup,
    GroupedSecret,
    KeyMaterial,
    Secret,
    TpDecodeRecord,
)
from ..quantum import StateVector, complement, make_ghz


def xor_bits(a: str, b: str) -> str:
    if len(a) != len(b):
        raise InvalidArgumentError(f"Length mismatch: {len(a)} vs {len(b)} bits")
    return "".join("0" if x == y else "1" for x, y in zip(a, b))


def generate_keys(group_count: int, rng: np.random.Generator) -> KeyMaterial:
    """Ideal pre-shared keys K_AB, K_AC, K_BC, one uniform bit per group"""
    if group_count < 1:
        raise InvalidArgumentError(f"group_count must be >= 1, got {group_count}")
    k_ab, k_ac, k_bc = rng.integers(0, 2, size=(3, group_count)).tolist()
    return KeyMaterial(k_ab=k_ab, k_ac=k_ac, k_bc=k_bc)


def group_secret(secret: Secret, n: int) -> GroupedSecret:
    """Split x_1..x_N into n-bit groups, zero-padding the last one after x_N"""
    if not 2 <= n <= secret.length:
        raise InvalidArgumentError(
            f"group size n={n} must satisfy 2 <= n <= N={secret.length}"
        )
    padded = secret.bits + "0" * ((-secret.length) % n)
    return GroupedSecret(
        groups=[padded[i : i + n] for i in range(0, len(padded), n)],
        group_size=n,
        original_length=secret.length,
    )


def encrypt_group(group: str, r: int) -> EncryptedGroup:
    if r not in (0, 1):
        raise InvalidArgumentError(f"flip bit must be 0 or 1, got {r}")
    return EncryptedGroup(bits=complement(group) if r else group, flipped=bool(r))


def prepare_carrier(encrypted: EncryptedGroup) -> StateVector:
    """(n+1)-qubit GHZ carrier; qubit 0 is the flag"""
    return make_ghz(encrypted.bits)


def tp_decode(measured: str, key_bit: int) -> TpDecodeRecord:
    """Undo the branch flip using the flag outcome and TP's channel key"""
    if len(measured) < 2 or set(measured) - {"0", "1"}:
        raise InvalidArgumentError(f"Invalid measurement record: {measured!r}")
    m1, m2 = int(measured[0]), measured[1:]
    c = m1 ^ key_bit
    return TpDecodeRecord(m1=m1, m2=m2, c=c, m2_prime=complement(m2) if c else m2)


def compare_groups(m2a_prime: str, m2b_prime: str) -> Tuple[str, bool]:
    rc = xor_bits(m2a_prime, m2b_prime)
    return rc, "1" not in rc
