"""Secret-bearing containers and entropy sources."""

from __future__ import annotations

import random
import secrets
from typing import Protocol

from .curve import N, SCALAR_LEN, Point, base_mul


class EntropyError(RuntimeError):
    pass


class Entropy(Protocol):
    def randbytes(self, n: int) -> bytes: ...


class SystemEntropy:
    """OS randomness; the default everywhere outside deterministic runs."""

    def randbytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)


def seeded(seed: int) -> random.Random:
    """Deterministic randomness tape for reproducible simulations.

    Not a cryptographic generator; only meant for tests and replays.
    """
    return random.Random(seed)


def draw(rng: Entropy, n: int) -> bytes:
    data = rng.randbytes(n)
    if len(data) != n:
        raise EntropyError(f"entropy source returned {len(data)} of {n} bytes")
    return data


class Scalar:
    """Secret integer in [1, n-1], held in a wipeable 32-byte buffer.

    Python ints computed from :attr:`value` are not covered by
    :meth:`destroy`; only the canonical buffer is overwritten.
    """

    __slots__ = ("_buf",)

    def __init__(self, value: int):
        if not 1 <= value < N:
            raise ValueError("scalar out of range [1, n-1]")
        self._buf = bytearray(value.to_bytes(SCALAR_LEN, "big"))

    @classmethod
    def random(cls, rng: Entropy) -> Scalar:
        while True:
            v = int.from_bytes(draw(rng, SCALAR_LEN), "big")
            if 1 <= v < N:
                return cls(v)

    @classmethod
    def from_bytes(cls, data: bytes) -> Scalar:
        if len(data) != SCALAR_LEN:
            raise ValueError("scalar encoding must be 32 bytes")
        return cls(int.from_bytes(data, "big"))

    @property
    def value(self) -> int:
        if self.destroyed:
            raise ValueError("scalar has been destroyed")
        return int.from_bytes(self._buf, "big")

    def to_bytes(self) -> bytes:
        return bytes(self._buf)

    def public(self) -> Point:
        return base_mul(self.value)

    @property
    def destroyed(self) -> bool:
        return not any(self._buf)

    def destroy(self) -> None:
        for i in range(len(self._buf)):
            self._buf[i] = 0

    def _debug_buffer(self) -> bytes:
        return bytes(self._buf)

    def __eq__(self, other):
        return isinstance(other, Scalar) and self._buf == other._buf

    def __hash__(self):
        return hash(bytes(self._buf))

    def __repr__(self):
        return "Scalar(<destroyed>)" if self.destroyed else "Scalar(<secret>)"


def generate_keypair(rng: Entropy) -> tuple[Scalar, Point]:
    x = Scalar.random(rng)
    return x, x.public()


ENCRYPTION = "encryption"
MAC = "mac"
_ROLE_LENGTHS = {ENCRYPTION: (16,), MAC: (16, 32)}


class SymmetricKey:
    """Symmetric key tagged with its role.

    Encryption keys are AES-128 (16 bytes).  MAC keys are 32 bytes for
    HMAC-SHA256 or 16 bytes for AES-CMAC.
    """

    __slots__ = ("_buf", "role", "_wiped")

    def __init__(self, material: bytes, role: str):
        if role not in _ROLE_LENGTHS:
            raise ValueError(f"unknown key role {role!r}")
        if len(material) not in _ROLE_LENGTHS[role]:
            raise ValueError(f"{role} key cannot be {len(material)} bytes")
        self._buf = bytearray(material)
        self.role = role
        self._wiped = False

    @property
    def material(self) -> bytes:
        if self.destroyed:
            raise ValueError("key has been destroyed")
        return bytes(self._buf)

    def __len__(self):
        return len(self._buf)

    @property
    def destroyed(self) -> bool:
        # tracked explicitly: an all-zero key is weak but still a key
        return self._wiped

    def destroy(self) -> None:
        for i in range(len(self._buf)):
            self._buf[i] = 0
        self._wiped = True

    def _debug_buffer(self) -> bytes:
        return bytes(self._buf)

    def __eq__(self, other):
        return (
            isinstance(other, SymmetricKey)
            and self.role == other.role
            and self._buf == other._buf
        )

    def __hash__(self):
        return hash((self.role, bytes(self._buf)))

    def __repr__(self):
        return f"SymmetricKey({self.role}, {len(self._buf)} bytes)"
