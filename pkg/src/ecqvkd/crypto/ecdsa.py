"""ECDSA over P-256 with SHA-256 and a 64-byte raw ``r || s`` wire form."""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from .curve import G, N, SCALAR_LEN, Point, base_mul, mul_add
from .keys import Entropy, Scalar, SystemEntropy

SIGNATURE_LEN = 64
DETERMINISTIC = "deterministic"
RANDOMIZED = "randomized"


class SignatureEncodingError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    r: int
    s: int

    def __post_init__(self):
        if not (1 <= self.r < N and 1 <= self.s < N):
            raise SignatureEncodingError("signature component out of range")

    def to_bytes(self) -> bytes:
        return self.r.to_bytes(SCALAR_LEN, "big") + self.s.to_bytes(SCALAR_LEN, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> Signature:
        if len(data) != SIGNATURE_LEN:
            raise SignatureEncodingError("signature must be 64 bytes")
        return cls(int.from_bytes(data[:32], "big"), int.from_bytes(data[32:], "big"))


def _digest_int(message: bytes) -> int:
    # SHA-256 output and the order of P-256 are both 256 bits: no truncation
    return int.from_bytes(hashlib.sha256(message).digest(), "big")


def _rfc6979_nonces(key: int, h: int):
    """Yield candidate nonces per RFC 6979 section 3.2 (HMAC-SHA256)."""
    x = key.to_bytes(SCALAR_LEN, "big")
    h1 = (h % N).to_bytes(SCALAR_LEN, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        cand = int.from_bytes(v, "big")
        if 1 <= cand < N:
            yield cand
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def _random_nonces(rng: Entropy):
    while True:
        yield Scalar.random(rng).value


def ecdsa_sign(
    key: Scalar,
    message: bytes,
    mode: str = RANDOMIZED,
    rng: Entropy | None = None,
) -> Signature:
    d = key.value
    h = _digest_int(message)
    if mode == DETERMINISTIC:
        nonces = _rfc6979_nonces(d, h)
    elif mode == RANDOMIZED:
        nonces = _random_nonces(rng or SystemEntropy())
    else:
        raise ValueError(f"unknown signing mode {mode!r}")
    for k in nonces:
        r = base_mul(k).x % N
        if r == 0:
            continue
        s = pow(k, -1, N) * (h + r * d) % N
        if s == 0:
            continue
        return Signature(r, s)
    raise AssertionError("unreachable")


def ecdsa_verify(pub: Point, message: bytes, sig: Signature | bytes) -> bool:
    """Return True iff ``sig`` is valid; malformed input just rejects."""
    if isinstance(sig, (bytes, bytearray)):
        try:
            sig = Signature.from_bytes(bytes(sig))
        except SignatureEncodingError:
            return False
    if not pub:
        return False
    h = _digest_int(message)
    w = pow(sig.s, -1, N)
    pt = mul_add(h * w % N, G, sig.r * w % N, pub)
    if not pt:
        return False
    return pt.x % N == sig.r

