"""Cryptographic substrate: P-256, ECDSA, HKDF, AES-128-CTR, HMAC, CMAC."""

from .curve import (
    COMPRESSED_POINT_LEN,
    G,
    INFINITY,
    N,
    RAW_POINT_LEN,
    InvalidPointError,
    Point,
    base_mul,
    mul,
    mul_add,
)
from .ecdsa import (
    DETERMINISTIC,
    RANDOMIZED,
    SIGNATURE_LEN,
    Signature,
    SignatureEncodingError,
    ecdsa_sign,
    ecdsa_verify,
)
from .keys import (
    ENCRYPTION,
    MAC,
    Entropy,
    EntropyError,
    Scalar,
    SymmetricKey,
    SystemEntropy,
    draw,
    generate_keypair,
    seeded,
)
from .symmetric import (
    DIGEST_LEN,
    IV_LEN,
    KDF_MAX_LEN,
    kdf,
    mac_cmac,
    mac_hmac,
    sha256,
    sym_decrypt,
    sym_encrypt,
    tags_equal,
)


class ValidationError(ValueError):
    """A peer-supplied point that must not be used for key agreement."""


def ecdh(secret: Scalar, peer: Point) -> Point:
    if not isinstance(peer, Point) or not peer:
        raise ValidationError("peer point is the identity")
    return mul(secret.value, peer)

