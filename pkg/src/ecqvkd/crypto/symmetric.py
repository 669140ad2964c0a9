"""Hash, KDF, cipher and MAC primitives with fixed encodings.

SHA-256 and HMAC come from the standard library, AES and CMAC from
``cryptography``.  The KDF is HKDF (extract-then-expand over
HMAC-SHA256), written out here so it can be checked against a separate
implementation.
"""

from __future__ import annotations

import hashlib
import hmac as _hmac

from cryptography.hazmat.primitives import cmac as _cmac
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .keys import ENCRYPTION, MAC, SymmetricKey

DIGEST_LEN = 32
KDF_MAX_LEN = 255 * DIGEST_LEN
IV_LEN = 16


def sha256(message: bytes) -> bytes:
    return hashlib.sha256(message).digest()


def kdf(ikm: bytes, salt: bytes, info: bytes, out_len: int) -> bytes:
    if not 0 <= out_len <= KDF_MAX_LEN:
        raise ValueError(f"kdf output length must be in [0, {KDF_MAX_LEN}]")
    prk = _hmac.new(salt or bytes(DIGEST_LEN), ikm, hashlib.sha256).digest()
    out = b""
    block = b""
    counter = 1
    while len(out) < out_len:
        block = _hmac.new(prk, block + info + bytes([counter]), hashlib.sha256).digest()
        out += block
        counter += 1
    return out[:out_len]


def _aes_ctr(key: SymmetricKey, iv: bytes, data: bytes) -> bytes:
    if key.role != ENCRYPTION:
        raise ValueError("cipher needs an encryption-role key")
    if len(iv) != IV_LEN:
        raise ValueError("counter block must be 16 bytes")
    ctx = Cipher(algorithms.AES(key.material), modes.CTR(iv)).encryptor()
    return ctx.update(data) + ctx.finalize()


def sym_encrypt(key: SymmetricKey, iv: bytes, plaintext: bytes) -> bytes:
    """AES-128-CTR; the output has the same length as the input."""
    return _aes_ctr(key, iv, plaintext)


def sym_decrypt(key: SymmetricKey, iv: bytes, ciphertext: bytes) -> bytes:
    return _aes_ctr(key, iv, ciphertext)


def mac_hmac(key: SymmetricKey, message: bytes) -> bytes:
    if key.role != MAC:
        raise ValueError("HMAC needs a mac-role key")
    return _hmac.new(key.material, message, hashlib.sha256).digest()


def mac_cmac(key: SymmetricKey, message: bytes) -> bytes:
    if key.role != MAC or len(key) != 16:
        raise ValueError("CMAC needs a 16-byte mac-role key")
    c = _cmac.CMAC(algorithms.AES(key.material))
    c.update(message)
    return c.finalize()


def tags_equal(a: bytes, b: bytes) -> bool:
    return _hmac.compare_digest(a, b)
