import hashlib
import hmac
import random

import pytest
from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import cmac, hashes
from cryptography.hazmat.primitives import hmac as c_hmac
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import (
    decode_dss_signature,
    encode_dss_signature,
)
from cryptography.hazmat.primitives.ciphers import algorithms
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from hypothesis import given, settings
from hypothesis import strategies as st

from ecqvkd.crypto import (
    DETERMINISTIC,
    ENCRYPTION,
    G,
    INFINITY,
    KDF_MAX_LEN,
    MAC,
    N,
    RANDOMIZED,
    InvalidPointError,
    Point,
    Scalar,
    Signature,
    SymmetricKey,
    ValidationError,
    base_mul,
    ecdh,
    ecdsa_sign,
    ecdsa_verify,
    generate_keypair,
    kdf,
    mac_cmac,
    mac_hmac,
    mul,
    mul_add,
    sha256,
    sym_decrypt,
    sym_encrypt,
)

scalars = st.integers(min_value=1, max_value=N - 1)


def oracle_public(k: int) -> Point:
    nums = ec.derive_private_key(k, ec.SECP256R1()).public_key().public_numbers()
    return Point(nums.x, nums.y)


# -- hashing and key derivation ---------------------------------------


@pytest.mark.parametrize(
    "msg, digest",
    [
        (b"", "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"),
        (b"abc", "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"),
    ],
)
def test_sha256_known_answers(msg, digest):
    assert sha256(msg).hex() == digest


def test_sha256_large_input_matches_hashlib():
    blob = random.Random(1).randbytes(1 << 20)
    assert sha256(blob) == hashlib.sha256(blob).digest()


def test_hkdf_rfc5869_case1():
    okm = kdf(bytes([0x0B] * 22), bytes(range(13)), bytes(range(0xF0, 0xFA)), 42)
    assert okm.hex() == (
        "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf"
        "34007208d5b887185865"
    )


@settings(max_examples=50, deadline=None)
@given(st.binary(max_size=64), st.binary(max_size=64), st.binary(max_size=32), st.integers(1, 600))
def test_hkdf_matches_library(ikm, salt, info, n):
    ref = HKDF(hashes.SHA256(), n, salt or None, info).derive(ikm)
    assert kdf(ikm, salt, info, n) == ref


def test_hkdf_rejects_oversized_output():
    assert len(kdf(b"k", b"", b"", KDF_MAX_LEN)) == KDF_MAX_LEN
    with pytest.raises(ValueError):
        kdf(b"k", b"", b"", KDF_MAX_LEN + 1)


# -- symmetric ---------------------------------------------------------


def test_aes_ctr_sp800_38a_vector():
    key = SymmetricKey(bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c"), ENCRYPTION)
    iv = bytes.fromhex("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff")
    pt = bytes.fromhex("6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51")
    ct = sym_encrypt(key, iv, pt)
    assert ct.hex() == "874d6191b620e3261bef6864990db6ce9806f66b7970fdff8617187bb9fffdff"
    assert sym_decrypt(key, iv, ct) == pt


def test_encryption_key_role_is_enforced():
    mac_key = SymmetricKey(bytes(32), MAC)
    with pytest.raises((TypeError, ValueError)):
        sym_encrypt(mac_key, bytes(16), b"x")
    with pytest.raises(ValueError):
        SymmetricKey(bytes(32), ENCRYPTION)


@pytest.mark.parametrize(
    "msg, tag",
    [
        (b"", "bb1d6929e95937287fa37d129b756746"),
        (bytes.fromhex("6bc1bee22e409f96e93d7e117393172a"), "070a16b46b4d4144f79bdd9dd04a287c"),
    ],
)
def test_cmac_rfc4493(msg, tag):
    key = SymmetricKey(bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c"), MAC)
    assert mac_cmac(key, msg).hex() == tag


@settings(max_examples=40)
@given(st.binary(min_size=32, max_size=32), st.binary(max_size=300))
def test_hmac_matches_two_references(key, msg):
    ours = mac_hmac(SymmetricKey(key, MAC), msg)
    h = c_hmac.HMAC(key, hashes.SHA256())
    h.update(msg)
    assert ours == h.finalize() == hmac.new(key, msg, hashlib.sha256).digest()


def test_cmac_matches_library_on_random_input():
    r = random.Random(3)
    for _ in range(20):
        key, msg = r.randbytes(16), r.randbytes(r.randrange(100))
        c = cmac.CMAC(algorithms.AES(key))
        c.update(msg)
        assert mac_cmac(SymmetricKey(key, MAC), msg) == c.finalize()


def test_destroyed_key_is_zeroed():
    key = SymmetricKey(b"\x11" * 16, ENCRYPTION)
    key.destroy()
    assert key._debug_buffer() == bytes(16)


# -- curve ------------------------------------------------------------


def test_generator_and_order():
    assert base_mul(1) == G
    assert base_mul(N - 1) == -G
    assert not base_mul(N)
    assert mul(N, G) == INFINITY


@pytest.mark.parametrize("k", [1, 2, 3, 0xFF, 2**128 + 1, N - 2, N - 1])
def test_scalar_mult_edge_values_match_library(k):
    assert base_mul(k) == oracle_public(k)


@settings(max_examples=25, deadline=None)
@given(scalars)
def test_scalar_mult_matches_library(k):
    assert base_mul(k) == oracle_public(k)


@settings(max_examples=15, deadline=None)
@given(scalars, scalars, scalars)
def test_mul_add_is_linear(a, b, c):
    q = base_mul(c)
    assert mul_add(a, G, b, q) == base_mul(a) + mul(b, q)


@settings(max_examples=25, deadline=None)
@given(scalars)
def test_point_encodings_round_trip(k):
    pt = base_mul(k)
    assert Point.from_compressed(pt.compressed()) == pt
    assert Point.from_raw(pt.raw()) == pt
    lib = ec.EllipticCurvePublicKey.from_encoded_point(ec.SECP256R1(), pt.compressed())
    assert lib.public_numbers().x == pt.x


def test_off_curve_points_are_rejected():
    with pytest.raises(InvalidPointError):
        Point(G.x, G.y + 1)
    with pytest.raises(InvalidPointError):
        Point.from_raw(bytes(64))
    with pytest.raises(InvalidPointError):
        Point.from_compressed(b"\x05" + bytes(32))


def test_ecdh_agrees_with_library(rng):
    a, qa = generate_keypair(rng)
    b, qb = generate_keypair(rng)
    lib_a = ec.derive_private_key(a.value, ec.SECP256R1())
    lib_qb = ec.EllipticCurvePublicNumbers(qb.x, qb.y, ec.SECP256R1()).public_key()
    shared = lib_a.exchange(ec.ECDH(), lib_qb)
    assert ecdh(a, qb).x.to_bytes(32, "big") == shared == ecdh(b, qa).x.to_bytes(32, "big")


def test_ecdh_refuses_identity(rng):
    a, _ = generate_keypair(rng)
    with pytest.raises(ValidationError):
        ecdh(a, INFINITY)


def test_scalar_wipe():
    s = Scalar(12345)
    s.destroy()
    assert s.destroyed and s._debug_buffer() == bytes(32)
    with pytest.raises(ValueError):
        s.value
    with pytest.raises(ValueError):
        Scalar(0)
    with pytest.raises(ValueError):
        Scalar(N)


# -- ECDSA ------------------------------------------------------------


def test_rfc6979_p256_sample():
    key = Scalar(0xC9AFA9D845BA75166B5C215767B1D6934E50C3DB36E89B127B8A622B120F6721)
    sig = ecdsa_sign(key, b"sample", DETERMINISTIC)
    assert sig.r == 0xEFD48B2AACB6A8FD1140DD9CD45E81D69D2C877B56AAF991C34D0EA84EAF3716
    assert sig.s == 0xF7CB1C942D657C41D436C7A1B6E29F65F3E900DBB9AFF4064DC4AB2F843ACDA8


@settings(max_examples=15, deadline=None)
@given(scalars, st.binary(max_size=128))
def test_deterministic_signature_equals_library(k, msg):
    lib = ec.derive_private_key(k, ec.SECP256R1())
    der = lib.sign(msg, ec.ECDSA(hashes.SHA256(), deterministic_signing=True))
    ours = ecdsa_sign(Scalar(k), msg, DETERMINISTIC)
    assert (ours.r, ours.s) == decode_dss_signature(der)


@settings(max_examples=15, deadline=None)
@given(scalars, st.binary(max_size=128), st.integers(0, 2**32))
def test_library_verifies_our_randomized_signatures(k, msg, seed):
    sig = ecdsa_sign(Scalar(k), msg, RANDOMIZED, random.Random(seed))
    pub = ec.derive_private_key(k, ec.SECP256R1()).public_key()
    pub.verify(encode_dss_signature(sig.r, sig.s), msg, ec.ECDSA(hashes.SHA256()))
    assert ecdsa_verify(Scalar(k).public(), msg, sig.to_bytes())


def test_we_verify_library_signatures_and_reject_forgeries(rng):
    key, pub = generate_keypair(rng)
    lib = ec.derive_private_key(key.value, ec.SECP256R1())
    r, s = decode_dss_signature(lib.sign(b"msg", ec.ECDSA(hashes.SHA256())))
    assert ecdsa_verify(pub, b"msg", Signature(r, s))
    assert not ecdsa_verify(pub, b"msh", Signature(r, s))
    assert not ecdsa_verify(pub, b"msg", Signature(r, (s + 1) % N or 1))
    assert not ecdsa_verify(pub, b"msg", b"\x00" * 64)
    assert not ecdsa_verify(pub, b"msg", b"short")
    with pytest.raises(InvalidSignature):
        lib.public_key().verify(
            encode_dss_signature(r, (s + 1) % N), b"msh", ec.ECDSA(hashes.SHA256())
        )


def test_randomized_mode_gives_fresh_signatures(rng):
    key, pub = generate_keypair(rng)
    s1 = ecdsa_sign(key, b"m", RANDOMIZED, rng)
    s2 = ecdsa_sign(key, b"m", RANDOMIZED, rng)
    assert s1 != s2
    assert ecdsa_verify(pub, b"m", s1) and ecdsa_verify(pub, b"m", s2)
