import hashlib
import random

import pytest
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import encode_dss_signature

from ecqvkd.crypto import N, Point, ecdsa_sign
from ecqvkd.ecqv import (
    CERT_LEN,
    CaState,
    CertificateError,
    ImplicitCertificate,
    IssuanceCorruptionError,
    ca_issue,
    cert_receive,
    cert_request,
    decode_cert,
    derive_public_key,
    hash_to_scalar,
    issue_identity,
    read_cert,
    write_cert,
)

VALIDITY = (1_000, 2_000_000_000)


@pytest.fixture
def ca(rng):
    return CaState.create(b"TEST-CA-0000000\x00", rng)


def library_public(d: int) -> Point:
    nums = ec.derive_private_key(d, ec.SECP256R1()).public_key().public_numbers()
    return Point(nums.x, nums.y)


def test_layout_is_101_bytes(ca, rng):
    ident = issue_identity(ca, b"U" * 16, VALIDITY, rng)
    raw = ident.certificate.encode()
    assert len(raw) == CERT_LEN == 101
    assert raw[:16] == b"U" * 16
    assert raw[16:32] == ca.issuer_id
    assert raw[46:79] == ident.certificate.reconstruction_point.compressed()
    assert decode_cert(raw) == ident.certificate


def test_hash_is_sha256_of_encoding_mod_n(ca, rng):
    cert = issue_identity(ca, b"U" * 16, VALIDITY, rng).certificate
    expected = int.from_bytes(hashlib.sha256(cert.encode()).digest(), "big") % N
    assert hash_to_scalar(cert) == hash_to_scalar(cert.encode()) == expected


def test_reconstructed_key_matches_library_public_key(ca, rng):
    for i in range(10):
        ident = issue_identity(ca, bytes([i]) * 16, VALIDITY, rng)
        q = derive_public_key(ident.certificate, ca.public_key)
        assert q == ident.public_key == library_public(ident.private_key.value)


def test_reconstructed_key_verifies_signatures_in_library(ca, rng):
    ident = issue_identity(ca, b"S" * 16, VALIDITY, rng)
    q = derive_public_key(ident.certificate.encode(), ca.public_key)
    sig = ecdsa_sign(ident.private_key, b"hello", rng=rng)
    pub = ec.EllipticCurvePublicNumbers(q.x, q.y, ec.SECP256R1()).public_key()
    pub.verify(encode_dss_signature(sig.r, sig.s), b"hello", ec.ECDSA(hashes.SHA256()))


def test_issuance_equation_by_hand(rng):
    ca = CaState.create(b"C" * 16, rng)
    req = cert_request(b"U" * 16, rng)
    k_u = req.secret.value
    cert, r = ca_issue(ca, req, VALIDITY, rng)
    e = hash_to_scalar(cert)
    d = (e * k_u + r.value) % N
    # Q_U = e*P_U + Q_CA must be d*G: checked entirely in the library
    assert library_public(d) == derive_public_key(cert, ca.public_key)


def test_serials_increase_and_are_logged(ca, rng):
    a = issue_identity(ca, b"A" * 16, VALIDITY, rng).certificate
    b = issue_identity(ca, b"B" * 16, VALIDITY, rng).certificate
    assert b.serial == a.serial + 1
    assert ca.log[-2:] == [(b"A" * 16, a.serial), (b"B" * 16, b.serial)]


def test_wrong_ca_key_is_detected(ca, rng):
    other = CaState.create(b"X" * 16, rng)
    req = cert_request(b"U" * 16, rng)
    cert, r = ca_issue(ca, req, VALIDITY, rng)
    with pytest.raises(IssuanceCorruptionError):
        cert_receive(req.secret, cert, r, other.public_key)


@pytest.mark.parametrize("where", ["cert", "r"])
def test_every_single_byte_flip_is_detected(ca, rng, where):
    req = cert_request(b"U" * 16, rng)
    cert, r = ca_issue(ca, req, VALIDITY, rng)
    raw, rb = cert.encode(), r.to_bytes()
    target = raw if where == "cert" else rb
    for i in range(len(target)):
        bad = bytearray(target)
        bad[i] ^= 0x80
        args = (bytes(bad), rb) if where == "cert" else (raw, bytes(bad))
        with pytest.raises(IssuanceCorruptionError):
            cert_receive(req.secret, *args, ca.public_key)
    assert cert_receive(req.secret, raw, rb, ca.public_key).certificate == cert


def test_decode_rejects_bad_inputs(ca, rng):
    raw = issue_identity(ca, b"U" * 16, VALIDITY, rng).certificate.encode()
    with pytest.raises(CertificateError):
        decode_cert(raw[:-1])
    bad = bytearray(raw)
    bad[46] = 0x07  # not a compressed-point prefix
    with pytest.raises(CertificateError):
        decode_cert(bytes(bad))
    empty_window = bytearray(raw)
    empty_window[36:44] = (5).to_bytes(4, "big") * 2
    with pytest.raises(CertificateError):
        decode_cert(bytes(empty_window))


def test_validity_window(ca, rng):
    cert = issue_identity(ca, b"U" * 16, (100, 200), rng).certificate
    assert cert.is_valid_at(100) and cert.is_valid_at(199)
    assert not cert.is_valid_at(99)
    assert not cert.is_valid_at(201)


def test_out_of_range_fields_raise(ca, rng):
    req = cert_request(b"U" * 16, rng)
    with pytest.raises(CertificateError):
        ca_issue(ca, req, (0, 2**32), rng)
    with pytest.raises(ValueError):
        cert_request(b"short", rng)


@pytest.mark.parametrize("fmt", ["raw", "hex"])
def test_certificate_file_round_trip(ca, rng, tmp_path, fmt):
    cert = issue_identity(ca, b"U" * 16, VALIDITY, rng).certificate
    path = tmp_path / f"u.{fmt}"
    write_cert(cert, path, fmt)
    assert read_cert(path) == cert


def test_garbage_file_is_rejected(tmp_path):
    path = tmp_path / "junk"
    path.write_bytes(b"\xff" * 7)
    with pytest.raises(CertificateError):
        read_cert(path)


def test_issued_secret_is_wiped(ca):
    rng = random.Random(11)
    req = cert_request(b"U" * 16, rng)
    cert, r = ca_issue(ca, req, VALIDITY, rng)
    ident = cert_receive(req.secret, cert, r, ca.public_key)
    req.secret.destroy()
    assert req.secret.destroyed
    assert isinstance(ident.certificate, ImplicitCertificate)
    assert not ident.private_key.destroyed
