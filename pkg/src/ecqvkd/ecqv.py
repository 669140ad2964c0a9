"""ECQV implicit certificates.

A requester commits to ``R_U = k_U*G``; the CA answers with a certificate
carrying ``P_U = R_U + k_CA*G`` and a private-key contribution
``r = e*k_CA + d_CA`` where ``e`` is the certificate hash reduced mod n.
The requester's key pair then is ``d_U = e*k_U + r`` and
``Q_U = e*P_U + Q_CA``, and anybody holding the certificate and ``Q_CA``
can recompute ``Q_U`` without a CA signature.

Certificates use a fixed 101-byte layout::

    subject_id(16) | issuer_id(16) | serial(4) | valid_from(4) | valid_to(4)
    | curve_id(1) | key_usage(1) | P_U compressed(33) | extensions(22)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

from .crypto import (
    COMPRESSED_POINT_LEN,
    N,
    Entropy,
    InvalidPointError,
    Point,
    Scalar,
    base_mul,
    mul,
    sha256,
)

ID_LEN = 16
CERT_LEN = 101
EXTENSIONS_LEN = 22
CURVE_SECP256R1 = 0x17
KEY_USAGE_KEY_AGREEMENT = 0x08 | 0x80  # key agreement + digital signature

_HEADER = struct.Struct(">16s16sIIIBB")
assert _HEADER.size + COMPRESSED_POINT_LEN + EXTENSIONS_LEN == CERT_LEN


class CertificateError(ValueError):
    """Malformed certificate encoding or field values."""


class IssuanceCorruptionError(ValueError):
    """Reconstructed key pair is inconsistent (tampered certificate or r)."""


@dataclass(frozen=True)
class ImplicitCertificate:
    subject_id: bytes
    issuer_id: bytes
    serial: int
    valid_from: int
    valid_to: int
    reconstruction_point: Point
    curve_id: int = CURVE_SECP256R1
    key_usage: int = KEY_USAGE_KEY_AGREEMENT
    extensions: bytes = bytes(EXTENSIONS_LEN)

    def __post_init__(self):
        if len(self.subject_id) != ID_LEN or len(self.issuer_id) != ID_LEN:
            raise CertificateError("identities must be 16 bytes")
        if len(self.extensions) != EXTENSIONS_LEN:
            raise CertificateError("extensions field must be 22 bytes")
        for name in ("serial", "valid_from", "valid_to"):
            if not 0 <= getattr(self, name) <= 0xFFFFFFFF:
                raise CertificateError(f"{name} does not fit in 32 bits")
        if not self.valid_from < self.valid_to:
            raise CertificateError("validity window is empty")
        if not self.reconstruction_point:
            raise CertificateError("reconstruction point is the identity")

    def encode(self) -> bytes:
        return (
            _HEADER.pack(
                self.subject_id,
                self.issuer_id,
                self.serial,
                self.valid_from,
                self.valid_to,
                self.curve_id,
                self.key_usage,
            )
            + self.reconstruction_point.compressed()
            + self.extensions
        )

    @classmethod
    def decode(cls, data: bytes) -> ImplicitCertificate:
        if len(data) != CERT_LEN:
            raise CertificateError(f"certificate must be {CERT_LEN} bytes, got {len(data)}")
        fields = _HEADER.unpack_from(data)
        off = _HEADER.size
        try:
            point = Point.from_compressed(data[off : off + COMPRESSED_POINT_LEN])
        except InvalidPointError as exc:
            raise CertificateError(f"bad reconstruction point: {exc}") from exc
        return cls(
            subject_id=fields[0],
            issuer_id=fields[1],
            serial=fields[2],
            valid_from=fields[3],
            valid_to=fields[4],
            curve_id=fields[5],
            key_usage=fields[6],
            reconstruction_point=point,
            extensions=data[off + COMPRESSED_POINT_LEN :],
        )

    def digest(self) -> bytes:
        return sha256(self.encode())

    def is_valid_at(self, now: int) -> bool:
        return self.valid_from <= now < self.valid_to


def encode_cert(cert: ImplicitCertificate) -> bytes:
    return cert.encode()


def decode_cert(data: bytes) -> ImplicitCertificate:
    return ImplicitCertificate.decode(data)


def hash_to_scalar(cert: ImplicitCertificate | bytes) -> int:
    raw = cert if isinstance(cert, (bytes, bytearray)) else cert.encode()
    return int.from_bytes(sha256(bytes(raw)), "big") % N


@dataclass
class CertificateRequest:
    identity: bytes
    commitment: Point
    secret: Scalar = field(repr=False)

    def public_part(self) -> tuple[bytes, Point]:
        return self.identity, self.commitment


def cert_request(identity: bytes, rng: Entropy) -> CertificateRequest:
    if len(identity) != ID_LEN:
        raise ValueError(f"identity must be {ID_LEN} bytes, got {len(identity)}")
    k = Scalar.random(rng)
    return CertificateRequest(identity, k.public(), k)


@dataclass
class CaState:
    private_key: Scalar = field(repr=False)
    public_key: Point
    issuer_id: bytes
    next_serial: int = 1
    log: list[tuple[bytes, int]] = field(default_factory=list)

    @classmethod
    def create(cls, issuer_id: bytes, rng: Entropy) -> CaState:
        if len(issuer_id) != ID_LEN:
            raise ValueError("issuer id must be 16 bytes")
        d = Scalar.random(rng)
        return cls(d, d.public(), issuer_id)


def ca_issue(
    ca: CaState,
    request: CertificateRequest,
    validity: tuple[int, int],
    rng: Entropy,
) -> tuple[ImplicitCertificate, Scalar]:
    """Issue a certificate for a request; returns ``(cert, r)``.

    Only the public part of the request (identity, ``R_U``) is used.
    """
    identity, commitment = request.public_part()
    if len(identity) != ID_LEN:
        raise ValueError("identity must be 16 bytes")
    valid_from, valid_to = validity
    if not valid_from < valid_to:
        raise ValueError("validity window is empty")
    serial = ca.next_serial
    while True:
        k_ca = Scalar.random(rng)
        p_u = commitment + base_mul(k_ca.value)
        if not p_u:
            continue
        cert = ImplicitCertificate(
            subject_id=identity,
            issuer_id=ca.issuer_id,
            serial=serial,
            valid_from=valid_from,
            valid_to=valid_to,
            reconstruction_point=p_u,
        )
        e = hash_to_scalar(cert)
        r = (e * k_ca.value + ca.private_key.value) % N
        k_ca.destroy()
        if e == 0 or r == 0:
            continue
        break
    ca.next_serial += 1
    ca.log.append((identity, serial))
    return cert, Scalar(r)


@dataclass
class CertifiedIdentity:
    certificate: ImplicitCertificate
    private_key: Scalar = field(repr=False)
    public_key: Point

    @property
    def identity(self) -> bytes:
        return self.certificate.subject_id

    def destroy(self) -> None:
        self.private_key.destroy()


def derive_public_key(cert: ImplicitCertificate | bytes, ca_public: Point) -> Point:
    """``Q = e*P_U + Q_CA`` with ``e`` the hash of the encoded certificate."""
    if isinstance(cert, (bytes, bytearray)):
        cert = decode_cert(bytes(cert))
    e = hash_to_scalar(cert)
    return mul(e, cert.reconstruction_point) + ca_public


def cert_receive(
    secret: Scalar,
    cert: ImplicitCertificate | bytes,
    r: Scalar | int | bytes,
    ca_public: Point,
) -> CertifiedIdentity:
    """Requester side: ``d = e*k + r``, then check ``d*G`` against the
    public key the certificate implies.  Any damage to ``cert`` or ``r`` in
    transit surfaces as :class:`IssuanceCorruptionError`."""
    if isinstance(cert, (bytes, bytearray)):
        try:
            cert = decode_cert(bytes(cert))
        except CertificateError as exc:
            raise IssuanceCorruptionError(f"certificate does not decode: {exc}") from None
    if isinstance(r, (bytes, bytearray)):
        r_int = int.from_bytes(r, "big")
    else:
        r_int = r.value if isinstance(r, Scalar) else r
    if not 0 < r_int < N:
        raise IssuanceCorruptionError("reconstruction value outside [1, n-1]")
    e = hash_to_scalar(cert)
    d = (e * secret.value + r_int) % N
    if d == 0:
        raise IssuanceCorruptionError("reconstructed private key is zero")
    q = derive_public_key(cert, ca_public)
    if not q or base_mul(d) != q:
        raise IssuanceCorruptionError("reconstructed key pair does not match certificate")
    return CertifiedIdentity(cert, Scalar(d), q)


def issue_identity(
    ca: CaState,
    identity: bytes,
    validity: tuple[int, int],
    rng: Entropy,
) -> CertifiedIdentity:
    """Full request / issue / receive round, all in memory."""
    req = cert_request(identity, rng)
    cert, r = ca_issue(ca, req, validity, rng)
    ident = cert_receive(req.secret, cert, r, ca.public_key)
    req.secret.destroy()
    return ident


def write_cert(cert: ImplicitCertificate, path: str | Path, fmt: str = "raw") -> None:
    data = cert.encode()
    if fmt == "raw":
        Path(path).write_bytes(data)
    elif fmt == "hex":
        Path(path).write_text(data.hex() + "\n")
    else:
        raise ValueError(f"unknown certificate file format {fmt!r}")


def read_cert(path: str | Path) -> ImplicitCertificate:
    """Read a certificate file, raw (101 bytes) or hex text."""
    data = Path(path).read_bytes()
    if len(data) != CERT_LEN:
        try:
            data = bytes.fromhex(data.decode("ascii").strip())
        except (UnicodeDecodeError, ValueError) as exc:
            raise CertificateError("file is neither raw nor hex certificate") from exc
    return decode_cert(data)
