"""Static key derivation handshakes used as baselines.

All three derive the premaster from long-term certificate keys,
``x(d_self * Q_peer)``, so it stays the same for as long as the
certificates do; only the KDF salt (the exchanged nonces) changes per
session.

* S-ECDSA: nonces, then certificates with ECDSA signatures over
  ``nonce_A || nonce_B || ID_signer``; an optional extension adds two
  HMAC-authenticated finished messages.
* SCIANC: nonces and certificates in the first round trip, then HMAC
  confirmations under the session key.  The premaster is computed with a
  single joint multiplication ``(d*e)*P_U + d*Q_CA``.
* PORAMB: hello exchange, then certificates and nonces authenticated
  with a pairwise pre-shared MAC key, then finished messages under the
  session key.  Peer key reconstruction and the DH product are separate
  multiplications.
"""

from __future__ import annotations

from ..crypto import (
    N,
    Point,
    ValidationError,
    ecdh,
    ecdsa_sign,
    ecdsa_verify,
    mac_hmac,
    mul_add,
    sha256,
    tags_equal,
)
from ..crypto import draw as _draw
from ..ecqv import ImplicitCertificate, derive_public_key, hash_to_scalar
from .messages import (
    ACK,
    AUTH_MAC,
    CERT,
    EXT_FIN,
    FINISH,
    HELLO,
    ID,
    MAC,
    NONCE,
    SIGN,
    ProtocolKind,
    ProtocolMessage,
)
from .session import ACK_OK, INITIATOR, Abort, FailureReason, Session, SessionKeys

SECDSA_INFO = b"secdsa-v1"
SCIANC_INFO = b"scianc-v1"
PORAMB_INFO = b"poramb-v1"

NONCE_LEN = 32
FINISH_TYPE = 0x14
FINISH_RESERVED = 164


def premaster_from(point: Point) -> bytes:
    if not point:
        raise Abort(FailureReason.INVALID_EPHEMERAL, "static DH produced the identity")
    return point.x.to_bytes(32, "big")


class StaticSession(Session):
    kdf_info = b""

    def __post_init__(self):
        super().__post_init__()
        self.nonce: bytes | None = None
        self.peer_nonce: bytes | None = None
        self.peer_public: Point | None = None

    def _fresh_nonce(self) -> bytes:
        self.nonce = _draw(self.rng, NONCE_LEN)
        return self.nonce

    def _nonce_pair(self) -> bytes:
        if self.role == INITIATOR:
            return self.nonce + self.peer_nonce
        return self.peer_nonce + self.nonce

    def _peer_key(self, cert: ImplicitCertificate) -> Point:
        self.peer_public = derive_public_key(cert, self.ca_public)
        return self.peer_public

    def static_premaster(self, cert: ImplicitCertificate) -> bytes:
        """Reconstruct the peer key, then multiply by our private key."""
        self._peer_key(cert)
        return self._dh_peer()

    def _dh_peer(self) -> bytes:
        try:
            shared = ecdh(self.identity.private_key, self.peer_public)
        except ValidationError as exc:
            raise Abort(FailureReason.AUTHENTICATION, str(exc)) from None
        return premaster_from(shared)

    def _derive(self, premaster: bytes) -> SessionKeys:
        self.keys = SessionKeys.derive(premaster, self._nonce_pair(), self.kdf_info)
        return self.keys


class SEcdsaSession(StaticSession):
    kdf_info = SECDSA_INFO

    def __post_init__(self):
        if self.kind not in (ProtocolKind.S_ECDSA, ProtocolKind.S_ECDSA_EXT):
            raise ValueError(f"{self.kind.value} is not an S-ECDSA variant")
        super().__post_init__()

    @property
    def extended(self) -> bool:
        return self.kind is ProtocolKind.S_ECDSA_EXT

    def _signed_part(self, signer_id: bytes) -> bytes:
        return self._nonce_pair() + signer_id

    def _sign(self) -> bytes:
        sig = ecdsa_sign(
            self.identity.private_key,
            self._signed_part(self.identity.identity),
            self.sign_mode,
            self.rng,
        )
        return sig.to_bytes()

    def _check_signature(self, cert: ImplicitCertificate, sig: bytes) -> None:
        q = self._peer_key(cert)
        if not ecdsa_verify(q, self._signed_part(cert.subject_id), sig):
            raise Abort(FailureReason.AUTHENTICATION, "peer signature does not verify")

    def _ext_fin(self) -> bytes:
        keys = self._require_keys()
        tag = mac_hmac(keys.mac, self.transcript_bytes() + self.self_tag)
        return tag + sha256(self.peer_cert.encode()) + self.peer_nonce

    def _check_ext_fin(self, fin: bytes, transcript: bytes) -> None:
        keys = self._require_keys()
        tag = mac_hmac(keys.mac, transcript + self.peer_tag)
        ok = (
            tags_equal(fin[:32], tag)
            and tags_equal(fin[32:64], sha256(self.identity.certificate.encode()))
            and tags_equal(fin[64:], self.nonce)
        )
        if not ok:
            raise Abort(FailureReason.AUTHENTICATION, "finished message does not verify")

    def _transcript_before_last(self) -> bytes:
        return b"".join(msg.encode() for _, msg in self.transcript[:-1])

    # initiator
    def _send_A1(self):
        return self._msg("A1", **{ID: self.identity.identity, NONCE: self._fresh_nonce()})

    def _recv_B1(self, msg: ProtocolMessage):
        self.peer_id = msg[ID]
        self.peer_nonce = msg[NONCE]
        cert = self._peer_certificate(msg[CERT])
        self._check_signature(cert, msg[SIGN])
        self._derive(self._dh_peer())

    def _send_A2(self):
        return self._msg(
            "A2", **{CERT: self.identity.certificate.encode(), SIGN: self._sign()}
        )

    def _recv_B2(self, msg: ProtocolMessage):
        if msg[ACK] != ACK_OK:
            raise Abort(FailureReason.AUTHENTICATION, "responder did not acknowledge")
        if self.extended:
            self._check_ext_fin(msg[EXT_FIN], self._transcript_before_last())

    def _send_A3(self):
        return self._msg("A3", **{EXT_FIN: self._ext_fin()})

    # responder
    def _recv_A1(self, msg: ProtocolMessage):
        self.peer_id = msg[ID]
        self.peer_nonce = msg[NONCE]

    def _send_B1(self):
        self._fresh_nonce()
        return self._msg(
            "B1",
            **{
                ID: self.identity.identity,
                CERT: self.identity.certificate.encode(),
                SIGN: self._sign(),
                NONCE: self.nonce,
            },
        )

    def _recv_A2(self, msg: ProtocolMessage):
        cert = self._peer_certificate(msg[CERT])
        self._check_signature(cert, msg[SIGN])
        self._derive(self._dh_peer())

    def _send_B2(self):
        values = {ACK: ACK_OK}
        if self.extended:
            values[EXT_FIN] = self._ext_fin()
        return self._msg("B2", **values)

    def _recv_A3(self, msg: ProtocolMessage):
        self._check_ext_fin(msg[EXT_FIN], self._transcript_before_last())


class SciancSession(StaticSession):
    kdf_info = SCIANC_INFO

    def __post_init__(self):
        if self.kind is not ProtocolKind.SCIANC:
            raise ValueError(f"{self.kind.value} is not SCIANC")
        super().__post_init__()

    def static_premaster(self, cert: ImplicitCertificate) -> bytes:
        # d*(e*P_U + Q_CA) evaluated as one joint multiplication
        d = self.identity.private_key.value
        e = hash_to_scalar(cert)
        return premaster_from(
            mul_add(d * e % N, cert.reconstruction_point, d, self.ca_public)
        )

    def _auth_mac(self, tag: bytes) -> bytes:
        keys = self._require_keys()
        return mac_hmac(keys.mac, self.transcript_bytes() + tag)

    def _hello(self, label: str):
        return self._msg(
            label,
            **{
                ID: self.identity.identity,
                NONCE: self._fresh_nonce(),
                CERT: self.identity.certificate.encode(),
            },
        )

    def _check_auth_mac(self, received: bytes) -> None:
        keys = self._require_keys()
        before = b"".join(msg.encode() for _, msg in self.transcript[:-1])
        if not tags_equal(received, mac_hmac(keys.mac, before + self.peer_tag)):
            raise Abort(FailureReason.AUTHENTICATION, "Auth_MAC mismatch")

    def _take_peer(self, msg: ProtocolMessage) -> ImplicitCertificate:
        self.peer_id = msg[ID]
        self.peer_nonce = msg[NONCE]
        return self._peer_certificate(msg[CERT])

    # initiator
    def _send_A1(self):
        return self._hello("A1")

    def _recv_B1(self, msg: ProtocolMessage):
        cert = self._take_peer(msg)
        self._derive(self.static_premaster(cert))

    def _send_A2(self):
        return self._msg("A2", **{AUTH_MAC: self._auth_mac(self.self_tag)})

    def _recv_B2(self, msg: ProtocolMessage):
        self._check_auth_mac(msg[AUTH_MAC])

    # responder
    def _recv_A1(self, msg: ProtocolMessage):
        self._take_peer(msg)

    def _send_B1(self):
        out = self._hello("B1")
        self._derive(self.static_premaster(self.peer_cert))
        return out

    def _recv_A2(self, msg: ProtocolMessage):
        self._check_auth_mac(msg[AUTH_MAC])

    def _send_B2(self):
        return self._msg("B2", **{AUTH_MAC: self._auth_mac(self.self_tag)})


class PorambSession(StaticSession):
    kdf_info = PORAMB_INFO

    def __post_init__(self):
        if self.kind is not ProtocolKind.PORAMB:
            raise ValueError(f"{self.kind.value} is not PORAMB")
        super().__post_init__()
        self.hello: bytes | None = None
        self.peer_hello: bytes | None = None

    def _hellos(self) -> bytes:
        if self.role == INITIATOR:
            return self.hello + self.peer_hello
        return self.peer_hello + self.hello

    def _psk_mac(self, cert: bytes, nonce: bytes, tag: bytes) -> bytes:
        if self.psk is None:
            raise Abort(FailureReason.PROVISIONING, "no pre-shared key for this peer")
        return mac_hmac(self.psk, cert + nonce + self._hellos() + tag)

    def _cert_msg(self, label: str) -> ProtocolMessage:
        cert = self.identity.certificate.encode()
        nonce = self._fresh_nonce()
        return self._msg(
            label, **{CERT: cert, NONCE: nonce, MAC: self._psk_mac(cert, nonce, self.self_tag)}
        )

    def _take_cert_msg(self, msg: ProtocolMessage) -> None:
        expected = self._psk_mac(msg[CERT], msg[NONCE], self.peer_tag)
        if not tags_equal(msg[MAC], expected):
            raise Abort(FailureReason.AUTHENTICATION, "pre-shared-key MAC mismatch")
        self._peer_certificate(msg[CERT])
        self.peer_nonce = msg[NONCE]

    def _finish(self) -> bytes:
        keys = self._require_keys()
        tag = mac_hmac(keys.mac, self.transcript_bytes() + self.self_tag)
        return bytes([FINISH_TYPE]) + tag + bytes(FINISH_RESERVED)

    def _check_finish(self, fin: bytes) -> None:
        keys = self._require_keys()
        before = b"".join(msg.encode() for _, msg in self.transcript[:-1])
        expected = bytes([FINISH_TYPE]) + mac_hmac(keys.mac, before + self.peer_tag)
        if fin[0] != FINISH_TYPE or any(fin[33:]):
            raise Abort(FailureReason.MALFORMED, "bad Finish framing")
        if not tags_equal(fin[:33], expected):
            raise Abort(FailureReason.AUTHENTICATION, "Finish MAC mismatch")

    def _hello_msg(self, label: str) -> ProtocolMessage:
        self.hello = _draw(self.rng, 32)
        return self._msg(label, **{HELLO: self.hello, ID: self.identity.identity})

    def _take_hello(self, msg: ProtocolMessage) -> None:
        self.peer_hello = msg[HELLO]
        self.peer_id = msg[ID]

    # initiator
    def _send_A1(self):
        return self._hello_msg("A1")

    def _recv_B1(self, msg):
        self._take_hello(msg)

    def _send_A2(self):
        return self._cert_msg("A2")

    def _recv_B2(self, msg):
        self._take_cert_msg(msg)
        self._derive(self.static_premaster(self.peer_cert))

    def _send_A3(self):
        return self._msg("A3", **{FINISH: self._finish()})

    def _recv_B3(self, msg):
        self._check_finish(msg[FINISH])

    # responder
    def _recv_A1(self, msg):
        self._take_hello(msg)

    def _send_B1(self):
        return self._hello_msg("B1")

    def _recv_A2(self, msg):
        self._take_cert_msg(msg)

    def _send_B2(self):
        out = self._cert_msg("B2")
        self._derive(self.static_premaster(self.peer_cert))
        return out

    def _recv_A3(self, msg):
        self._check_finish(msg[FINISH])

    def _send_B3(self):
        return self._msg("B3", **{FINISH: self._finish()})
