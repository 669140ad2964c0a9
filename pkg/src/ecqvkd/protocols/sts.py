"""Station-to-Station key agreement over ECQV implicit certificates.

Both sides contribute a fresh ephemeral point; each signs the pair of
points (own first) with its certificate key and sends the signature
encrypted under the new session key.  The peer recovers the signer's
public key from its certificate, so a signature only verifies for a
certificate the CA really issued.

    A1  ID_A, XG_A
    B1  ID_B, Cert_B, XG_B, Resp_B
    A2  Cert_A, Resp_A
    B2  ACK

Work is split into four timed operations: ``op1`` ephemeral point,
``op2`` peer public key and premaster/session keys, ``op3`` sign and
encrypt, ``op4`` decrypt and verify.
"""

from __future__ import annotations

from ..crypto import (
    IV_LEN,
    Point,
    Scalar,
    ValidationError,
    ecdh,
    ecdsa_sign,
    ecdsa_verify,
    generate_keypair,
    kdf,
    sym_decrypt,
    sym_encrypt,
)
from ..ecqv import ImplicitCertificate, derive_public_key
from .messages import ACK, CERT, ID, RESP, XG, ProtocolKind, ProtocolMessage
from .session import (
    ACK_OK,
    INITIATOR,
    Abort,
    FailureReason,
    Session,
    SessionKeys,
)

KDF_INFO = b"sts-ecqv-v1"
IV_INFO = b"sts-iv"

STS_KINDS = (ProtocolKind.STS, ProtocolKind.STS_OPT1, ProtocolKind.STS_OPT2)


class StsSession(Session):
    def __post_init__(self):
        if self.kind not in STS_KINDS:
            raise ValueError(f"{self.kind.value} is not an STS variant")
        super().__post_init__()
        self.ephemeral: Scalar | None = None
        self.own_xg: Point | None = None
        self.peer_xg: Point | None = None
        self.peer_public: Point | None = None

    # -- building blocks ----------------------------------------------

    def initiate(self) -> ProtocolMessage:
        """Fresh ephemeral key pair and the opening ``A1`` message."""
        with self._op("op1"):
            self.ephemeral, self.own_xg = generate_keypair(self.rng)
        return self._msg("A1", **{ID: self.identity.identity, XG: self.own_xg.raw()})

    def _ordered_points(self) -> bytes:
        """``XG_A || XG_B`` regardless of which side is asking."""
        if self.role == INITIATOR:
            return self.own_xg.raw() + self.peer_xg.raw()
        return self.peer_xg.raw() + self.own_xg.raw()

    def derive_session(self, peer_xg: Point) -> SessionKeys:
        self.peer_xg = peer_xg
        try:
            shared = ecdh(self.ephemeral, peer_xg)
        except ValidationError as exc:
            raise Abort(FailureReason.INVALID_EPHEMERAL, str(exc)) from None
        if not shared:
            raise Abort(FailureReason.INVALID_EPHEMERAL, "shared point is the identity")
        premaster = shared.x.to_bytes(32, "big")
        self.keys = SessionKeys.derive(premaster, self._ordered_points(), KDF_INFO)
        return self.keys

    def _iv(self, role_tag: bytes) -> bytes:
        keys = self._require_keys()
        return kdf(bytes(keys.premaster), self._ordered_points(), IV_INFO + role_tag, IV_LEN)

    def auth_response(self) -> bytes:
        """Sign ``XG_self || XG_peer`` and encrypt it under the session key."""
        keys = self._require_keys()
        signed = self.own_xg.raw() + self.peer_xg.raw()
        sig = ecdsa_sign(self.identity.private_key, signed, self.sign_mode, self.rng)
        return sym_encrypt(keys.encryption, self._iv(self.self_tag), sig.to_bytes())

    def verify_response(self, resp: bytes, cert_peer: ImplicitCertificate) -> bool:
        keys = self._require_keys()
        sig = sym_decrypt(keys.encryption, self._iv(self.peer_tag), resp)
        q_peer = self._peer_key(cert_peer)
        signed = self.peer_xg.raw() + self.own_xg.raw()
        return ecdsa_verify(q_peer, signed, sig)

    def _peer_key(self, cert: ImplicitCertificate) -> Point:
        if self.peer_public is None or cert != self.peer_cert:
            self.peer_cert = cert
            self.peer_public = derive_public_key(cert, self.ca_public)
        return self.peer_public

    def _authenticate(self, resp: bytes, cert: ImplicitCertificate) -> None:
        with self._op("op4"):
            ok = self.verify_response(resp, cert)
        if not ok:
            raise Abort(FailureReason.AUTHENTICATION, "peer signature does not verify")

    def _respond(self) -> bytes:
        with self._op("op3"):
            return self.auth_response()

    def erase(self) -> None:
        super().erase()
        if self.ephemeral is not None:
            self.ephemeral.destroy()

    def _on_established(self) -> None:
        self.ephemeral.destroy()

    # -- initiator ----------------------------------------------------

    def _send_A1(self):
        return self.initiate()

    def _recv_B1(self, msg: ProtocolMessage):
        peer_xg = self._point(msg[XG])
        self.peer_id = msg[ID]
        cert = self._peer_certificate(msg[CERT])
        with self._op("op2"):
            self._peer_key(cert)
            self.derive_session(peer_xg)
        self._authenticate(msg[RESP], cert)

    def _send_A2(self):
        resp = self._respond()
        return self._msg("A2", **{CERT: self.identity.certificate.encode(), RESP: resp})

    def _recv_B2(self, msg: ProtocolMessage):
        if msg[ACK] != ACK_OK:
            raise Abort(FailureReason.AUTHENTICATION, "responder did not acknowledge")

    # -- responder ----------------------------------------------------

    def _recv_A1(self, msg: ProtocolMessage):
        self.peer_id = msg[ID]
        self.peer_xg = self._point(msg[XG])

    def _send_B1(self):
        with self._op("op1"):
            self.ephemeral, self.own_xg = generate_keypair(self.rng)
        with self._op("op2"):
            self.derive_session(self.peer_xg)
        resp = self._respond()
        return self._msg(
            "B1",
            **{
                ID: self.identity.identity,
                CERT: self.identity.certificate.encode(),
                XG: self.own_xg.raw(),
                RESP: resp,
            },
        )

    def _recv_A2(self, msg: ProtocolMessage):
        cert = self._peer_certificate(msg[CERT])
        with self._op("op2"):
            self._peer_key(cert)
        self._authenticate(msg[RESP], cert)

    def _send_B2(self):
        return self._msg("B2", **{ACK: ACK_OK})
