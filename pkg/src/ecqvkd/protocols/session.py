"""Shared machinery for the handshake state machines.

Every protocol is a fixed sequence of labelled steps.  A session is driven
by :meth:`Session.step`: hand it the peer's message (or ``None`` for the
initiator's opening move) and it returns the next outgoing message, if it
is this side's turn, plus an event.  Events are ``None`` (keep going),
:data:`ESTABLISHED`, or a :class:`Failure`.
"""

from __future__ import annotations

import enum
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import NamedTuple

from ..crypto import (
    ENCRYPTION,
    MAC,
    RANDOMIZED,
    Entropy,
    InvalidPointError,
    Point,
    SymmetricKey,
    kdf,
    sha256,
)
from ..ecqv import CertificateError, CertifiedIdentity, ImplicitCertificate, decode_cert
from .messages import MessageFormatError, ProtocolKind, ProtocolMessage, flow, sender_of

INITIATOR = "initiator"
RESPONDER = "responder"
ROLE_BYTE = {INITIATOR: b"A", RESPONDER: b"B"}
ACK_OK = b"\x01"
ENC_KEY_LEN = 16
MAC_KEY_LEN = 32
SESSION_KEY_LEN = ENC_KEY_LEN + MAC_KEY_LEN


class FailureReason(str, enum.Enum):
    OUT_OF_ORDER = "out-of-order"
    MALFORMED = "malformed"
    AUTHENTICATION = "authentication"
    INVALID_EPHEMERAL = "invalid-ephemeral"
    PROVISIONING = "provisioning"


class Failure(NamedTuple):
    reason: FailureReason
    detail: str = ""

    def __str__(self):
        return f"{self.reason.value}: {self.detail}" if self.detail else self.reason.value


ESTABLISHED = "established"


class Phase(str, enum.Enum):
    RUNNING = "running"
    ESTABLISHED = "established"
    FAILED = "failed"


class Abort(Exception):
    """Raised inside a handler to fail the session with a reason."""

    def __init__(self, reason: FailureReason, detail: str = ""):
        super().__init__(detail)
        self.failure = Failure(reason, detail)


@dataclass(eq=False)
class SessionKeys:
    premaster: bytearray
    encryption: SymmetricKey
    mac: SymmetricKey

    @classmethod
    def derive(cls, premaster: bytes, salt: bytes, info: bytes) -> SessionKeys:
        okm = kdf(premaster, salt, info, SESSION_KEY_LEN)
        return cls(
            bytearray(premaster),
            SymmetricKey(okm[:ENC_KEY_LEN], ENCRYPTION),
            SymmetricKey(okm[ENC_KEY_LEN:], MAC),
        )

    def session_key_bytes(self) -> bytes:
        return self.encryption.material + self.mac.material

    def digest(self) -> str:
        """Hex SHA-256 of the session key; safe to log or compare."""
        return sha256(self.session_key_bytes()).hex()

    def premaster_digest(self) -> str:
        return sha256(bytes(self.premaster)).hex()

    def destroy(self) -> None:
        for i in range(len(self.premaster)):
            self.premaster[i] = 0
        self.encryption.destroy()
        self.mac.destroy()

    @property
    def destroyed(self) -> bool:
        return not any(self.premaster) and self.encryption.destroyed and self.mac.destroyed


@dataclass(eq=False)
class Session:
    kind: ProtocolKind
    role: str
    identity: CertifiedIdentity
    ca_public: Point
    rng: Entropy
    now: int
    psk: SymmetricKey | None = None
    sign_mode: str = RANDOMIZED
    phase: Phase = Phase.RUNNING
    failure: Failure | None = None
    keys: SessionKeys | None = None
    transcript: list[tuple[str, ProtocolMessage]] = field(default_factory=list)
    op_time: dict[str, float] = field(default_factory=dict)
    compute_time: float = 0.0

    def __post_init__(self):
        if self.role not in (INITIATOR, RESPONDER):
            raise ValueError(f"role must be initiator or responder, not {self.role!r}")
        self._flow = flow(self.kind)
        self._pos = 0
        self.peer_id: bytes | None = None
        self.peer_cert: ImplicitCertificate | None = None

    # -- driver --------------------------------------------------------

    @property
    def expected(self) -> str | None:
        """Label of the next step on the wire, or None when finished."""
        return self._flow[self._pos] if self._pos < len(self._flow) else None

    @property
    def awaiting_peer(self) -> bool:
        label = self.expected
        return label is not None and sender_of(label) != self.role

    def step(
        self, incoming: ProtocolMessage | None = None
    ) -> tuple[ProtocolMessage | None, str | Failure | None]:
        started = time.perf_counter()
        try:
            return self._step(incoming)
        finally:
            self.compute_time += time.perf_counter() - started

    def receive_bytes(self, data: bytes):
        """Decode raw wire bytes as the expected step and process them."""
        label = self.expected
        if self.phase is not Phase.RUNNING:
            return None, Failure(FailureReason.OUT_OF_ORDER, f"session {self.phase.value}")
        if label is None or not self.awaiting_peer:
            return None, self._fail(Failure(FailureReason.OUT_OF_ORDER, "no message expected"))
        try:
            msg = ProtocolMessage.decode(self.kind, label, data)
        except MessageFormatError as exc:
            return None, self._fail(Failure(FailureReason.MALFORMED, str(exc)))
        return self.step(msg)

    def _step(self, incoming):
        if self.phase is not Phase.RUNNING:
            # a finished session keeps its state; the stray message is just refused
            return None, Failure(FailureReason.OUT_OF_ORDER, f"session {self.phase.value}")
        label = self.expected
        try:
            if incoming is None:
                if label is None or sender_of(label) != self.role:
                    raise Abort(FailureReason.OUT_OF_ORDER, f"not our turn (expecting {label})")
            else:
                if (
                    label is None
                    or sender_of(label) == self.role
                    or incoming.label != label
                    or incoming.kind.family != self.kind.family
                ):
                    raise Abort(
                        FailureReason.OUT_OF_ORDER,
                        f"got {incoming.label}, expecting {label}",
                    )
                self.transcript.append(("recv", incoming))
                getattr(self, f"_recv_{label}")(incoming)
                self._pos += 1
            outgoing = None
            label = self.expected
            if label is not None and sender_of(label) == self.role:
                outgoing = getattr(self, f"_send_{label}")()
                self.transcript.append(("sent", outgoing))
                self._pos += 1
        except Abort as exc:
            return None, self._fail(exc.failure)
        if self.expected is None:
            self.phase = Phase.ESTABLISHED
            self._on_established()
            return outgoing, ESTABLISHED
        return outgoing, None

    def _fail(self, failure: Failure) -> Failure:
        if self.phase is Phase.RUNNING:
            self.phase = Phase.FAILED
            self.failure = failure
        self.erase()
        return failure

    def erase(self) -> None:
        """Overwrite all derived and ephemeral secrets held by the session."""
        if self.keys is not None:
            self.keys.destroy()

    def _on_established(self) -> None:
        pass

    # -- helpers for protocol handlers ----------------------------------

    @contextmanager
    def _op(self, name: str):
        started = time.perf_counter()
        try:
            yield
        finally:
            self.op_time[name] = self.op_time.get(name, 0.0) + time.perf_counter() - started

    def _msg(self, label: str, **values: bytes) -> ProtocolMessage:
        return ProtocolMessage.build(self.kind, label, **values)

    @property
    def self_tag(self) -> bytes:
        return ROLE_BYTE[self.role]

    @property
    def peer_tag(self) -> bytes:
        return ROLE_BYTE[RESPONDER if self.role == INITIATOR else INITIATOR]

    def transcript_bytes(self) -> bytes:
        return b"".join(msg.encode() for _, msg in self.transcript)

    def _peer_certificate(self, raw: bytes, claimed_id: bytes | None = None) -> ImplicitCertificate:
        try:
            cert = decode_cert(raw)
        except CertificateError as exc:
            raise Abort(FailureReason.MALFORMED, f"peer certificate: {exc}") from None
        expected_id = claimed_id if claimed_id is not None else self.peer_id
        if expected_id is not None and cert.subject_id != expected_id:
            raise Abort(FailureReason.AUTHENTICATION, "certificate subject does not match peer ID")
        if not cert.is_valid_at(self.now):
            raise Abort(FailureReason.AUTHENTICATION, "peer certificate outside validity window")
        self.peer_cert = cert
        return cert

    @staticmethod
    def _point(raw: bytes) -> Point:
        try:
            return Point.from_raw(raw)
        except InvalidPointError as exc:
            raise Abort(FailureReason.MALFORMED, f"bad point: {exc}") from None

    def _require_keys(self) -> SessionKeys:
        if self.keys is None:
            raise Abort(FailureReason.OUT_OF_ORDER, "session keys not derived yet")
        return self.keys

    @property
    def established(self) -> bool:
        return self.phase is Phase.ESTABLISHED


def step(session: Session, incoming: ProtocolMessage | None = None):
    """Functional form of :meth:`Session.step`: ``(session, outgoing, event)``."""
    outgoing, event = session.step(incoming)
    return session, outgoing, event
