"""In-memory deployment and handshake driver.

``provision`` plays the deployment and certificate-derivation phases: a CA
and two devices with ECQV identities (plus a pairwise pre-shared MAC key
for protocols that need one).  ``run_handshake`` then drives a pair of
sessions over a :class:`~ecqvkd.transport.Channel`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .crypto import MAC, RANDOMIZED, Entropy, SymmetricKey, SystemEntropy, draw, seeded
from .ecqv import CaState, CertifiedIdentity, issue_identity
from .protocols import (
    ESTABLISHED,
    INITIATOR,
    RESPONDER,
    Failure,
    FailureReason,
    ProtocolKind,
    Session,
    new_session,
)
from .transport import Adversary, Channel, ChannelConfig

DEFAULT_CLOCK = 1_700_000_000
DEFAULT_VALIDITY = (DEFAULT_CLOCK - 3600, DEFAULT_CLOCK + 365 * 86400)
CA_ID = b"ECQV-CA-GATEWAY\x00"
INITIATOR_ID = b"BMS-CONTROLLER-A"
RESPONDER_ID = b"EVCC-CONTROLLR-B"


@dataclass
class Deployment:
    ca: CaState
    initiator: CertifiedIdentity
    responder: CertifiedIdentity
    psk: SymmetricKey
    now: int = DEFAULT_CLOCK

    @property
    def ca_public(self):
        return self.ca.public_key


def provision(
    rng: Entropy,
    now: int = DEFAULT_CLOCK,
    validity: tuple[int, int] = DEFAULT_VALIDITY,
    ids: tuple[bytes, bytes] = (INITIATOR_ID, RESPONDER_ID),
) -> Deployment:
    ca = CaState.create(CA_ID, rng)
    a = issue_identity(ca, ids[0], validity, rng)
    b = issue_identity(ca, ids[1], validity, rng)
    psk = SymmetricKey(draw(rng, 32), MAC)
    return Deployment(ca, a, b, psk, now)


@dataclass
class HandshakeResult:
    kind: ProtocolKind
    initiator: Session
    responder: Session
    channel: Channel
    events: list[tuple[str, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.initiator.established and self.responder.established

    @property
    def failure(self) -> Failure | None:
        return self.initiator.failure or self.responder.failure

    @property
    def messages(self):
        """Messages in wire order as the sender produced them."""
        out = []
        for sess in (self.initiator, self.responder):
            out.extend(m for d, m in sess.transcript if d == "sent")
        order = {label: i for i, label in enumerate(self.initiator._flow)}
        return sorted(out, key=lambda m: order[m.label])

    @property
    def compute_time(self) -> float:
        return self.initiator.compute_time + self.responder.compute_time

    def key_digests(self) -> dict[str, str | None]:
        def dig(s):
            return s.keys.digest() if s.established and s.keys else None

        return {INITIATOR: dig(self.initiator), RESPONDER: dig(self.responder)}


def make_sessions(
    kind: ProtocolKind | str,
    deployment: Deployment,
    rng_a: Entropy,
    rng_b: Entropy,
    sign_mode: str = RANDOMIZED,
    psk_a: SymmetricKey | None | bool = True,
    psk_b: SymmetricKey | None | bool = True,
) -> tuple[Session, Session]:
    """Build both sides.  ``psk_*=True`` means: use the deployment's key."""
    kind = kind if isinstance(kind, ProtocolKind) else ProtocolKind.parse(kind)
    if psk_a is True:
        psk_a = deployment.psk
    if psk_b is True:
        psk_b = deployment.psk
    a = new_session(
        kind, INITIATOR, deployment.initiator, deployment.ca_public, rng_a,
        deployment.now, psk=psk_a or None, sign_mode=sign_mode,
    )
    b = new_session(
        kind, RESPONDER, deployment.responder, deployment.ca_public, rng_b,
        deployment.now, psk=psk_b or None, sign_mode=sign_mode,
    )
    return a, b


def drive(
    a: Session,
    b: Session,
    channel: Channel | None = None,
    max_steps: int = 16,
) -> HandshakeResult:
    """Alternate the two sessions over ``channel`` until both stop."""
    channel = channel or Channel()
    result = HandshakeResult(a.kind, a, b, channel)
    out, event = a.step(None)
    result.events.append((INITIATOR, event))
    sender, receiver = a, b
    for _ in range(max_steps):
        if out is None:
            break
        direction = "A->B" if sender is a else "B->A"
        delivery = channel.send(direction, out)
        if delivery.payload is None:
            failure = receiver._fail(Failure(FailureReason.MALFORMED, delivery.error))
            result.events.append((receiver.role, failure))
            break
        out, event = receiver.receive_bytes(delivery.payload)
        result.events.append((receiver.role, event))
        sender, receiver = receiver, sender
    if not result.ok:
        # a peer that gave up never answers; the waiting side times out
        for sess in (a, b):
            if sess.established is False and sess.failure is None:
                sess._fail(Failure(FailureReason.AUTHENTICATION, "peer aborted the handshake"))
    return result


def run_handshake(
    kind: ProtocolKind | str,
    deployment: Deployment | None = None,
    seed: int | None = None,
    adversary: Adversary | None = None,
    config: ChannelConfig | None = None,
    sign_mode: str = RANDOMIZED,
    **session_kw,
) -> HandshakeResult:
    """One complete handshake.  With ``seed`` everything is reproducible."""
    if seed is not None:
        tape = seeded(seed)
        deployment = deployment or provision(tape)
        rng_a = random.Random(tape.getrandbits(64))
        rng_b = random.Random(tape.getrandbits(64))
    else:
        deployment = deployment or provision(SystemEntropy())
        rng_a = rng_b = SystemEntropy()
    a, b = make_sessions(kind, deployment, rng_a, rng_b, sign_mode, **session_kw)
    return drive(a, b, Channel(config, adversary))

