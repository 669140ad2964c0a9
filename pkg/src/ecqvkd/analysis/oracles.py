"""Attack oracles over recorded handshakes.

The forward-secrecy oracle plays an adversary that recorded a complete
handshake and later obtains the long-term secrets of one or both devices.
It tries every premaster it can compute from that material, runs the
protocol's public key schedule on it and, where the transcript contains
something keyed by the session key (encrypted signature, MAC, finished
message), uses it to confirm the guess.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..crypto import (
    IV_LEN,
    InvalidPointError,
    Point,
    Scalar,
    SymmetricKey,
    ecdsa_verify,
    kdf,
    mac_hmac,
    mul,
    sym_decrypt,
    tags_equal,
)
from ..ecqv import CertificateError, derive_public_key
from ..protocols import INITIATOR, RESPONDER, ProtocolKind, ProtocolMessage, SessionKeys
from ..protocols import messages as m
from ..protocols.static import FINISH_TYPE, PORAMB_INFO, SCIANC_INFO, SECDSA_INFO
from ..protocols.sts import IV_INFO, KDF_INFO
from ..simulation import Deployment, make_sessions, drive, provision
from ..transport import Channel, FieldTamperer, Observer

LONGTERM = "longterm"
PSK = "psk"
_TAG = {INITIATOR: "A", RESPONDER: "B"}

_INFO = {
    "sts": KDF_INFO,
    "s-ecdsa": SECDSA_INFO,
    "scianc": SCIANC_INFO,
    "poramb": PORAMB_INFO,
}


@dataclass
class Leak:
    """Material an attacker obtained after the fact."""

    private_keys: dict[str, Scalar] = field(default_factory=dict)
    psk: SymmetricKey | None = None

    @property
    def empty(self) -> bool:
        return not self.private_keys and self.psk is None


@dataclass
class CompromiseScenario:
    kind: ProtocolKind
    transcript: list[ProtocolMessage]
    ca_public: Point
    leak: Leak


@dataclass
class Recovery:
    recovered: bool
    keys: SessionKeys | None = None
    confirmed: bool = False
    note: str = ""

    def digest(self) -> str | None:
        return self.keys.digest() if self.keys else None


def _by_label(transcript) -> dict[str, ProtocolMessage]:
    return {msg.label: msg for msg in transcript}


def _field_from(msgs: dict[str, ProtocolMessage], prefix: str, tag: str) -> bytes | None:
    for label in sorted(msgs):
        if label.startswith(prefix):
            try:
                return msgs[label][tag]
            except KeyError:
                continue
    return None


def _salt(kind: ProtocolKind, msgs) -> bytes:
    family = kind.family
    if family == "sts":
        return msgs["A1"][m.XG] + msgs["B1"][m.XG]
    if family == "poramb":
        return msgs["A2"][m.NONCE] + msgs["B2"][m.NONCE]
    return msgs["A1"][m.NONCE] + msgs["B1"][m.NONCE]


def _prefix_bytes(transcript, upto: str) -> bytes:
    out = b""
    for msg in transcript:
        if msg.label == upto:
            break
        out += msg.encode()
    return out


def _confirm(kind: ProtocolKind, transcript, msgs, keys: SessionKeys, ca_public) -> bool | None:
    """True/False if the transcript can confirm the key, None if it cannot."""
    family = kind.family
    if family == "sts":
        salt = _salt(kind, msgs)
        iv = kdf(bytes(keys.premaster), salt, IV_INFO + b"B", IV_LEN)
        sig = sym_decrypt(keys.encryption, iv, msgs["B1"][m.RESP])
        try:
            q_b = derive_public_key(msgs["B1"][m.CERT], ca_public)
        except CertificateError:
            return False
        return ecdsa_verify(q_b, msgs["B1"][m.XG] + msgs["A1"][m.XG], sig)
    if family == "scianc":
        tag = mac_hmac(keys.mac, _prefix_bytes(transcript, "A2") + b"A")
        return tags_equal(tag, msgs["A2"][m.AUTH_MAC])
    if family == "poramb":
        expected = bytes([FINISH_TYPE]) + mac_hmac(keys.mac, _prefix_bytes(transcript, "A3") + b"A")
        return tags_equal(expected, msgs["A3"][m.FINISH][:33])
    if kind is ProtocolKind.S_ECDSA_EXT:
        tag = mac_hmac(keys.mac, _prefix_bytes(transcript, "B2") + b"B")
        return tags_equal(tag, msgs["B2"][m.EXT_FIN][:32])
    return None


def _candidate_premasters(kind, msgs, leak: Leak, ca_public) -> list[tuple[str, bytes]]:
    certs = {
        INITIATOR: _field_from(msgs, "A", m.CERT),
        RESPONDER: _field_from(msgs, "B", m.CERT),
    }
    ephemerals = {
        INITIATOR: _field_from(msgs, "A", m.XG),
        RESPONDER: _field_from(msgs, "B", m.XG),
    }
    out = []
    for role, d in leak.private_keys.items():
        peer = RESPONDER if role == INITIATOR else INITIATOR
        if certs[peer] is not None:
            try:
                q_peer = derive_public_key(certs[peer], ca_public)
            except CertificateError:
                q_peer = None
            if q_peer:
                shared = mul(d.value, q_peer)
                if shared:
                    out.append((f"static d_{_TAG[role]}*Q_peer", shared.x.to_bytes(32, "big")))
        if ephemerals[peer] is not None:
            try:
                xg = Point.from_raw(ephemerals[peer])
            except InvalidPointError:
                continue
            shared = mul(d.value, xg)
            if shared:
                out.append((f"d_{_TAG[role]}*XG_peer", shared.x.to_bytes(32, "big")))
    return out


def forward_secrecy_oracle(scenario: CompromiseScenario) -> Recovery:
    """Try to recompute a past session key from leaked long-term material."""
    kind = scenario.kind
    if not scenario.leak.private_keys:
        return Recovery(False, note="no long-term private key leaked")
    msgs = _by_label(scenario.transcript)
    salt = _salt(kind, msgs)
    info = _INFO[kind.family]
    candidates = _candidate_premasters(kind, msgs, scenario.leak, scenario.ca_public)
    for how, premaster in candidates:
        keys = SessionKeys.derive(premaster, salt, info)
        verdict = _confirm(kind, scenario.transcript, msgs, keys, scenario.ca_public)
        if verdict is None:
            # nothing in the transcript is keyed; the schedule is public, so
            # the static premaster determines the key outright
            return Recovery(True, keys, False, how)
        if verdict:
            return Recovery(True, keys, True, how)
        keys.destroy()
    return Recovery(False, note=f"{len(candidates)} candidate premasters, none confirmed")


def leak_from(deployment: Deployment, what=(LONGTERM,)) -> Leak:
    leak = Leak()
    if LONGTERM in what:
        leak.private_keys = {
            INITIATOR: deployment.initiator.private_key,
            RESPONDER: deployment.responder.private_key,
        }
    if PSK in what:
        leak.psk = deployment.psk
    return leak


@dataclass
class ScenarioOutcome:
    kind: ProtocolKind
    honest_digest: str
    recovery: Recovery

    @property
    def matches(self) -> bool:
        return self.recovery.recovered and self.recovery.digest() == self.honest_digest


def compromise_run(
    kind: ProtocolKind, seed: int, what=(LONGTERM,), deployment: Deployment | None = None
) -> ScenarioOutcome:
    """Record an honest run with a passive observer, then attack it."""
    tape = random.Random(seed)
    deployment = deployment or provision(tape)
    a, b = make_sessions(
        kind, deployment, random.Random(tape.getrandbits(64)), random.Random(tape.getrandbits(64))
    )
    spy = Observer()
    result = drive(a, b, Channel(adversary=spy))
    if not result.ok:
        raise RuntimeError(f"honest {kind.value} run failed: {result.failure}")
    scenario = CompromiseScenario(kind, spy.messages, deployment.ca_public, leak_from(deployment, what))
    return ScenarioOutcome(kind, result.key_digests()[INITIATOR], forward_secrecy_oracle(scenario))


@dataclass
class KeyReuseReport:
    kind: ProtocolKind
    runs: int
    premaster_distinct: int
    session_distinct: int

    @property
    def ephemeral(self) -> bool:
        return self.premaster_distinct == self.runs

    @property
    def static(self) -> bool:
        return self.premaster_distinct == 1


def key_reuse_probe(kind: ProtocolKind, runs: int, seed: int = 0) -> KeyReuseReport:
    """Run ``runs`` handshakes between the same two certificates."""
    tape = random.Random(seed)
    deployment = provision(tape)
    premasters, sessions = set(), set()
    for _ in range(runs):
        a, b = make_sessions(
            kind, deployment, random.Random(tape.getrandbits(64)), random.Random(tape.getrandbits(64))
        )
        result = drive(a, b)
        if not result.ok:
            raise RuntimeError(f"honest {kind.value} run failed: {result.failure}")
        premasters.add(a.keys.premaster_digest())
        sessions.add(a.keys.digest())
    return KeyReuseReport(kind, runs, len(premasters), len(sessions))


def kdf_separation(premaster: bytes) -> bool:
    """Same premaster, different protocol labels: keys must all differ and
    carry full-length, non-degenerate output."""
    salt = bytes(64)
    outputs = [SessionKeys.derive(premaster, salt, info).session_key_bytes() for info in _INFO.values()]
    return len(set(outputs)) == len(outputs) and all(len(o) == 48 and any(o) for o in outputs)


@dataclass
class TamperSweep:
    kind: ProtocolKind
    attempts: int
    rejected: int

    @property
    def rate(self) -> float:
        return self.rejected / self.attempts if self.attempts else 0.0


def tamper_sweep(
    kind: ProtocolKind,
    targets: list[tuple[str, str, int]],
    seed: int = 0,
) -> TamperSweep:
    """Flip one byte at each ``(label, tag, index)`` and count failed runs."""
    tape = random.Random(seed)
    deployment = provision(tape)
    rejected = 0
    for label, tag, index in targets:
        a, b = make_sessions(
            kind, deployment, random.Random(tape.getrandbits(64)), random.Random(tape.getrandbits(64))
        )
        hook = FieldTamperer(tag, index, label=label)
        result = drive(a, b, Channel(adversary=hook))
        if not hook.fired:
            raise RuntimeError(f"{label}.{tag}[{index}] never went over the wire")
        # the sender of a final message has already finished; one refusing
        # side is enough to keep the pair from agreeing on a key
        if not result.ok:
            rejected += 1
    return TamperSweep(kind, len(targets), rejected)
