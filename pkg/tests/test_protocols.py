import random

import pytest

from ecqvkd.crypto import INFINITY, MAC, SymmetricKey, base_mul, ecdsa_verify, sym_decrypt
from ecqvkd.ecqv import CaState, issue_identity
from ecqvkd.protocols import (
    ESTABLISHED,
    FailureReason,
    ProtocolKind,
    ProtocolMessage,
    export_transcript,
    flow,
    hexdump_transcript,
    import_transcript,
    step,
    step_length,
)
from ecqvkd.protocols import messages as m
from ecqvkd.protocols.session import Abort, SessionKeys
from ecqvkd.protocols.sts import KDF_INFO, StsSession
from ecqvkd.simulation import DEFAULT_CLOCK, drive, make_sessions, provision, run_handshake
from ecqvkd.transport import Channel, FieldTamperer, Replacer

SIZES = {
    ProtocolKind.STS: [80, 245, 165, 1],
    ProtocolKind.STS_OPT1: [80, 245, 165, 1],
    ProtocolKind.STS_OPT2: [80, 245, 165, 1],
    ProtocolKind.S_ECDSA: [48, 213, 165, 1],
    ProtocolKind.S_ECDSA_EXT: [48, 213, 165, 97, 96],
    ProtocolKind.SCIANC: [149, 149, 32, 32],
    ProtocolKind.PORAMB: [48, 48, 165, 165, 197, 197],
}


def pair(kind, deployment, seed=0, **kw):
    return make_sessions(kind, deployment, random.Random(seed), random.Random(seed + 1), **kw)


@pytest.mark.parametrize("kind", list(ProtocolKind))
def test_honest_run_agrees_and_matches_sizes(kind, deployment):
    a, b = pair(kind, deployment)
    result = drive(a, b)
    assert result.ok, result.failure
    assert a.keys.digest() == b.keys.digest()
    assert bytes(a.keys.premaster) == bytes(b.keys.premaster)
    assert len(a.keys.premaster) == 32
    assert [len(msg) for msg in result.messages] == SIZES[kind]
    assert [step_length(kind, label) for label in flow(kind)] == SIZES[kind]


def test_opt_variants_send_the_same_bytes_as_plain_sts(deployment):
    wire = {}
    for kind in (ProtocolKind.STS, ProtocolKind.STS_OPT1, ProtocolKind.STS_OPT2):
        wire[kind] = export_transcript(drive(*pair(kind, deployment, seed=5)).messages)
    assert len(set(wire.values())) == 1


def test_initiations_are_fresh_and_on_curve(deployment):
    a1, _ = pair(ProtocolKind.STS, deployment, seed=1)
    a2, _ = pair(ProtocolKind.STS, deployment, seed=2)
    x1, x2 = a1.initiate(), a2.initiate()
    assert len(x1) == 80
    assert x1[m.XG] != x2[m.XG]
    assert a1.own_xg == base_mul(a1.ephemeral.value)


def test_swapped_salt_gives_different_keys(deployment):
    a, b = pair(ProtocolKind.STS, deployment)
    drive(a, b)
    premaster = bytes(a.keys.premaster)
    xa, xb = a.own_xg.raw(), b.own_xg.raw()
    assert SessionKeys.derive(premaster, xa + xb, KDF_INFO).digest() == a.keys.digest()
    assert SessionKeys.derive(premaster, xb + xa, KDF_INFO).digest() != a.keys.digest()


def test_sts_responses_depend_on_role(deployment):
    result = run_handshake(ProtocolKind.STS, deployment, seed=3)
    a, b = result.initiator, result.responder
    resp_b = result.messages[1][m.RESP]
    resp_a = result.messages[2][m.RESP]
    assert resp_a != resp_b
    # the responder's signature covers XG_B || XG_A under its implicit key
    assert a.verify_response(resp_b, b.identity.certificate)
    assert not a.verify_response(resp_a, b.identity.certificate)


def test_ephemeral_is_wiped_after_establishment(deployment):
    a, b = pair(ProtocolKind.STS, deployment)
    drive(a, b)
    assert a.ephemeral.destroyed and b.ephemeral.destroyed
    assert not a.keys.destroyed


def test_identity_shared_point_is_refused(deployment):
    a, _ = pair(ProtocolKind.STS, deployment)
    a.initiate()
    with pytest.raises(Abort) as info:
        a.derive_session(INFINITY)
    assert info.value.failure.reason is FailureReason.INVALID_EPHEMERAL


def test_out_of_order_message(deployment):
    a, b = pair(ProtocolKind.STS, deployment)
    a1, _ = a.step()
    b1, _ = b.step(a1)
    _, event = b.step(b1)  # a responder never receives B1
    assert event.reason is FailureReason.OUT_OF_ORDER
    fresh, _ = pair(ProtocolKind.STS, deployment)
    _, event = fresh.step(b1)
    assert event.reason is FailureReason.OUT_OF_ORDER


def test_wrong_length_is_malformed_not_authentication(deployment):
    a, b = pair(ProtocolKind.STS, deployment)
    a1, _ = a.step()
    _, event = b.receive_bytes(a1.encode()[:-1])
    assert event.reason is FailureReason.MALFORMED
    assert b.failure.reason is FailureReason.MALFORMED


def test_off_curve_ephemeral_is_malformed(deployment):
    a, b = pair(ProtocolKind.STS, deployment)
    a1, _ = a.step()
    bad = ProtocolMessage.build(ProtocolKind.STS, "A1", **{m.ID: a1[m.ID], m.XG: bytes(64)})
    _, event = b.step(bad)
    assert event.reason is FailureReason.MALFORMED


def test_mitm_splice_of_ephemeral_is_rejected(deployment):
    attacker_xg = base_mul(0xC0FFEE).raw()

    def swap(direction, msg):
        if msg.label != "A1":
            return None
        return ProtocolMessage.build(msg.kind, "A1", **{m.ID: msg[m.ID], m.XG: attacker_xg}).encode()

    hook = Replacer(swap)
    result = run_handshake(ProtocolKind.STS, deployment, seed=4, adversary=hook)
    assert hook.replaced == 1
    assert not result.initiator.established and not result.responder.established
    assert result.initiator.failure.reason is FailureReason.AUTHENTICATION


def test_certificate_from_another_ca_is_rejected(deployment):
    rogue = CaState.create(b"ROGUE-CA-000000\x00", random.Random(9))
    fake = issue_identity(rogue, deployment.responder.identity, (0, 2**31), random.Random(10))
    a, _ = pair(ProtocolKind.STS, deployment)
    dep = provision(random.Random(77))
    dep.ca, dep.responder = deployment.ca, fake
    _, b = pair(ProtocolKind.STS, dep)
    result = drive(a, b)
    assert not result.ok
    assert a.failure.reason is FailureReason.AUTHENTICATION


def test_expired_certificate_is_rejected(deployment):
    dep = provision(random.Random(3), validity=(0, 100))
    result = run_handshake(ProtocolKind.STS, dep, seed=1)
    assert result.failure.reason is FailureReason.AUTHENTICATION
    assert "validity" in result.failure.detail


def test_failure_erases_keys(deployment):
    hook = FieldTamperer(m.RESP, 0, label="A2")
    a, b = pair(ProtocolKind.STS, deployment)
    drive(a, b, Channel(adversary=hook))
    assert b.failure.reason is FailureReason.AUTHENTICATION
    assert b.keys.destroyed


def test_finished_session_refuses_strays_without_losing_keys(deployment):
    a, b = pair(ProtocolKind.SCIANC, deployment)
    result = drive(a, b)
    before = a.keys.digest()
    _, event = a.step(result.messages[-1])
    assert event.reason is FailureReason.OUT_OF_ORDER
    assert a.established and a.keys.digest() == before


@pytest.mark.parametrize("kind", [ProtocolKind.S_ECDSA, ProtocolKind.SCIANC, ProtocolKind.PORAMB])
def test_static_premaster_is_constant_but_session_keys_vary(kind, deployment):
    runs = [drive(*pair(kind, deployment, seed=s)) for s in (10, 20)]
    pm = {bytes(r.initiator.keys.premaster) for r in runs}
    ks = {r.initiator.keys.digest() for r in runs}
    assert len(pm) == 1 and len(ks) == 2


def test_s_ecdsa_signature_covers_nonces_and_id(deployment):
    result = run_handshake(ProtocolKind.S_ECDSA, deployment, seed=6)
    a1, b1 = result.messages[0], result.messages[1]
    signed = a1[m.NONCE] + b1[m.NONCE] + b1[m.ID]
    assert ecdsa_verify(deployment.responder.public_key, signed, b1[m.SIGN])


def test_s_ecdsa_ext_finished_echoes_peer(deployment):
    result = run_handshake(ProtocolKind.S_ECDSA_EXT, deployment, seed=6)
    b2 = result.messages[3]
    fin = b2[m.EXT_FIN]
    assert b2[m.ACK] == b"\x01" and len(fin) == 96
    assert fin[64:] == result.messages[0][m.NONCE]


@pytest.mark.parametrize(
    "kind, label, tag",
    [
        (ProtocolKind.S_ECDSA, "B1", m.SIGN),
        (ProtocolKind.S_ECDSA_EXT, "A3", m.EXT_FIN),
        (ProtocolKind.SCIANC, "A2", m.AUTH_MAC),
        (ProtocolKind.PORAMB, "A2", m.MAC),
        (ProtocolKind.PORAMB, "B3", m.FINISH),
    ],
)
def test_tampered_authenticator_fails_authentication(kind, label, tag, deployment):
    hook = FieldTamperer(tag, 1, label=label)
    result = run_handshake(kind, deployment, seed=8, adversary=hook)
    assert hook.fired and not result.ok
    assert result.failure.reason is FailureReason.AUTHENTICATION


def test_poramb_without_psk_is_a_provisioning_failure(deployment):
    a, b = pair(ProtocolKind.PORAMB, deployment, psk_b=None)
    result = drive(a, b)
    assert b.failure.reason is FailureReason.PROVISIONING
    assert not result.ok


def test_poramb_with_mismatched_psk_fails(deployment):
    other = SymmetricKey(b"\x42" * 32, MAC)
    result = drive(*pair(ProtocolKind.PORAMB, deployment, psk_b=other))
    assert result.failure.reason is FailureReason.AUTHENTICATION


def test_poramb_finish_layout(deployment):
    result = run_handshake(ProtocolKind.PORAMB, deployment, seed=2)
    fin = result.messages[4][m.FINISH]
    assert fin[0] == 0x14 and fin[33:] == bytes(164)


def test_functional_step_drives_a_handshake(deployment):
    a, b = pair(ProtocolKind.SCIANC, deployment)
    a, out, _ = step(a, None)
    events = []
    sender, receiver = a, b
    while out is not None:
        receiver, out, event = step(receiver, out)
        events.append(event)
        sender, receiver = receiver, sender
    assert events[-2:] == [ESTABLISHED, ESTABLISHED]


def test_seeded_runs_are_reproducible(deployment):
    r1 = run_handshake(ProtocolKind.STS, seed=7)
    r2 = run_handshake(ProtocolKind.STS, seed=7)
    assert export_transcript(r1.messages) == export_transcript(r2.messages)
    assert r1.key_digests() == r2.key_digests()


def test_replaying_a_transcript_with_the_same_tape_reproduces_the_responder(deployment):
    recorded = drive(*pair(ProtocolKind.STS, deployment, seed=12))
    _, replica = pair(ProtocolKind.STS, deployment, seed=12)
    for msg in recorded.messages:
        if msg.label.startswith("A"):
            out, _ = replica.step(msg)
            if out is not None:
                assert out.encode() == recorded.messages[flow(msg.kind).index(out.label)].encode()
    assert replica.established
    assert replica.keys.digest() == recorded.responder.keys.digest()


def test_transcript_codecs_round_trip(deployment):
    result = run_handshake(ProtocolKind.PORAMB, deployment, seed=1)
    blob = export_transcript(result.messages)
    back = import_transcript(ProtocolKind.PORAMB, blob)
    assert [x.encode() for x in back] == [x.encode() for x in result.messages]
    dump = hexdump_transcript(result.messages).splitlines()
    assert dump[0].startswith("A1 48 ")
    assert len(dump) == 6


def test_resp_decrypts_to_valid_signature_with_session_key(deployment):
    result = run_handshake(ProtocolKind.STS, deployment, seed=13)
    a = result.initiator
    sig = sym_decrypt(a.keys.encryption, a._iv(b"B"), result.messages[1][m.RESP])
    signed = result.messages[1][m.XG] + result.messages[0][m.XG]
    assert ecdsa_verify(deployment.responder.public_key, signed, sig)


def test_roles_are_validated(deployment):
    with pytest.raises(ValueError):
        StsSession(
            ProtocolKind.STS, "middle", deployment.initiator, deployment.ca_public,
            random.Random(), DEFAULT_CLOCK,
        )
