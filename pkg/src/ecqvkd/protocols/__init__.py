"""Key-derivation handshakes as message-driven state machines."""

from .messages import (
    FIELD_LEN,
    LAYOUTS,
    MessageFormatError,
    ProtocolKind,
    ProtocolMessage,
    export_transcript,
    flow,
    hexdump_transcript,
    import_transcript,
    sender_of,
    step_length,
)
from .schedule import OPT1, OPT2, SERIAL, ScheduleGraph, opt_schedule, schedule_graph
from .session import (
    ESTABLISHED,
    INITIATOR,
    RESPONDER,
    Failure,
    FailureReason,
    Phase,
    Session,
    SessionKeys,
    step,
)
from .static import PorambSession, SciancSession, SEcdsaSession
from .sts import StsSession

SESSION_TYPES = {
    ProtocolKind.STS: StsSession,
    ProtocolKind.STS_OPT1: StsSession,
    ProtocolKind.STS_OPT2: StsSession,
    ProtocolKind.S_ECDSA: SEcdsaSession,
    ProtocolKind.S_ECDSA_EXT: SEcdsaSession,
    ProtocolKind.SCIANC: SciancSession,
    ProtocolKind.PORAMB: PorambSession,
}


def new_session(kind: ProtocolKind | str, role: str, identity, ca_public, rng, now, **kw) -> Session:
    kind = kind if isinstance(kind, ProtocolKind) else ProtocolKind.parse(kind)
    return SESSION_TYPES[kind](kind, role, identity, ca_public, rng, now, **kw)
