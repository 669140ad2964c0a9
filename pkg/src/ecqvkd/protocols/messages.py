"""Wire layouts of every handshake step.

Field order and sizes follow the published per-step overhead table; a
message is just the concatenation of its fields, big-endian, no framing.
Steps are labelled ``A<n>`` (sent by the initiator) and ``B<n>`` (sent by
the responder).
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass


class ProtocolKind(str, enum.Enum):
    STS = "sts"
    STS_OPT1 = "sts-opt1"
    STS_OPT2 = "sts-opt2"
    S_ECDSA = "s-ecdsa"
    S_ECDSA_EXT = "s-ecdsa-ext"
    SCIANC = "scianc"
    PORAMB = "poramb"

    @property
    def family(self) -> str:
        return {
            ProtocolKind.STS: "sts",
            ProtocolKind.STS_OPT1: "sts",
            ProtocolKind.STS_OPT2: "sts",
            ProtocolKind.S_ECDSA: "s-ecdsa",
            ProtocolKind.S_ECDSA_EXT: "s-ecdsa",
            ProtocolKind.SCIANC: "scianc",
            ProtocolKind.PORAMB: "poramb",
        }[self]

    @property
    def dynamic(self) -> bool:
        """True for the ephemeral (per-session) key derivations."""
        return self.family == "sts"

    @classmethod
    def parse(cls, name: str) -> ProtocolKind:
        norm = name.strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == norm:
                return kind
        raise ValueError(f"unknown protocol {name!r}")


# field tags
ID = "ID"
XG = "XG"
CERT = "Cert"
RESP = "Resp"
ACK = "ACK"
NONCE = "Nonce"
SIGN = "Sign"
EXT_FIN = "Ext_Fin"
AUTH_MAC = "Auth_MAC"
HELLO = "Hello"
MAC = "MAC"
FINISH = "Finish"

FIELD_LEN = {
    ID: 16,
    XG: 64,
    CERT: 101,
    RESP: 64,
    ACK: 1,
    NONCE: 32,
    SIGN: 64,
    EXT_FIN: 96,
    AUTH_MAC: 32,
    HELLO: 32,
    MAC: 32,
    FINISH: 197,
}

_STS = {
    "A1": (ID, XG),
    "B1": (ID, CERT, XG, RESP),
    "A2": (CERT, RESP),
    "B2": (ACK,),
}

LAYOUTS: dict[ProtocolKind, dict[str, tuple[str, ...]]] = {
    ProtocolKind.STS: _STS,
    ProtocolKind.STS_OPT1: _STS,
    ProtocolKind.STS_OPT2: _STS,
    ProtocolKind.S_ECDSA: {
        "A1": (ID, NONCE),
        "B1": (ID, CERT, SIGN, NONCE),
        "A2": (CERT, SIGN),
        "B2": (ACK,),
    },
    ProtocolKind.S_ECDSA_EXT: {
        "A1": (ID, NONCE),
        "B1": (ID, CERT, SIGN, NONCE),
        "A2": (CERT, SIGN),
        "B2": (ACK, EXT_FIN),
        "A3": (EXT_FIN,),
    },
    ProtocolKind.SCIANC: {
        "A1": (ID, NONCE, CERT),
        "B1": (ID, NONCE, CERT),
        "A2": (AUTH_MAC,),
        "B2": (AUTH_MAC,),
    },
    ProtocolKind.PORAMB: {
        "A1": (HELLO, ID),
        "B1": (HELLO, ID),
        "A2": (CERT, NONCE, MAC),
        "B2": (CERT, NONCE, MAC),
        "A3": (FINISH,),
        "B3": (FINISH,),
    },
}


def flow(kind: ProtocolKind) -> tuple[str, ...]:
    """Step labels in the order they go on the wire."""
    return tuple(LAYOUTS[kind])


def sender_of(label: str) -> str:
    return "initiator" if label.startswith("A") else "responder"


def step_length(kind: ProtocolKind, label: str) -> int:
    return sum(FIELD_LEN[tag] for tag in LAYOUTS[kind][label])


class MessageFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolMessage:
    kind: ProtocolKind
    label: str
    fields: tuple[tuple[str, bytes], ...]

    def __post_init__(self):
        layout = LAYOUTS[self.kind].get(self.label)
        if layout is None:
            raise MessageFormatError(f"{self.kind.value} has no step {self.label}")
        tags = tuple(tag for tag, _ in self.fields)
        if tags != layout:
            raise MessageFormatError(f"{self.label} fields {tags} != {layout}")
        for tag, value in self.fields:
            if len(value) != FIELD_LEN[tag]:
                raise MessageFormatError(
                    f"{self.label}.{tag} is {len(value)} bytes, expected {FIELD_LEN[tag]}"
                )

    @classmethod
    def build(cls, kind: ProtocolKind, label: str, **values: bytes) -> ProtocolMessage:
        try:
            fields = tuple((tag, bytes(values[tag])) for tag in LAYOUTS[kind][label])
        except KeyError as exc:
            raise MessageFormatError(f"missing field {exc} for {label}") from None
        return cls(kind, label, fields)

    def __getitem__(self, tag: str) -> bytes:
        for t, value in self.fields:
            if t == tag:
                return value
        raise KeyError(tag)

    def encode(self) -> bytes:
        return b"".join(value for _, value in self.fields)

    def __len__(self) -> int:
        return sum(len(value) for _, value in self.fields)

    def offset(self, tag: str) -> int:
        off = 0
        for t, value in self.fields:
            if t == tag:
                return off
            off += len(value)
        raise KeyError(tag)

    @classmethod
    def decode(cls, kind: ProtocolKind, label: str, data: bytes) -> ProtocolMessage:
        layout = LAYOUTS[kind].get(label)
        if layout is None:
            raise MessageFormatError(f"{kind.value} has no step {label}")
        expected = step_length(kind, label)
        if len(data) != expected:
            raise MessageFormatError(f"{label} must be {expected} bytes, got {len(data)}")
        fields = []
        off = 0
        for tag in layout:
            n = FIELD_LEN[tag]
            fields.append((tag, bytes(data[off : off + n])))
            off += n
        return cls(kind, label, tuple(fields))


# Transcript export: repeated [label: 2 ASCII bytes][length: u16][payload].
_RECORD = struct.Struct(">2sH")


def export_transcript(messages: list[ProtocolMessage]) -> bytes:
    out = bytearray()
    for msg in messages:
        payload = msg.encode()
        out += _RECORD.pack(msg.label.encode("ascii"), len(payload)) + payload
    return bytes(out)


def import_transcript(kind: ProtocolKind, data: bytes) -> list[ProtocolMessage]:
    messages = []
    off = 0
    while off < len(data):
        if off + _RECORD.size > len(data):
            raise MessageFormatError("truncated transcript record header")
        label, n = _RECORD.unpack_from(data, off)
        off += _RECORD.size
        if off + n > len(data):
            raise MessageFormatError("truncated transcript record")
        messages.append(ProtocolMessage.decode(kind, label.decode("ascii"), data[off : off + n]))
        off += n
    return messages


def hexdump_transcript(messages: list[ProtocolMessage]) -> str:
    return "".join(f"{m.label} {len(m)} {m.encode().hex()}\n" for m in messages)
