"""Simulated CAN-FD link with ISO-TP (ISO 15765-2) style segmentation.

Framing subset used here (flow control is never needed because the
simulated receiver never blocks):

* single frame, payload <= 7 bytes:  ``0x0L``            + data
* single frame, 8..62 bytes:         ``0x00 LL``         + data
* first frame:                       ``0x1L LL`` (12-bit length) + 62 bytes
* consecutive frame:                 ``0x2S`` (4-bit sequence)   + up to 63 bytes

Frames are padded with ``0xCC`` up to the next valid CAN-FD data length.
Time is virtual: every frame advances the channel clock by its bit time
at the configured nominal and data-phase rates.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Protocol

MAX_FRAME = 64
MAX_PAYLOAD = 4095
SF_MAX = MAX_FRAME - 2
FF_DATA = MAX_FRAME - 2
CF_DATA = MAX_FRAME - 1
PAD = 0xCC
FD_LENGTHS = (0, 1, 2, 3, 4, 5, 6, 7, 8, 12, 16, 20, 24, 32, 48, 64)

SINGLE, FIRST, CONSECUTIVE = 0x0, 0x1, 0x2


class FragmentationError(ValueError):
    pass


class ReassemblyError(ValueError):
    pass


class TransportError(RuntimeError):
    pass


def fd_length(n: int) -> int:
    """Smallest CAN-FD data length code size that holds ``n`` bytes."""
    for size in FD_LENGTHS:
        if size >= n:
            return size
    raise FragmentationError(f"{n} bytes do not fit a CAN-FD frame")


@dataclass(frozen=True)
class Frame:
    can_id: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.can_id < 0x800:
            raise ValueError("CAN identifier must be 11 bits")
        if len(self.payload) > MAX_FRAME:
            raise ValueError("CAN-FD payload is at most 64 bytes")

    @property
    def frame_type(self) -> int:
        return self.payload[0] >> 4

    def hexline(self, direction: str) -> str:
        return f"{direction} {self.can_id:03X} {len(self.payload)} {self.payload.hex()}"


def _pad(data: bytes) -> bytes:
    return data + bytes([PAD]) * (fd_length(len(data)) - len(data))


def frame_count(n: int) -> int:
    """Number of frames :func:`fragment` produces for an ``n``-byte payload."""
    if n <= SF_MAX:
        return 1
    return 1 + -(-(n - FF_DATA) // CF_DATA)


def fragment(payload: bytes, can_id: int = 0x7E0) -> list[Frame]:
    n = len(payload)
    if n == 0:
        raise FragmentationError("empty payload")
    if n > MAX_PAYLOAD:
        raise FragmentationError(f"payload of {n} bytes exceeds {MAX_PAYLOAD}")
    if n <= 7:
        return [Frame(can_id, _pad(bytes([n]) + payload))]
    if n <= SF_MAX:
        return [Frame(can_id, _pad(bytes([0x00, n]) + payload))]
    frames = [Frame(can_id, bytes([0x10 | (n >> 8), n & 0xFF]) + payload[:FF_DATA])]
    seq = 1
    for off in range(FF_DATA, n, CF_DATA):
        frames.append(Frame(can_id, _pad(bytes([0x20 | seq]) + payload[off : off + CF_DATA])))
        seq = (seq + 1) & 0xF
    return frames


def reassemble(frames: list[Frame]) -> bytes:
    if not frames:
        raise ReassemblyError("no frames")
    head = frames[0].payload
    kind = head[0] >> 4
    if kind == SINGLE:
        if len(frames) != 1:
            raise ReassemblyError("single frame followed by extra frames")
        n = head[0] & 0xF
        start = 1
        if n == 0:
            if len(head) < 2:
                raise ReassemblyError("truncated single frame")
            n, start = head[1], 2
        if n == 0 or start + n > len(head):
            raise ReassemblyError("single-frame length does not fit the frame")
        return bytes(head[start : start + n])
    if kind != FIRST:
        raise ReassemblyError(f"message cannot start with frame type {kind}")
    n = ((head[0] & 0xF) << 8) | head[1]
    if n <= SF_MAX:
        raise ReassemblyError("first frame announces a single-frame length")
    out = bytearray(head[2:])
    expected_seq = 1
    for fr in frames[1:]:
        pci = fr.payload[0]
        if pci >> 4 != CONSECUTIVE:
            raise ReassemblyError(f"expected consecutive frame, got type {pci >> 4}")
        if pci & 0xF != expected_seq:
            raise ReassemblyError(f"sequence gap: got {pci & 0xF}, expected {expected_seq}")
        expected_seq = (expected_seq + 1) & 0xF
        out += fr.payload[1 : 1 + min(CF_DATA, n - len(out))]
        if len(out) > n:
            raise ReassemblyError("more data than announced")
    if len(out) != n:
        raise ReassemblyError(f"length mismatch: announced {n}, got {len(out)}")
    if len(frames) != frame_count(n):
        raise ReassemblyError("trailing frames after complete message")
    return bytes(out)


def locate(offset: int) -> tuple[int, int]:
    """Map a payload byte offset to ``(frame index, byte index in frame)``
    for a multi-frame message."""
    if offset < FF_DATA:
        return 0, 2 + offset
    rel = offset - FF_DATA
    return 1 + rel // CF_DATA, 1 + rel % CF_DATA


def locate_in(n: int, offset: int) -> tuple[int, int]:
    """Like :func:`locate` but aware of single-frame layouts."""
    if not 0 <= offset < n:
        raise IndexError("offset outside payload")
    if n <= 7:
        return 0, 1 + offset
    if n <= SF_MAX:
        return 0, 2 + offset
    return locate(offset)


@dataclass(frozen=True)
class ChannelConfig:
    """Bit timing of the simulated bus.

    Overhead bits default to a classic-base-format CAN-FD frame without
    stuff bits: 30 bits sent at the nominal rate (SOF, 11-bit ID, control
    bits up to BRS, CRC delimiter, ACK, EOF, intermission) and 28 at the
    data rate (ESI, DLC, 17/21-bit CRC with stuff count).
    """

    nominal_rate: float = 500_000.0
    data_rate: float = 2_000_000.0
    nominal_overhead_bits: int = 30
    data_overhead_bits: int = 28

    def __post_init__(self):
        if self.nominal_rate <= 0 or self.data_rate <= 0:
            raise ValueError("bit rates must be positive")

    def frame_time(self, frame: Frame) -> float:
        """Seconds on the wire for one frame."""
        data_bits = self.data_overhead_bits + 8 * len(frame.payload)
        return self.nominal_overhead_bits / self.nominal_rate + data_bits / self.data_rate


@dataclass
class LedgerEntry:
    label: str
    direction: str
    app_bytes: int
    frame_count: int
    frame_bytes: int
    latency: float


@dataclass
class ByteLedger:
    entries: list[LedgerEntry] = field(default_factory=list)

    def record(self, entry: LedgerEntry) -> None:
        self.entries.append(entry)

    @property
    def steps(self) -> int:
        return len(self.entries)

    @property
    def app_bytes(self) -> int:
        return sum(e.app_bytes for e in self.entries)

    @property
    def frame_bytes(self) -> int:
        return sum(e.frame_bytes for e in self.entries)

    @property
    def frames(self) -> int:
        return sum(e.frame_count for e in self.entries)

    @property
    def latency(self) -> float:
        return sum(e.latency for e in self.entries)

    def totals_by_direction(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.entries:
            out[e.direction] = out.get(e.direction, 0) + e.app_bytes
        return out

    def render(self) -> str:
        lines = [f"{'step':<5} {'dir':<4} {'bytes':>6} {'frames':>6} {'on-wire':>8} {'time[us]':>9}"]
        for e in self.entries:
            lines.append(
                f"{e.label:<5} {e.direction:<4} {e.app_bytes:>6} {e.frame_count:>6}"
                f" {e.frame_bytes:>8} {e.latency * 1e6:>9.1f}"
            )
        lines.append(
            f"{'total':<10} {self.app_bytes:>6} {self.frames:>6} {self.frame_bytes:>8}"
            f" {self.latency * 1e6:>9.1f}"
        )
        return "\n".join(lines)


# -- adversaries -------------------------------------------------------


class Adversary(Protocol):
    def intercept(self, direction: str, message, frames: list[Frame]) -> list[Frame]: ...


@dataclass
class Observer:
    """Passive eavesdropper: keeps copies of everything, changes nothing."""

    messages: list = field(default_factory=list)
    frames: list[tuple[str, Frame]] = field(default_factory=list)

    def intercept(self, direction, message, frames):
        self.messages.append(copy.copy(message))
        self.frames.extend((direction, f) for f in frames)
        return frames


@dataclass
class FieldTamperer:
    """Flip bits of one byte inside a named field, at the frame level.

    ``label`` restricts the attack to one step; otherwise the first message
    carrying ``tag`` is hit.  Fires once.
    """

    tag: str
    index: int
    mask: int = 0x01
    label: str | None = None
    fired: bool = False

    def intercept(self, direction, message, frames):
        if self.fired or (self.label and message.label != self.label):
            return frames
        try:
            off = message.offset(self.tag)
        except KeyError:
            return frames
        value = dict(message.fields)[self.tag]
        if not 0 <= self.index < len(value):
            raise IndexError(f"{self.tag} has no byte {self.index}")
        fi, bi = locate_in(len(message), off + self.index)
        raw = bytearray(frames[fi].payload)
        raw[bi] ^= self.mask
        frames = list(frames)
        frames[fi] = Frame(frames[fi].can_id, bytes(raw))
        self.fired = True
        return frames


@dataclass
class Replacer:
    """Active attacker that rewrites whole messages.

    ``rewrite(direction, message)`` returns replacement payload bytes, or
    ``None`` to let the message through untouched.
    """

    rewrite: Callable[[str, object], bytes | None]
    replaced: int = 0

    def intercept(self, direction, message, frames):
        new = self.rewrite(direction, message)
        if new is None:
            return frames
        self.replaced += 1
        return fragment(new, frames[0].can_id)


@dataclass
class FrameDropper:
    """Drop (or duplicate) one frame of one step to exercise reassembly."""

    label: str
    frame_index: int
    duplicate: bool = False

    def intercept(self, direction, message, frames):
        if message.label != self.label or self.frame_index >= len(frames):
            return frames
        frames = list(frames)
        if self.duplicate:
            frames.insert(self.frame_index, frames[self.frame_index])
        else:
            del frames[self.frame_index]
        return frames


@dataclass
class Delivery:
    payload: bytes | None
    frames: list[Frame]
    latency: float
    error: str | None = None


CAN_IDS = {"A->B": 0x7E0, "B->A": 0x7E8}


class Channel:
    """Duplex in-memory link between the initiator (A) and responder (B)."""

    def __init__(self, config: ChannelConfig | None = None, adversary: Adversary | None = None):
        self.config = config or ChannelConfig()
        self.adversary = adversary
        self.ledger = ByteLedger()
        self.clock = 0.0
        self.frame_log: list[tuple[str, Frame]] = []
        self.closed = False

    def close(self) -> None:
        self.closed = True

    def send(self, direction: str, message) -> Delivery:
        if self.closed:
            raise TransportError("channel is closed")
        if direction not in CAN_IDS:
            raise ValueError(f"direction must be one of {sorted(CAN_IDS)}")
        payload = message.encode()
        frames = fragment(payload, CAN_IDS[direction])
        if self.adversary is not None:
            frames = self.adversary.intercept(direction, message, frames)
        latency = sum(self.config.frame_time(f) for f in frames)
        self.clock += latency
        self.frame_log.extend((direction, f) for f in frames)
        self.ledger.record(
            LedgerEntry(
                label=message.label,
                direction=direction,
                app_bytes=len(payload),
                frame_count=len(frames),
                frame_bytes=sum(len(f.payload) for f in frames),
                latency=latency,
            )
        )
        try:
            delivered = reassemble(frames)
        except ReassemblyError as exc:
            return Delivery(None, frames, latency, str(exc))
        return Delivery(delivered, frames, latency)

    def export_frames(self) -> str:
        return "".join(f.hexline(d) + "\n" for d, f in self.frame_log)


def send(channel: Channel, direction: str, message) -> Delivery:
    return channel.send(direction, message)
