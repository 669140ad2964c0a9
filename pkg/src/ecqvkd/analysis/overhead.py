"""Per-step transmission overhead, measured from live message encodings."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..protocols import ProtocolKind
from ..simulation import HandshakeResult, run_handshake

# Rows of the overhead table: the base protocol and, where one exists, the
# variant whose extra steps are reported as a delta.
TABLE_COLUMNS = (
    (ProtocolKind.S_ECDSA, ProtocolKind.S_ECDSA_EXT),
    (ProtocolKind.STS, None),
    (ProtocolKind.SCIANC, None),
    (ProtocolKind.PORAMB, None),
)


@dataclass
class StepOverhead:
    step: str
    fields: list[tuple[str, int]]
    bytes: int


@dataclass
class OverheadReport:
    protocol: str
    steps: list[StepOverhead]
    step_count: int
    total_bytes: int
    ext_steps: int | None = None
    ext_bytes: int | None = None
    ext_detail: list[StepOverhead] = field(default_factory=list)

    def summary(self) -> str:
        base = f"{self.step_count}: {self.total_bytes} B"
        if self.ext_steps is None:
            return base
        return f"{self.step_count}(+{self.ext_steps}): {self.total_bytes}(+{self.ext_bytes}) B"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> OverheadReport:
        def steps(items):
            return [
                StepOverhead(s["step"], [tuple(f) for f in s["fields"]], s["bytes"]) for s in items
            ]

        return cls(
            protocol=data["protocol"],
            steps=steps(data["steps"]),
            step_count=data["step_count"],
            total_bytes=data["total_bytes"],
            ext_steps=data.get("ext_steps"),
            ext_bytes=data.get("ext_bytes"),
            ext_detail=steps(data.get("ext_detail", [])),
        )


def _steps(result: HandshakeResult) -> list[StepOverhead]:
    if not result.ok:
        raise RuntimeError(f"{result.kind.value} handshake failed: {result.failure}")
    out = []
    for msg, entry in zip(result.messages, result.channel.ledger.entries):
        assert msg.label == entry.label and len(msg.encode()) == entry.app_bytes
        out.append(
            StepOverhead(msg.label, [(tag, len(value)) for tag, value in msg.fields], entry.app_bytes)
        )
    return out


def overhead_report(kind: ProtocolKind | str, seed: int = 0) -> OverheadReport:
    """Run one honest handshake and account for every transmitted byte.

    For S-ECDSA the extension's additional steps and bytes are reported as
    a delta over the base protocol.
    """
    kind = kind if isinstance(kind, ProtocolKind) else ProtocolKind.parse(kind)
    base = _steps(run_handshake(kind, seed=seed))
    report = OverheadReport(
        protocol=kind.value,
        steps=base,
        step_count=len(base),
        total_bytes=sum(s.bytes for s in base),
    )
    ext_kind = dict(TABLE_COLUMNS).get(kind)
    if ext_kind is not None:
        ext = _steps(run_handshake(ext_kind, seed=seed))
        report.ext_steps = len(ext) - len(base)
        report.ext_bytes = sum(s.bytes for s in ext) - report.total_bytes
        report.ext_detail = ext
    return report


def overhead_table(seed: int = 0) -> list[OverheadReport]:
    return [overhead_report(kind, seed) for kind, _ in TABLE_COLUMNS]


def render_overhead(reports: list[OverheadReport]) -> str:
    lines = []
    for rep in reports:
        lines.append(f"{rep.protocol}")
        detail = rep.ext_detail or rep.steps
        for s in detail:
            parts = ", ".join(f"{tag}({n})" for tag, n in s.fields)
            lines.append(f"  {s.step}: {parts}  = {s.bytes} B")
        lines.append(f"  total {rep.summary()}")
    return "\n".join(lines)
