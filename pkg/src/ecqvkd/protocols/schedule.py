"""Operation dependency graphs for the STS schedules.

Nodes are ``(device, op)`` pairs with device ``"A"`` or ``"B"`` and op
1..4.  An overlapped operation runs on both devices in the same
synchronised round: everything that follows waits for both copies, which
is why the optimised graphs carry cross edges into both successors.
"""

from __future__ import annotations

from dataclasses import dataclass

from .messages import ProtocolKind

Node = tuple[str, int]

SERIAL = "serial"
OPT1 = "opt1"
OPT2 = "opt2"

_VARIANT = {
    ProtocolKind.STS: SERIAL,
    ProtocolKind.STS_OPT1: OPT1,
    ProtocolKind.STS_OPT2: OPT2,
}


@dataclass(frozen=True)
class ScheduleGraph:
    variant: str
    nodes: tuple[Node, ...]
    edges: frozenset[tuple[Node, Node]]

    def predecessors(self, node: Node) -> set[Node]:
        return {u for u, v in self.edges if v == node}

    def overlapped(self) -> tuple[int, ...]:
        """Operations that run concurrently on both devices."""
        return {SERIAL: (), OPT1: (2,), OPT2: (2, 3)}[self.variant]


def _chain(*nodes: Node) -> set[tuple[Node, Node]]:
    return {(nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1)}


def schedule_graph(variant: str) -> ScheduleGraph:
    A = {i: ("A", i) for i in range(1, 5)}
    B = {i: ("B", i) for i in range(1, 5)}
    if variant == SERIAL:
        # A1 | B1 B2 B3 | A2 A4 A3 | B4 -- message order of the plain flow
        edges = _chain(A[1], B[1], B[2], B[3], A[2], A[4], A[3], B[4])
    elif variant == OPT1:
        edges = _chain(A[1], B[1])
        edges |= {(B[1], A[2]), (B[1], B[2])}
        edges |= {(A[2], B[3]), (B[2], B[3]), (A[2], A[4])}
        edges |= _chain(B[3], A[4], A[3], B[4])
    elif variant == OPT2:
        edges = _chain(A[1], B[1])
        edges |= {(B[1], A[2]), (B[1], B[2])}
        edges |= {(A[2], A[3]), (A[2], B[3]), (B[2], A[3]), (B[2], B[3])}
        edges |= {(A[3], A[4]), (B[3], A[4])}
        edges |= _chain(A[4], B[4])
    else:
        raise ValueError(f"unknown schedule variant {variant!r}")
    nodes = tuple(sorted(set(A.values()) | set(B.values())))
    return ScheduleGraph(variant, nodes, frozenset(edges))


def opt_schedule(kind: ProtocolKind) -> ScheduleGraph:
    """Dependency graph of the four STS operations on both devices.

    The optimised variants reorder message content so Op2 (and for
    variant II also Op3) overlaps across devices; the bytes on the wire
    are unchanged.
    """
    try:
        return schedule_graph(_VARIANT[kind])
    except KeyError:
        raise ValueError(f"{kind.value} has no operation schedule") from None
