"""Execution-time algebra for the serial and optimised STS schedules.

Each device spends ``T_Op1..T_Op4`` on the four STS operations.  The
serial protocol costs the plain sum over both devices.  When an operation
is overlapped across devices it costs the slower of the two copies, i.e.
the serial sum minus ``min(T_A, T_B)`` for that operation; for identical
devices this gives

    opt I:  2*T1 + T2 + 2*T3 + 2*T4
    opt II: 2*T1 + T2 +   T3 + 2*T4

Durations are plain numbers (the package uses microseconds).  Use ints or
:class:`fractions.Fraction` when results must compare exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

from ..protocols.schedule import OPT1, OPT2, SERIAL, ScheduleGraph, schedule_graph

N_OPS = 4
VARIANTS = (SERIAL, OPT1, OPT2)
OVERLAPPED = {SERIAL: (), OPT1: (2,), OPT2: (2, 3)}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class OpTiming:
    device: str
    op1: float
    op2: float
    op3: float
    op4: float

    def __post_init__(self):
        if min(self.durations) < 0:
            raise ModelError("operation durations must be nonnegative")

    @property
    def durations(self) -> tuple[float, float, float, float]:
        return (self.op1, self.op2, self.op3, self.op4)

    def op(self, i: int) -> float:
        if not 1 <= i <= N_OPS:
            raise ModelError(f"operation index {i} outside 1..{N_OPS}")
        return self.durations[i - 1]

    def same_cost(self, other: OpTiming) -> bool:
        return self.durations == other.durations


@dataclass(frozen=True)
class TimingModel:
    a: OpTiming
    b: OpTiming
    variant: str = SERIAL

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ModelError(f"variant must be one of {VARIANTS}")

    @classmethod
    def symmetric(cls, durations, variant: str = SERIAL) -> TimingModel:
        return cls(OpTiming("A", *durations), OpTiming("B", *durations), variant)

    def with_variant(self, variant: str) -> TimingModel:
        return TimingModel(self.a, self.b, variant)

    def weight(self, node) -> float:
        device, op = node
        return (self.a if device == "A" else self.b).op(op)


def total_time_serial(model: TimingModel) -> float:
    return sum(model.a.durations) + sum(model.b.durations)


def overlap_adjustment(model: TimingModel, op_index: int) -> float:
    """Residual cost of overlapping ``op_index``: 0 for identical devices,
    otherwise the absolute difference of the two durations."""
    if op_index not in (2, 3):
        raise ModelError("only Op2 and Op3 can be overlapped")
    return abs(model.a.op(op_index) - model.b.op(op_index))


def total_time_opt(model: TimingModel) -> float:
    if model.variant not in (OPT1, OPT2):
        raise ModelError("total_time_opt needs variant opt1 or opt2")
    if model.a.same_cost(model.b):
        t1, t2, t3, t4 = model.a.durations
        if model.variant == OPT1:
            return 2 * t1 + t2 + 2 * t3 + 2 * t4
        return 2 * t1 + t2 + t3 + 2 * t4
    total = total_time_serial(model)
    for x in OVERLAPPED[model.variant]:
        total -= min(model.a.op(x), model.b.op(x))
    return total


def total_time(model: TimingModel) -> float:
    if model.variant == SERIAL:
        return total_time_serial(model)
    return total_time_opt(model)


def simulate_schedule(model: TimingModel, graph: ScheduleGraph | None = None) -> float:
    """Makespan of the longest path through the operation graph."""
    graph = graph or schedule_graph(model.variant)
    sorter = TopologicalSorter({node: graph.predecessors(node) for node in graph.nodes})
    try:
        order = list(sorter.static_order())
    except CycleError as exc:
        raise ModelError(f"schedule graph has a cycle: {exc.args[1]}") from None
    finish: dict = {}
    for node in order:
        preds = graph.predecessors(node)
        start = max((finish[p] for p in preds), default=0)
        finish[node] = start + model.weight(node)
    return max(finish.values(), default=0)


def projections(model: TimingModel) -> dict[str, float]:
    """Serial, opt I and opt II totals for the same per-device timings."""
    return {v: total_time(model.with_variant(v)) for v in VARIANTS}
