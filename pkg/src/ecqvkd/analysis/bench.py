"""Wall-clock benchmark of the handshakes and of the four STS operations.

Only compute time is measured: the sessions time their own step handlers,
so channel simulation and framing are excluded.  Absolute numbers depend on
the host; the ordering between protocols and the STS/S-ECDSA ratio are the
quantities worth comparing across machines.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..protocols import ProtocolKind
from ..simulation import drive, make_sessions, provision
from .timing import OpTiming, TimingModel, projections

DEFAULT_RUNS = 10
BENCH_ORDER = (ProtocolKind.SCIANC, ProtocolKind.PORAMB, ProtocolKind.S_ECDSA, ProtocolKind.STS)
US_PER_S = 1_000_000


@dataclass
class BenchResult:
    protocol: str
    samples_ms: list[float]

    @property
    def mean_ms(self) -> float:
        return statistics.fmean(self.samples_ms)

    @property
    def median_ms(self) -> float:
        return statistics.median(self.samples_ms)

    @property
    def std_ms(self) -> float:
        return statistics.stdev(self.samples_ms) if len(self.samples_ms) > 1 else 0.0


def _runs(kind: ProtocolKind, runs: int, seed: int, warmup: int):
    tape = random.Random(seed)
    deployment = provision(tape)
    for i in range(warmup + runs):
        a, b = make_sessions(
            kind, deployment, random.Random(tape.getrandbits(64)), random.Random(tape.getrandbits(64))
        )
        result = drive(a, b)
        if not result.ok:
            raise RuntimeError(f"{kind.value} failed during benchmark: {result.failure}")
        if i >= warmup:
            yield result


def measure_protocol(
    kind: ProtocolKind, runs: int = DEFAULT_RUNS, seed: int = 0, warmup: int = 1
) -> BenchResult:
    samples = [r.compute_time * 1000 for r in _runs(kind, runs, seed, warmup)]
    return BenchResult(kind.value, samples)


def measure_sts_ops(runs: int = DEFAULT_RUNS, seed: int = 0, warmup: int = 1) -> TimingModel:
    """Mean Op1..Op4 per device in microseconds."""
    totals = {"A": [0.0] * 4, "B": [0.0] * 4}
    for result in _runs(ProtocolKind.STS, runs, seed, warmup):
        for dev, sess in (("A", result.initiator), ("B", result.responder)):
            for i in range(4):
                totals[dev][i] += sess.op_time.get(f"op{i + 1}", 0.0)
    per = {dev: [t / runs * US_PER_S for t in ts] for dev, ts in totals.items()}
    return TimingModel(OpTiming("A", *per["A"]), OpTiming("B", *per["B"]))


def load_timing_file(path: str | Path) -> TimingModel:
    """Read ``{"A": [t1..t4], "B": [t1..t4]}`` or ``{"ops": [t1..t4]}``.

    Values are microseconds; ints keep the model arithmetic exact.
    """
    data = json.loads(Path(path).read_text())
    if "ops" in data:
        return TimingModel.symmetric(data["ops"])
    return TimingModel(OpTiming("A", *data["A"]), OpTiming("B", *data["B"]))


@dataclass
class BenchReport:
    results: list[BenchResult]
    model: TimingModel
    timing_source: str
    projected_us: dict[str, float] = field(default_factory=dict)

    def by_protocol(self) -> dict[str, BenchResult]:
        return {r.protocol: r for r in self.results}

    def ordering(self) -> list[str]:
        """Protocols by median time; a single stalled run cannot reorder them."""
        return [r.protocol for r in sorted(self.results, key=lambda r: r.median_ms)]

    def ratio(self, num: str = "sts", den: str = "s-ecdsa") -> float | None:
        res = self.by_protocol()
        if num not in res or den not in res:
            return None
        return res[num].median_ms / res[den].median_ms

    def render(self) -> str:
        lines = [f"{'protocol':<10}{'runs':>6}{'median ms':>11}{'mean ms':>10}{'± std':>8}"]
        for r in self.results:
            lines.append(
                f"{r.protocol:<10}{len(r.samples_ms):>6}{r.median_ms:>11.2f}"
                f"{r.mean_ms:>10.2f}{r.std_ms:>8.2f}"
            )
        if self.results:
            lines.append("order: " + " < ".join(self.ordering()))
        ratio = self.ratio()
        if ratio is not None:
            lines.append(f"sts / s-ecdsa = {ratio:.3f}")
        lines.append(f"STS operations ({self.timing_source}, µs):")
        for dev in (self.model.a, self.model.b):
            ops = "  ".join(f"Op{i + 1} {t:9.1f}" for i, t in enumerate(dev.durations))
            lines.append(f"  {dev.device}: {ops}")
        lines.append("schedule projections (µs):")
        for variant, total in self.projected_us.items():
            lines.append(f"  {variant:<7}{total:12.1f}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "timing_source": self.timing_source,
            "protocols": [
                {**asdict(r), "median_ms": r.median_ms, "mean_ms": r.mean_ms, "std_ms": r.std_ms} for r in self.results
            ],
            "ops_us": {"A": list(self.model.a.durations), "B": list(self.model.b.durations)},
            "projections_us": self.projected_us,
        }


def run_bench(
    runs: int = DEFAULT_RUNS,
    seed: int = 0,
    kinds=BENCH_ORDER,
    timing: TimingModel | None = None,
) -> BenchReport:
    # round-robin over protocols so background load lands on all of them
    streams = {k: _runs(k, runs, seed, warmup=1) for k in kinds}
    samples = {k: [] for k in kinds}
    for _ in range(runs):
        for k, stream in streams.items():
            samples[k].append(next(stream).compute_time * 1000)
    results = [BenchResult(k.value, samples[k]) for k in kinds]
    source = "file" if timing is not None else "measured"
    model = timing or measure_sts_ops(runs, seed)
    return BenchReport(results, model, source, projections(model))
