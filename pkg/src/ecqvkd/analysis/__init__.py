"""Timing models, overhead accounting and attack oracles."""

from .bench import BenchReport, BenchResult, load_timing_file, measure_protocol, measure_sts_ops, run_bench
from .oracles import (
    LONGTERM,
    PSK,
    CompromiseScenario,
    KeyReuseReport,
    Leak,
    Recovery,
    TamperSweep,
    compromise_run,
    forward_secrecy_oracle,
    kdf_separation,
    key_reuse_probe,
    leak_from,
    tamper_sweep,
)
from .overhead import OverheadReport, StepOverhead, overhead_report, overhead_table, render_overhead
from .threats import ThreatCell, ThreatMatrix, capture_impersonation, threat_matrix
from .timing import (
    ModelError,
    OpTiming,
    TimingModel,
    overlap_adjustment,
    projections,
    simulate_schedule,
    total_time,
    total_time_opt,
    total_time_serial,
)
