"""Figure-of-merit collection and summaries.

Per-VL delay, jitter, throughput and loss statistics, switch capacity step
series (held by the switch states), the end-of-run frame conservation
identity, and the runtime-scaling least-squares fit used by the benchmark
harness. Samples are integer nanoseconds internally; summaries convert to
microseconds (tables) and the derived millisecond view is produced at
report-writing time.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass


class NegativeDelayError(RuntimeError):
    """A delivery was recorded before its generation: a model bug."""


class DegenerateInputError(ValueError):
    """Too few distinct points for a meaningful regression."""


@dataclass(frozen=True)
class StatSummary:
    max: float
    min: float
    mean: float
    std: float

    @classmethod
    def from_samples(cls, samples: list[float]) -> "StatSummary | None":
        if not samples:
            return None
        # Sample (n-1) estimator; a single observation reports spread 0.
        std = statistics.stdev(samples) if len(samples) > 1 else 0.0
        return cls(max=max(samples), min=min(samples),
                   mean=statistics.fmean(samples), std=std)


@dataclass(frozen=True)
class FomStats:
    """One VL's figures of merit. Stats are None when no frame arrived."""

    sent: int
    accepted: int
    duplicate_discarded: int
    corrupt_discarded: int
    loss_percent: float
    delay_us: StatSummary | None
    jitter_us: StatSummary | None
    throughput_bps: StatSummary | None


def summarize(delay_samples_ns: list[int], *, sent: int, expected: int | None = None,
              accepted: int = 0, duplicate_discarded: int = 0,
              corrupt_discarded: int = 0,
              deliveries: list[tuple[int, int]] | None = None,
              sim_duration_ns: int = 0, throughput_window_ns: int = 10_000_000,
              jitter_mode: str = "min_baseline") -> FomStats:
    """Reduce one VL's samples to its report row.

    ``deliveries`` are (accept_time_ns, bits) pairs; throughput statistics
    are computed over tumbling windows of ``throughput_window_ns`` covering
    the whole run, empty windows included. Jitter is each delay's deviation
    from the VL's minimum observed delay by default; ``consecutive`` switches
    to absolute differences of consecutive delays.
    """
    delays_us = [d / 1000.0 for d in delay_samples_ns]
    delay = StatSummary.from_samples(delays_us)

    if not delays_us:
        jitter = None
    elif jitter_mode == "min_baseline":
        base = min(delays_us)
        jitter = StatSummary.from_samples([d - base for d in delays_us])
    elif jitter_mode == "consecutive":
        diffs = [abs(b - a) for a, b in zip(delays_us, delays_us[1:])]
        jitter = StatSummary.from_samples(diffs)
    else:
        raise ValueError(f"unknown jitter mode {jitter_mode!r}")

    throughput = None
    if deliveries is not None and sim_duration_ns > 0:
        n_win = max(1, sim_duration_ns // throughput_window_ns)
        window_ns = throughput_window_ns if sim_duration_ns >= throughput_window_ns \
            else sim_duration_ns
        bits = [0] * n_win
        for t_ns, nbits in deliveries:
            idx = min(t_ns // window_ns, n_win - 1)
            bits[idx] += nbits
        window_s = window_ns / 1e9
        throughput = StatSummary.from_samples([b / window_s for b in bits])

    denom = expected if expected is not None else sent
    loss = 100.0 * (denom - accepted) / denom if denom > 0 else 0.0
    return FomStats(sent=sent, accepted=accepted,
                    duplicate_discarded=duplicate_discarded,
                    corrupt_discarded=corrupt_discarded,
                    loss_percent=loss, delay_us=delay, jitter_us=jitter,
                    throughput_bps=throughput)


@dataclass(frozen=True)
class ConservationCheck:
    """Entity bookkeeping for one run.

    Every frame copy that ever existed (emitted at an ES or created by
    multicast fan-out) must end in exactly one terminal state or still be
    resident in a queue, on a wire, or inside a switch latency window.
    """

    created: int
    accepted: int
    duplicate_discarded: int
    corrupt_discarded_es: int
    switch_drops: dict[str, int]
    es_link_down: int
    resident: int

    @property
    def accounted(self) -> int:
        return (self.accepted + self.duplicate_discarded + self.corrupt_discarded_es
                + sum(self.switch_drops.values()) + self.es_link_down + self.resident)

    @property
    def ok(self) -> bool:
        return self.created == self.accounted

    def __str__(self) -> str:
        return (f"created={self.created} accepted={self.accepted} "
                f"dup={self.duplicate_discarded} corrupt_es={self.corrupt_discarded_es} "
                f"switch_drops={self.switch_drops} es_link_down={self.es_link_down} "
                f"resident={self.resident} (accounted={self.accounted})")


class MetricsCollector:
    """Run-scoped sample sink, owned by the simulation loop."""

    def __init__(self, trace: bool = False):
        self.sent: dict[int, int] = {}
        self.expected: dict[int, int] = {}
        self.entities_created: dict[int, int] = {}
        self.accepted: dict[int, int] = {}
        self.duplicates: dict[int, int] = {}
        self.corrupt_at_es: dict[int, int] = {}
        self.delays_ns: dict[int, list[int]] = {}
        self.deliveries: dict[int, list[tuple[int, int]]] = {}
        self.link_down_by_node: dict[str, int] = {}
        self.trace: list[tuple] | None = [] if trace else None

    def on_logical_sent(self, vl_id: int, n_destinations: int) -> None:
        self.sent[vl_id] = self.sent.get(vl_id, 0) + 1
        self.expected[vl_id] = self.expected.get(vl_id, 0) + n_destinations

    def on_entity_created(self, vl_id: int) -> None:
        self.entities_created[vl_id] = self.entities_created.get(vl_id, 0) + 1

    def record_delivery(self, vl_id: int, generated_at_ns: int,
                        accepted_at_ns: int, bits: int) -> None:
        if accepted_at_ns < generated_at_ns:
            raise NegativeDelayError(
                f"VL{vl_id}: accepted at {accepted_at_ns} ns before "
                f"generation at {generated_at_ns} ns")
        self.accepted[vl_id] = self.accepted.get(vl_id, 0) + 1
        self.delays_ns.setdefault(vl_id, []).append(accepted_at_ns - generated_at_ns)
        self.deliveries.setdefault(vl_id, []).append((accepted_at_ns, bits))

    def on_duplicate(self, vl_id: int) -> None:
        self.duplicates[vl_id] = self.duplicates.get(vl_id, 0) + 1

    def on_corrupt_at_es(self, vl_id: int) -> None:
        self.corrupt_at_es[vl_id] = self.corrupt_at_es.get(vl_id, 0) + 1

    def on_link_down_drop(self, node_id: str, vl_id: int) -> None:
        self.link_down_by_node[node_id] = self.link_down_by_node.get(node_id, 0) + 1

    def conservation_check(self, switches: list, resident: int) -> ConservationCheck:
        drops: dict[str, int] = {}
        for sw in switches:
            for cause, n in sw.drops.items():
                drops[cause] = drops.get(cause, 0) + n
        return ConservationCheck(
            created=sum(self.entities_created.values()),
            accepted=sum(self.accepted.values()),
            duplicate_discarded=sum(self.duplicates.values()),
            corrupt_discarded_es=sum(self.corrupt_at_es.values()),
            switch_drops=drops,
            es_link_down=sum(self.link_down_by_node.values()),
            resident=resident,
        )


@dataclass(frozen=True)
class RuntimePoint:
    n_packets: int
    runtime_min: float


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float


def fit_linear(points: list) -> FitResult:
    """Ordinary least squares of runtime against packet count.

    Accepts RuntimePoint instances or (n_packets, runtime) pairs; requires
    at least three distinct abscissae for R-squared to mean anything.
    """
    xs, ys = [], []
    for p in points:
        if isinstance(p, RuntimePoint):
            xs.append(p.n_packets)
            ys.append(p.runtime_min)
        else:
            x, y = p
            xs.append(x)
            ys.append(y)
    if len(set(xs)) < 3:
        raise DegenerateInputError(
            f"need >= 3 distinct packet counts, got {len(set(xs))}")
    mx = statistics.fmean(xs)
    my = statistics.fmean(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return FitResult(slope=slope, intercept=intercept, r_squared=r_squared)
