"""Runtime-scaling benchmark harness.

Runs the a350 scenario across a list of periodicities, measures the
simulation loop's wall-clock time per repetition, and fits runtime against
the number of messages sent. Only the run loop is timed (model building and
validation are excluded). Repetitions may run in parallel across processes;
results are aggregated in configuration order either way.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import engine
from .metrics import DegenerateInputError, FitResult, fit_linear
from .netmodel import validate_network
from .scenarios import A350Params, a350_network

#: The nine published periodicity configurations (milliseconds).
PAPER_PERIODICITIES_MS = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)


@dataclass(frozen=True)
class BenchPoint:
    periodicity_ms: float
    n_packets: int
    runtimes_s: tuple[float, ...]

    @property
    def mean_runtime_s(self) -> float:
        return sum(self.runtimes_s) / len(self.runtimes_s)

    @property
    def std_runtime_s(self) -> float:
        n = len(self.runtimes_s)
        if n < 2:
            return 0.0
        m = self.mean_runtime_s
        return (sum((r - m) ** 2 for r in self.runtimes_s) / (n - 1)) ** 0.5

    @property
    def mean_runtime_min(self) -> float:
        return self.mean_runtime_s / 60.0


@dataclass(frozen=True)
class BenchResult:
    points: tuple[BenchPoint, ...]
    fit: FitResult | None
    jobs: int

    def fit_points(self) -> list[tuple[int, float]]:
        return [(p.n_packets, p.mean_runtime_min) for p in self.points]


def _one_run(periodicity_ms: float, seed: int) -> tuple[int, float]:
    net = validate_network(a350_network(A350Params(periodicity_ms=periodicity_ms,
                                                   seed=seed)))
    result = engine.run(net)
    n_packets = sum(result.collector.sent.values())
    return n_packets, result.wall_clock_s


def run_bench(periodicities_ms=PAPER_PERIODICITIES_MS, reps: int = 5,
              seed: int = 1, jobs: int = 1) -> BenchResult:
    if reps < 1:
        raise ValueError("reps must be >= 1")
    tasks = [(p, rep) for p in periodicities_ms for rep in range(reps)]
    results: dict[tuple[float, int], tuple[int, float]] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {key: pool.submit(_one_run, key[0], seed) for key in tasks}
            for key, fut in futures.items():
                results[key] = fut.result()
    else:
        for key in tasks:
            results[key] = _one_run(key[0], seed)

    points = []
    for p in periodicities_ms:
        per_rep = [results[(p, rep)] for rep in range(reps)]
        n_packets = per_rep[0][0]
        points.append(BenchPoint(
            periodicity_ms=p, n_packets=n_packets,
            runtimes_s=tuple(r for _, r in per_rep)))

    fit = None
    try:
        fit = fit_linear([(pt.n_packets, pt.mean_runtime_min) for pt in points])
    except DegenerateInputError:
        pass
    return BenchResult(points=tuple(points), fit=fit, jobs=jobs)


def bench_csv_text(result: BenchResult) -> str:
    lines = ["periodicity_ms,n_packets,runtime_s_mean,runtime_s_std,"
             "runtime_min_mean,reps,jobs"]
    for p in result.points:
        lines.append(
            f"{p.periodicity_ms:g},{p.n_packets},{p.mean_runtime_s:.6f},"
            f"{p.std_runtime_s:.6f},{p.mean_runtime_min:.8f},"
            f"{len(p.runtimes_s)},{result.jobs}")
    return "\n".join(lines) + "\n"
