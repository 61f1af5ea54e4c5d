"""Acceptance suite.

Each test prints one PASS/FAIL line (run with -s to see them on success).
The runtime-scaling criterion runs the full nine-configuration benchmark and
dominates this module's duration.
"""

import math

import pytest

from avionet import engine
from avionet.bench import PAPER_PERIODICITIES_MS, run_bench
from avionet.configio import trace_csv_text, write_report
from avionet.engine import RunOptions
from avionet.netmodel import (
    LinkDecl,
    NetworkConfig,
    NodeDecl,
    NodeKind,
    Protocol,
    SwitchDecl,
    VlDecl,
    analytic_min_delay_ns,
    validate_network,
)
from avionet.scenarios import (
    XU2019_ROWS,
    A350Params,
    a350_network,
    random_network,
    xu2019_network,
    xu2019_worst_case,
)

#: every simulation executed by this module, for the conservation criterion
ALL_RESULTS: list = []


def _run(net, **kwargs):
    result = engine.run(net, **kwargs)
    ALL_RESULTS.append(result)
    return result


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"\nCRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def xu_net():
    return validate_network(xu2019_network())


@pytest.fixture(scope="module")
def xu_row_results(xu_net):
    return {row_id: _run(xu_net, offsets=xu2019_worst_case(row_id),
                         options=RunOptions(trace=True))
            for row_id in XU2019_ROWS}


@pytest.fixture(scope="module")
def a350_result():
    net = validate_network(a350_network(A350Params()))
    return net, _run(net)


def test_criterion_1_worst_case_delays(xu_row_results):
    expected = {r.row_id: r.expected_worst_delay_us for r in XU2019_ROWS.values()}
    details = []
    ok = True
    for row_id, result in xu_row_results.items():
        target = XU2019_ROWS[row_id].target_vl_id
        worst = dict(result.report.vls)[target].delay_us.max
        details.append(f"{row_id}={worst:.3f}us")
        if abs(worst - expected[row_id]) > 0.01:
            ok = False
        if result.wall_clock_s >= 1.0:
            ok = False
            details.append(f"{row_id} took {result.wall_clock_s:.2f}s")
    _verdict(1, ok, "worst delays " + ", ".join(details)
             + f" vs expected {sorted(expected.items())} (tol 0.01us, <1s/row)")


def test_criterion_2_switch_memory_timeline(xu_net, xu_row_results):
    result = xu_row_results["V1"]
    s3 = next(sw for sw in result.report.switches if sw.switch_id == "S3")
    epoch = [s for s in s3.capacity if s[0] < 4_000_000]
    charges = sorted(t for t, _, _, kind in epoch if kind == "charge")
    releases = sorted(t for t, _, _, kind in epoch if kind == "release")

    def near(t_ns, want_us):
        return abs(t_ns - want_us * 1000) <= 10

    ok = (len(charges) == 5 and len(releases) == 5
          and near(charges[0], 112) and near(charges[1], 112)
          and all(near(t, 152) for t in charges[2:])
          and near(releases[0], 152) and near(releases[1], 152)
          and near(releases[2], 192) and near(releases[3], 232)
          and near(releases[4], 272))

    # the two 112 us arrivals target different output queues, the three
    # 152 us arrivals share one
    trace = result.trace
    at_112 = sorted(r[0] for r in trace
                    if r[3] == "S3" and r[4] == "enqueued" and near(r[5], 112))
    at_152 = sorted(r[0] for r in trace
                    if r[3] == "S3" and r[4] == "enqueued" and near(r[5], 152))
    table = xu_net.routing["S3"]
    ok = ok and at_112 == [2, 3] and at_152 == [1, 4, 5]
    ok = ok and table[(2, "A")] != table[(3, "A")]
    ok = ok and table[(1, "A")] == table[(4, "A")] == table[(5, "A")]
    peak_ok = s3.peak_used_bytes == 1500
    _verdict(2, ok and peak_ok,
             f"charges at {[t/1000 for t in charges]}us, "
             f"releases at {[t/1000 for t in releases]}us, "
             f"peak {s3.peak_used_bytes}B (want 1500)")


def test_criterion_3_analytic_lower_bound():
    violations = 0
    delivered = 0
    for seed in range(100):
        net = validate_network(random_network(seed, max_es=10, max_switches=3))
        result = _run(net)
        for vl_id in net.vls:
            bound = analytic_min_delay_ns(net, vl_id)
            samples = result.collector.delays_ns.get(vl_id, [])
            delivered += len(samples)
            violations += sum(1 for d in samples if d < bound)
    _verdict(3, violations == 0 and delivered > 0,
             f"{delivered} delivered frames over 100 random topologies, "
             f"{violations} below the analytic bound")


def test_criterion_4_ber_statistics():
    cfg = NetworkConfig(
        protocol=Protocol.ETHERNET, sim_duration_s=2.0, ber=1e-5, rng_seed=1,
        nodes=(NodeDecl("ES1", NodeKind.END_SYSTEM),
               NodeDecl("S1", NodeKind.SWITCH),
               NodeDecl("ES2", NodeKind.END_SYSTEM)),
        links=(LinkDecl("ES1", "S1", 0.0, 1_000_000_000),
               LinkDecl("S1", "ES2", 0.0, 1_000_000_000)),
        vls=(VlDecl(vl_id=1, source="ES1", destinations=("ES2",),
                    route_a=(("ES1", "S1", "ES2"),), bag_ms=0.1,
                    min_frame_bytes=500, max_frame_bytes=500),),
        switches=(SwitchDecl("S1"),))
    result = _run(validate_network(cfg))
    sent = result.collector.sent[1]
    corrupt = (result.report.switches[0].drops["crc"]
               + result.collector.corrupt_at_es.get(1, 0))
    p = 1 - (1 - 1e-5) ** 4000
    sigma = math.sqrt(p * (1 - p) / sent)
    rate = corrupt / sent
    ok = sent >= 20_000 and abs(rate - p) <= 3 * sigma
    _verdict(4, ok, f"{corrupt}/{sent} corrupt = {rate:.5f}, "
                    f"expected {p:.5f} +/- {3 * sigma:.5f} (3 sigma)")


def _redundant_net():
    cfg = NetworkConfig(
        protocol=Protocol.AFDX, sim_duration_s=0.1, ber=0.0, rng_seed=1,
        redundancy=True,
        nodes=(NodeDecl("ES1", NodeKind.END_SYSTEM),
               NodeDecl("ES2", NodeKind.END_SYSTEM),
               NodeDecl("S1", NodeKind.SWITCH),
               NodeDecl("S2", NodeKind.SWITCH)),
        links=(LinkDecl("ES1", "S1"), LinkDecl("S1", "ES2"),
               LinkDecl("ES1", "S2"), LinkDecl("S2", "ES2")),
        vls=(VlDecl(vl_id=1, source="ES1", destinations=("ES2",),
                    route_a=(("ES1", "S1", "ES2"),),
                    route_b=(("ES1", "S2", "ES2"),),
                    bag_ms=4.0, min_frame_bytes=500, max_frame_bytes=500),),
        switches=(SwitchDecl("S1"), SwitchDecl("S2")))
    return validate_network(cfg)


def test_criterion_5_redundancy():
    net = _redundant_net()
    r_ok = _run(net)
    stats = dict(r_ok.report.vls)[1]
    both_ok = (stats.accepted == stats.sent == 25
               and stats.duplicate_discarded == stats.sent
               and stats.loss_percent == 0.0)

    dead_a = frozenset({tuple(sorted(("S1", "ES2")))})
    r_cut = _run(net, options=RunOptions(disabled_links=dead_a))
    stats_cut = dict(r_cut.report.vls)[1]
    sw1 = next(sw for sw in r_cut.report.switches if sw.switch_id == "S1")
    cut_ok = (stats_cut.accepted == stats_cut.sent == 25
              and stats_cut.duplicate_discarded == 0
              and stats_cut.loss_percent == 0.0
              and sw1.drops["link_down"] == 25)
    _verdict(5, both_ok and cut_ok,
             f"redundant: accepted={stats.accepted}/{stats.sent} "
             f"dup={stats.duplicate_discarded}; route A cut: "
             f"accepted={stats_cut.accepted}/{stats_cut.sent} via B, "
             f"dup={stats_cut.duplicate_discarded}")


def test_criterion_6_bag_conformance(xu_row_results, a350_result):
    credit_drops = 0
    for result in list(xu_row_results.values()) + [a350_result[1]]:
        credit_drops += sum(sw.drops["credit"] for sw in result.report.switches)

    # injected flow at twice its policed rate: period 2 ms against a bucket
    # provisioned for one 500 B frame per 4 ms
    cfg = NetworkConfig(
        protocol=Protocol.ETHERNET, sim_duration_s=1.0, ber=0.0, rng_seed=1,
        nodes=(NodeDecl("ES1", NodeKind.END_SYSTEM),
               NodeDecl("S1", NodeKind.SWITCH),
               NodeDecl("ES2", NodeKind.END_SYSTEM)),
        links=(LinkDecl("ES1", "S1"), LinkDecl("S1", "ES2")),
        vls=(VlDecl(vl_id=1, source="ES1", destinations=("ES2",),
                    route_a=(("ES1", "S1", "ES2"),), bag_ms=2.0,
                    min_frame_bytes=500, max_frame_bytes=500,
                    token_rate_bytes_per_s=125_000.0,
                    token_depth_bytes=1000.0),),
        switches=(SwitchDecl("S1"),))
    result = _run(validate_network(cfg), options=RunOptions(trace=True))
    sent = result.collector.sent[1]
    after_warmup = [r for r in result.trace
                    if r[4] == "dropped_credit" and r[1] >= 10]
    frames_after = sent - 10
    ratio = len(after_warmup) / frames_after
    ok = credit_drops == 0 and abs(ratio - 0.5) <= 0.05
    _verdict(6, ok, f"shipped scenarios credit drops={credit_drops}; "
                    f"2x-rate flow dropped {len(after_warmup)}/{frames_after} "
                    f"= {ratio:.3f} after warm-up (want 0.50 +/- 0.05)")


def test_criterion_7_runtime_scaling():
    result = run_bench(PAPER_PERIODICITIES_MS, reps=5, seed=1, jobs=1)
    fit = result.fit
    ok = fit is not None and fit.r_squared >= 0.95 and fit.slope > 0
    counts = [p.n_packets for p in result.points]
    _verdict(7, ok, f"linear fit over {counts} messages: "
                    f"R2={fit.r_squared:.5f} (want >= 0.95), "
                    f"slope={fit.slope:.3e} min/packet")


def test_criterion_8_determinism(xu_net):
    offsets = xu2019_worst_case("V1")
    r1 = _run(xu_net, offsets=offsets, seed=3, options=RunOptions(trace=True))
    r2 = _run(xu_net, offsets=offsets, seed=3, options=RunOptions(trace=True))
    xu_same = (write_report(r1.report, "json") == write_report(r2.report, "json")
               and trace_csv_text(r1.trace) == trace_csv_text(r2.trace))

    net = validate_network(a350_network(A350Params(periodicity_ms=8.0)))
    a1 = _run(net, seed=3)
    a2 = _run(net, seed=3)
    a_same = write_report(a1.report, "json") == write_report(a2.report, "json")
    _verdict(8, xu_same and a_same,
             f"xu2019 fom.json+trace.csv identical={xu_same}, "
             f"a350 fom.json identical={a_same}")


def test_criterion_9_a350_qualitative(a350_result):
    net, result = a350_result
    cu_means, es_means = [], []
    for vl_id, stats in result.report.vls:
        src = net.vls[vl_id].decl.source
        (cu_means if src.startswith("CU") else es_means).append(stats.delay_us.mean)
    lo, hi = min(cu_means + es_means), max(cu_means + es_means)
    in_band = 20.0 <= lo and hi < 1000.0
    ordered = (sum(cu_means) / len(cu_means)) < (sum(es_means) / len(es_means))
    _verdict(9, in_band and ordered,
             f"mean delays in [{lo:.1f}, {hi:.1f}]us; "
             f"CU->ES group {sum(cu_means)/len(cu_means):.1f}us < "
             f"ES->CU group {sum(es_means)/len(es_means):.1f}us: {ordered}")


def test_criterion_10_conservation():
    assert len(ALL_RESULTS) > 100
    bad = [r.conservation for r in ALL_RESULTS if not r.conservation.ok]
    _verdict(10, not bad,
             f"conservation identity exact on all {len(ALL_RESULTS)} runs")
