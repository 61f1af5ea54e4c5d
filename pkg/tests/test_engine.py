"""Event kernel ordering contract and run-level determinism."""

import pytest
from hypothesis import given, strategies as st

from avionet.engine import (
    EmptyQueueError,
    EventKind,
    EventQueue,
    RunOptions,
    SchedulingInPastError,
    run,
)
from avionet.netmodel import (
    LinkDecl,
    NetworkConfig,
    NodeDecl,
    NodeKind,
    Protocol,
    VlDecl,
    validate_network,
)
from avionet.scenarios import xu2019_network, xu2019_worst_case


class TestEventQueue:
    def test_pop_order_time_then_insertion(self):
        q = EventQueue()
        e1 = q.schedule(10_000, EventKind.FRAME_DEPARTURE, "first@10")
        e2 = q.schedule(10_000, EventKind.FRAME_DEPARTURE, "second@10")
        e3 = q.schedule(5_000, EventKind.FRAME_DEPARTURE, "only@5")
        assert [q.pop_next() for _ in range(3)] == [e3, e1, e2]

    def test_class_rank_orders_equal_times(self):
        q = EventQueue()
        q.schedule(100, EventKind.FRAME_DEPARTURE, "dep")
        q.schedule(100, EventKind.SWITCH_FORWARD_READY, "fwd")
        q.schedule(100, EventKind.PORT_TX_COMPLETE, "tx")
        kinds = [q.pop_next()[1] for _ in range(3)]
        assert kinds == [EventKind.PORT_TX_COMPLETE,
                         EventKind.SWITCH_FORWARD_READY,
                         EventKind.FRAME_DEPARTURE]

    def test_clock_advances_on_pop(self):
        q = EventQueue()
        q.schedule(42, EventKind.SIMULATION_END)
        q.pop_next()
        assert q.now_ns == 42

    def test_zero_delay_event_accepted(self):
        q = EventQueue()
        q.schedule(10, EventKind.SIMULATION_END)
        q.pop_next()
        q.schedule(10, EventKind.FRAME_DEPARTURE)  # t == now is legal

    def test_scheduling_in_past_rejected(self):
        q = EventQueue()
        q.schedule(10_000, EventKind.SIMULATION_END)
        q.pop_next()
        with pytest.raises(SchedulingInPastError):
            q.schedule(9_000, EventKind.FRAME_DEPARTURE)

    def test_pop_empty_raises(self):
        with pytest.raises(EmptyQueueError):
            EventQueue().pop_next()

    def test_tie_keys_unique(self):
        q = EventQueue()
        events = [q.schedule(7, EventKind.FRAME_DEPARTURE) for _ in range(10)]
        assert len({(e[1], e[2]) for e in events}) == 10

    @given(st.lists(st.integers(min_value=0, max_value=1_000), min_size=1,
                    max_size=200))
    def test_pop_times_nondecreasing(self, times):
        q = EventQueue()
        for t in times:
            q.schedule(t, EventKind.FRAME_DEPARTURE)
        popped = [q.pop_next()[0] for _ in range(len(times))]
        assert popped == sorted(popped)

    def test_event_count_conservation(self):
        q = EventQueue()
        for t in (5, 3, 9, 9):
            q.schedule(t, EventKind.FRAME_DEPARTURE)
        q.pop_next()
        q.pop_next()
        assert q.scheduled == q.dispatched + len(q)


def tiny_net(sim_s=0.01):
    cfg = NetworkConfig(
        protocol=Protocol.ETHERNET, sim_duration_s=sim_s,
        nodes=(NodeDecl("ES1", NodeKind.END_SYSTEM),
               NodeDecl("ES2", NodeKind.END_SYSTEM)),
        links=(LinkDecl("ES1", "ES2", 0.0, 100_000_000),),
        vls=(VlDecl(vl_id=1, source="ES1", destinations=("ES2",),
                    route_a=(("ES1", "ES2"),), bag_ms=1.0,
                    min_frame_bytes=500, max_frame_bytes=500),))
    return validate_network(cfg)


class TestRun:
    def test_empty_vl_set(self):
        cfg = NetworkConfig(
            protocol=Protocol.ETHERNET, sim_duration_s=0.01,
            nodes=(NodeDecl("ES1", NodeKind.END_SYSTEM),
                   NodeDecl("ES2", NodeKind.END_SYSTEM)),
            links=(LinkDecl("ES1", "ES2"),))
        result = run(validate_network(cfg))
        assert result.event_count == 1  # only SimulationEnd
        assert result.report.vls == ()

    def test_direct_link_delivery(self):
        result = run(tiny_net())
        stats = dict(result.report.vls)[1]
        assert stats.sent == 10
        assert stats.accepted == 10
        # 500 B at 100 Mb/s over a 0 m cable
        assert stats.delay_us.min == stats.delay_us.max == 40.0

    def test_departures_stop_before_sim_end(self):
        # periodic departures at t < duration only: 0.5 ms over 10 ms -> 20
        cfg = tiny_net().config
        vl = cfg.vls[0]
        cfg = NetworkConfig(**{**cfg.__dict__,
                               "vls": (VlDecl(**{**vl.__dict__, "bag_ms": 0.5}),)})
        result = run(validate_network(cfg))
        assert dict(result.report.vls)[1].sent == 20

    def test_run_deterministic_excluding_wall_clock(self):
        net = validate_network(xu2019_network())
        offsets = xu2019_worst_case("V1")
        r1 = run(net, offsets=offsets, options=RunOptions(trace=True))
        r2 = run(net, offsets=offsets, options=RunOptions(trace=True))
        assert r1.trace == r2.trace
        assert r1.event_count == r2.event_count
        assert r1.report.vls == r2.report.vls

    def test_offsets_must_reference_declared_es(self):
        with pytest.raises(ValueError):
            run(tiny_net(), offsets={"nope": 0})

    def test_conservation_holds(self):
        result = run(tiny_net())
        assert result.conservation.ok

    def test_final_time_within_duration(self):
        result = run(tiny_net(sim_s=0.005))
        assert result.final_time_ns <= result.sim_duration_ns

    def test_metrics_sampling_events(self):
        result = run(tiny_net(), options=RunOptions(
            capacity_sample_interval_ns=1_000_000))
        assert result.event_count > 0  # sampling must not disturb the run
        stats = dict(result.report.vls)[1]
        assert stats.accepted == 10

    def test_colocated_vls_serialize_through_one_port(self):
        # two VLs at one ES, equal offsets: the second frame waits out the
        # first one's 40 us serialization
        cfg = NetworkConfig(
            protocol=Protocol.ETHERNET, sim_duration_s=0.01,
            nodes=(NodeDecl("ES1", NodeKind.END_SYSTEM),
                   NodeDecl("ES2", NodeKind.END_SYSTEM)),
            links=(LinkDecl("ES1", "ES2", 0.0, 100_000_000),),
            vls=tuple(
                VlDecl(vl_id=i, source="ES1", destinations=("ES2",),
                       route_a=(("ES1", "ES2"),), bag_ms=1.0,
                       min_frame_bytes=500, max_frame_bytes=500)
                for i in (1, 2)))
        result = run(validate_network(cfg))
        stats = dict(result.report.vls)
        assert stats[1].delay_us.min == 40.0       # lower VL id goes first
        assert stats[2].delay_us.min == 80.0       # queued behind VL1

    def test_per_switch_frame_conservation(self):
        net = validate_network(xu2019_network())
        result = run(net, offsets=xu2019_worst_case("V1"))
        for sw in result.report.switches:
            assert (sw.frames_in + sw.fanout_created
                    == sw.frames_out + sum(sw.drops.values()))
