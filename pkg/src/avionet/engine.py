"""Deterministic discrete-event kernel and the simulation run loop.

Events dispatch in ascending (time, class rank, insertion sequence). The
class ranks are load-bearing: at one instant a port-transmission completion
must run before link deliveries, which run before switch forwards, which run
before new frame departures. This lets a port freed at t immediately serve a
frame that became ready at t, producing the back-to-back transmissions the
worst-case collision scenarios rely on. Insertion sequence numbers break the
remaining ties, so event chains started in VL-id order stay in VL-id order
through every equal-time encounter.
"""

from __future__ import annotations

import enum
import heapq
import time
from dataclasses import dataclass

from . import configio, endsystem, metrics, switchfabric
from .netmodel import ValidatedNetwork, transmission_time_ns


class EventKind(enum.IntEnum):
    """Event classes; the integer value is the tie-break rank."""

    PORT_TX_COMPLETE = 0
    LINK_DELIVERY = 1
    SWITCH_FORWARD_READY = 2
    FRAME_DEPARTURE = 3
    METRICS_SAMPLE = 4
    SIMULATION_END = 5


class SchedulingInPastError(RuntimeError):
    """An event was scheduled before the current clock: a model bug."""


class EmptyQueueError(RuntimeError):
    pass


class ConservationError(RuntimeError):
    """The end-of-run frame conservation identity failed: a model bug."""


class EventQueue:
    """Min-heap of (time_ns, kind, seq, payload) tuples.

    seq is assigned in strictly increasing creation order and makes every
    tie key unique; payloads are never compared.
    """

    def __init__(self) -> None:
        self._heap: list[tuple[int, int, int, object]] = []
        self._seq = 0
        self.now_ns = 0
        self.scheduled = 0
        self.dispatched = 0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, time_ns: int, kind: EventKind,
                 payload: object = None) -> tuple[int, int, int, object]:
        if time_ns < self.now_ns:
            raise SchedulingInPastError(
                f"event {kind.name} at {time_ns} ns is before clock {self.now_ns} ns")
        ev = (time_ns, int(kind), self._seq, payload)
        self._seq += 1
        self.scheduled += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop_next(self) -> tuple[int, int, int, object]:
        if not self._heap:
            raise EmptyQueueError("pop_next on empty event queue")
        ev = heapq.heappop(self._heap)
        self.now_ns = ev[0]
        self.dispatched += 1
        return ev

    def pending(self) -> list[tuple[int, int, int, object]]:
        """Remaining events, for end-of-run accounting only."""
        return list(self._heap)


@dataclass(frozen=True)
class RunOptions:
    """Per-run switches that do not belong in the network description."""

    trace: bool = False
    #: normalized (a, b) node pairs; frames are dropped instead of entering
    #: a disabled link (fault injection for redundancy experiments).
    disabled_links: frozenset[tuple[str, str]] = frozenset()
    #: periodic switch-capacity sampling; None records steps only.
    capacity_sample_interval_ns: int | None = None
    throughput_window_ns: int = 10_000_000
    jitter_mode: str = "min_baseline"


@dataclass
class SimulationResult:
    event_count: int
    final_time_ns: int
    sim_duration_ns: int
    wall_clock_s: float
    report: configio.ReportDocument
    collector: metrics.MetricsCollector
    conservation: metrics.ConservationCheck
    trace: list[tuple] | None


def run(net: ValidatedNetwork, offsets: dict[str, int] | None = None,
        seed: int | None = None, options: RunOptions | None = None) -> SimulationResult:
    """Simulate a validated network.

    ``offsets`` maps End System ids to a first-departure time in ns and
    overrides each affected VL's own start offset (the worst-case scenario
    rows are expressed this way). ``seed`` defaults to the config's rng_seed.
    """
    sim = _Simulation(net, offsets or {}, seed, options or RunOptions())
    return sim.run()


class _Simulation:
    def __init__(self, net: ValidatedNetwork, offsets: dict[str, int],
                 seed: int | None, options: RunOptions):
        for node in offsets:
            if node not in net.nodes or not net.nodes[node].is_end_system:
                raise ValueError(f"offset for unknown End System {node!r}")
        self.net = net
        self.opts = options
        self.seed = net.config.rng_seed if seed is None else seed
        self.queue = EventQueue()
        self.end_ns = net.sim_duration_ns
        self.collector = metrics.MetricsCollector(trace=options.trace)

        self.tx_states: dict[int, endsystem.VlTxState] = {}
        self.rx_states: dict[str, endsystem.RxState] = {}
        # ES output ports: one FIFO per (ES, network copy, first hop).
        self.es_ports: dict[tuple[str, str, str], switchfabric.PortQueue] = {}
        self.switches: dict[str, switchfabric.SwitchState] = {}

        for vl_id in sorted(net.vls):
            rvl = net.vls[vl_id]
            first = offsets.get(rvl.decl.source, rvl.decl.start_offset_ns)
            st = endsystem.VlTxState(rvl, self.seed,
                                     protocol=net.config.protocol,
                                     first_departure_ns=first)
            self.tx_states[vl_id] = st
            for copy in rvl.copies:
                for hop in rvl.first_hops[copy]:
                    key = (rvl.decl.source, copy, hop)
                    if key not in self.es_ports:
                        link = net.link_between(rvl.decl.source, hop)
                        self.es_ports[key] = switchfabric.PortQueue(
                            peer=hop, speed_bps=link.speed_bps, prop_ns=link.prop_ns)

        for sw_id in sorted(net.routing):
            params = net.switch_params[sw_id]
            ports = {}
            for peer in net.neighbors[sw_id]:
                link = net.link_between(sw_id, peer)
                ports[peer] = switchfabric.PortQueue(
                    peer=peer, speed_bps=link.speed_bps, prop_ns=link.prop_ns)
            buckets = {}
            for (vl_id, copy) in net.routing[sw_id]:
                rvl = net.vls[vl_id]
                buckets[(vl_id, copy)] = switchfabric.TokenBucket(
                    rate_bytes_per_s=rvl.token_rate_bytes_per_s,
                    depth_bytes=rvl.token_depth_bytes,
                    credit_bytes=rvl.token_depth_bytes,
                )
            self.switches[sw_id] = switchfabric.SwitchState(
                switch_id=sw_id, params=params, ports=ports,
                table=net.routing[sw_id], buckets=buckets)

        # Lower VL id schedules first at equal offsets; this is what seeds the
        # ascending-VL-id tie-break through the whole event cascade.
        for vl_id in sorted(net.vls):
            st = self.tx_states[vl_id]
            t0 = st.plan_departure()
            if t0 < self.end_ns:
                self.queue.schedule(t0, EventKind.FRAME_DEPARTURE, vl_id)
        if options.capacity_sample_interval_ns:
            self.queue.schedule(0, EventKind.METRICS_SAMPLE, None)
        self.queue.schedule(self.end_ns, EventKind.SIMULATION_END, None)

    # -- run loop ---------------------------------------------------------

    def run(self) -> SimulationResult:
        t_start = time.perf_counter()
        q = self.queue
        while True:
            t, kind, _seq, payload = q.pop_next()
            if kind == EventKind.PORT_TX_COMPLETE:
                self._on_tx_complete(t, payload)
            elif kind == EventKind.LINK_DELIVERY:
                self._on_delivery(t, payload)
            elif kind == EventKind.SWITCH_FORWARD_READY:
                self._on_forward_ready(t, payload)
            elif kind == EventKind.FRAME_DEPARTURE:
                self._on_departure(t, payload)
            elif kind == EventKind.METRICS_SAMPLE:
                self._on_metrics_sample(t)
            else:  # SIMULATION_END
                break
        wall = time.perf_counter() - t_start
        return self._finalize(wall)

    # -- handlers ---------------------------------------------------------

    def _on_departure(self, now: int, vl_id: int) -> None:
        st = self.tx_states[vl_id]
        rvl = self.net.vls[vl_id]
        frame = endsystem.generate_frame(st, now)
        copies = endsystem.emit(st, frame, self.net.config.ber)
        self.collector.on_logical_sent(vl_id, len(rvl.decl.destinations))
        source = rvl.decl.source
        tracing = self.collector.trace is not None
        for fcopy in copies:
            hops = rvl.first_hops[fcopy.copy]
            for i, hop in enumerate(hops):
                entity = fcopy if i == 0 else endsystem.clone_frame(fcopy)
                if tracing:
                    entity.hop_log = []
                self.collector.on_entity_created(vl_id)
                self._trace(entity, source, "generated", now)
                self._enqueue_at_es(source, entity, hop, now)
        nxt = st.plan_departure()
        if nxt < self.end_ns:
            self.queue.schedule(nxt, EventKind.FRAME_DEPARTURE, vl_id)

    def _enqueue_at_es(self, es: str, frame, hop: str, now: int) -> None:
        if self._link_disabled(es, hop):
            self.collector.on_link_down_drop(es, frame.vl_id)
            self._trace(frame, es, "dropped_link_down", now)
            return
        port = self.es_ports[(es, frame.copy, hop)]
        port.fifo.append((frame, None))
        self._trace(frame, es, "enqueued", now)
        if port.idle(now):
            self._start_tx(("es", es, frame.copy, hop), port, now)

    def _start_tx(self, port_key: tuple, port: switchfabric.PortQueue, now: int) -> None:
        frame, tag = port.fifo.popleft()
        port.in_flight = (frame, tag)
        port.busy_until_ns = now + transmission_time_ns(frame.length_bytes, port.speed_bps)
        self.queue.schedule(port.busy_until_ns, EventKind.PORT_TX_COMPLETE, port_key)

    def _on_tx_complete(self, now: int, port_key: tuple) -> None:
        if port_key[0] == "es":
            _, node, copy, peer = port_key
            port = self.es_ports[(node, copy, peer)]
            frame, _tag = port.in_flight
            port.in_flight = None
        else:
            _, node, peer = port_key
            sw = self.switches[node]
            port = sw.ports[peer]
            frame = sw.complete_transmission(peer, now)
        self._trace(frame, node, "tx_complete", now)
        self.queue.schedule(now + port.prop_ns, EventKind.LINK_DELIVERY,
                            (frame, port.peer))
        if port.fifo:
            self._start_tx(port_key, port, now)

    def _on_delivery(self, now: int, payload: tuple) -> None:
        frame, node = payload
        self._trace(frame, node, "arrived", now)
        if self.net.is_switch(node):
            sw = self.switches[node]
            action, detail = sw.ingress(frame, now)
            if action == "drop":
                self._trace(frame, node, f"dropped_{detail}", now)
            else:
                self.queue.schedule(detail, EventKind.SWITCH_FORWARD_READY,
                                    (frame, node))
        else:
            rx = self.rx_states.get(node)
            if rx is None:
                rx = self.rx_states[node] = endsystem.RxState()
            outcome = rx.receive(frame)
            if outcome is endsystem.ReceiveOutcome.ACCEPTED:
                self.collector.record_delivery(frame.vl_id, frame.generated_at_ns,
                                               now, frame.length_bytes * 8)
                self._trace(frame, node, "accepted", now)
            elif outcome is endsystem.ReceiveOutcome.DUPLICATE_DISCARDED:
                self.collector.on_duplicate(frame.vl_id)
                self._trace(frame, node, "duplicate_discarded", now)
            else:
                self.collector.on_corrupt_at_es(frame.vl_id)
                self._trace(frame, node, "corrupt_discarded", now)

    def _on_forward_ready(self, now: int, payload: tuple) -> None:
        frame, sw_id = payload
        sw = self.switches[sw_id]
        hops = sw.table.get((frame.vl_id, frame.copy))
        if not hops:
            sw.drops["no_route"] += 1
            self._trace(frame, sw_id, "dropped_no_route", now)
            return
        for i, hop in enumerate(hops):
            entity = frame
            if i > 0:
                entity = endsystem.clone_frame(frame)
                sw.fanout_created += 1
                self.collector.on_entity_created(frame.vl_id)
            if self._link_disabled(sw_id, hop):
                sw.drops["link_down"] += 1
                self._trace(entity, sw_id, "dropped_link_down", now)
                continue
            if not sw.enqueue_output(entity, hop, now):
                self._trace(entity, sw_id, "dropped_memory", now)
                continue
            self._trace(entity, sw_id, "enqueued", now)
            port = sw.ports[hop]
            if port.idle(now):
                self._start_tx(("sw", sw_id, hop), port, now)

    def _on_metrics_sample(self, now: int) -> None:
        for sw_id in sorted(self.switches):
            self.switches[sw_id].record_sample(now, "sample")
        nxt = now + self.opts.capacity_sample_interval_ns
        if nxt <= self.end_ns:
            self.queue.schedule(nxt, EventKind.METRICS_SAMPLE, None)

    # -- helpers ----------------------------------------------------------

    def _link_disabled(self, u: str, v: str) -> bool:
        if not self.opts.disabled_links:
            return False
        key = (u, v) if u <= v else (v, u)
        return key in self.opts.disabled_links

    def _trace(self, frame, node: str, event: str, now: int) -> None:
        if self.collector.trace is not None:
            row = (frame.vl_id, frame.seq, frame.copy, node, event, now)
            self.collector.trace.append(row)
            if frame.hop_log is not None:
                frame.hop_log.append((node, event, now))

    # -- end of run -------------------------------------------------------

    def _count_resident(self) -> int:
        resident = 0
        for port in self.es_ports.values():
            resident += len(port.fifo) + (1 if port.in_flight else 0)
        for sw in self.switches.values():
            for port in sw.ports.values():
                resident += len(port.fifo) + (1 if port.in_flight else 0)
        for t, kind, _seq, payload in self.queue.pending():
            if kind in (EventKind.LINK_DELIVERY, EventKind.SWITCH_FORWARD_READY):
                resident += 1
        return resident

    def _finalize(self, wall_clock_s: float) -> SimulationResult:
        net = self.net
        resident = self._count_resident()
        conservation = self.collector.conservation_check(
            switches=list(self.switches.values()), resident=resident)
        if not conservation.ok:
            raise ConservationError(
                f"frame conservation identity violated: {conservation}")

        vl_stats = {}
        for vl_id in sorted(net.vls):
            rvl = net.vls[vl_id]
            c = self.collector
            vl_stats[vl_id] = metrics.summarize(
                c.delays_ns.get(vl_id, []),
                sent=c.sent.get(vl_id, 0),
                expected=c.expected.get(vl_id, 0),
                accepted=c.accepted.get(vl_id, 0),
                duplicate_discarded=c.duplicates.get(vl_id, 0),
                corrupt_discarded=c.corrupt_at_es.get(vl_id, 0),
                deliveries=c.deliveries.get(vl_id, []),
                sim_duration_ns=net.sim_duration_ns,
                throughput_window_ns=self.opts.throughput_window_ns,
                jitter_mode=self.opts.jitter_mode,
            )

        switch_reports = []
        for sw_id in sorted(self.switches):
            sw = self.switches[sw_id]
            switch_reports.append(configio.SwitchReport(
                switch_id=sw_id,
                drops=dict(sw.drops),
                frames_in=sw.frames_in,
                frames_out=sw.frames_out,
                fanout_created=sw.fanout_created,
                peak_used_bytes=sw.peak_used_bytes,
                total_capacity_bytes=sw.total_capacity_bytes,
                capacity=tuple(sw.capacity_log),
            ))

        meta = configio.RunMeta(
            protocol=net.config.protocol.value,
            seed=self.seed,
            sim_duration_ns=net.sim_duration_ns,
            final_time_ns=self.queue.now_ns,
            event_count=self.queue.dispatched,
            wall_clock_s=wall_clock_s,
        )
        report = configio.ReportDocument(
            meta=meta,
            vls=tuple((vl_id, vl_stats[vl_id]) for vl_id in sorted(vl_stats)),
            switches=tuple(switch_reports),
        )
        return SimulationResult(
            event_count=self.queue.dispatched,
            final_time_ns=self.queue.now_ns,
            sim_duration_ns=net.sim_duration_ns,
            wall_clock_s=wall_clock_s,
            report=report,
            collector=self.collector,
            conservation=conservation,
            trace=self.collector.trace,
        )
