"""Network domain model: topology declarations, validation, routing tables,
and the elementary store-and-forward timing formulas.

All simulated time is handled as integer nanoseconds so that equal-time
collisions (the worst-case constructions use 1 ns offsets) stay exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

NS_PER_S = 1_000_000_000
NS_PER_MS = 1_000_000
NS_PER_US = 1_000

#: Signal propagation on twisted pair, about 0.67c.
PROPAGATION_NS_PER_M = 5.0

DEFAULT_LINK_SPEED_BPS = 100_000_000
DEFAULT_SWITCH_LATENCY_NS = 16_000
DEFAULT_DEDICATED_BYTES_PER_PORT = 32 * 1024
DEFAULT_SHARED_POOL_BYTES = 128 * 1024

#: Standard Ethernet frame bounds (bytes on the wire).
FRAME_BYTES_MIN = 64
FRAME_BYTES_MAX = 1518

#: Legal AFDX bandwidth allocation gaps in milliseconds (powers of two).
AFDX_BAG_MS = (1, 2, 4, 8, 16, 32, 64, 128)


class Protocol(str, enum.Enum):
    AFDX = "AFDX"
    ETHERNET = "Ethernet"


class NodeKind(str, enum.Enum):
    END_SYSTEM = "end_system"
    SWITCH = "switch"
    CONTROL_UNIT = "control_unit"  # an End System tagged as a concentrator

    @property
    def is_end_system(self) -> bool:
        return self is not NodeKind.SWITCH


@dataclass(frozen=True)
class NodeDecl:
    id: str
    kind: NodeKind


@dataclass(frozen=True)
class LinkDecl:
    """Full-duplex cable between two declared nodes."""

    a: str
    b: str
    cable_length_m: float = 0.0
    link_speed_bps: int = DEFAULT_LINK_SPEED_BPS

    def key(self) -> tuple[str, str]:
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


@dataclass(frozen=True)
class VlDecl:
    """One virtual link (AFDX) or periodic flow (Ethernet).

    ``route_a``/``route_b`` are explicit node paths, one per destination
    (a single path for unicast). ``bag_ms`` is the BAG in AFDX mode and the
    message periodicity in Ethernet mode.
    """

    vl_id: int
    source: str
    destinations: tuple[str, ...]
    route_a: tuple[tuple[str, ...], ...]
    route_b: tuple[tuple[str, ...], ...] | None = None
    bag_ms: float = 4.0
    min_frame_bytes: int = FRAME_BYTES_MIN
    max_frame_bytes: int = FRAME_BYTES_MAX
    start_offset_ns: int = 0
    jitter_max_ns: int = 0
    # Policing overrides; defaults derive from max_frame_bytes and the BAG.
    token_rate_bytes_per_s: float | None = None
    token_depth_bytes: float | None = None

    @property
    def bag_ns(self) -> int:
        return round(self.bag_ms * NS_PER_MS)


@dataclass(frozen=True)
class SwitchDecl:
    id: str
    latency_ns: int = DEFAULT_SWITCH_LATENCY_NS
    dedicated_bytes_per_port: int = DEFAULT_DEDICATED_BYTES_PER_PORT
    shared_pool_bytes: int = DEFAULT_SHARED_POOL_BYTES


@dataclass(frozen=True)
class NetworkConfig:
    """Declarative network description (the full input parameter set)."""

    protocol: Protocol
    sim_duration_s: float
    ber: float = 0.0
    rng_seed: int = 1
    redundancy: bool = False
    nodes: tuple[NodeDecl, ...] = ()
    links: tuple[LinkDecl, ...] = ()
    vls: tuple[VlDecl, ...] = ()
    switches: tuple[SwitchDecl, ...] = ()

    @property
    def sim_duration_ns(self) -> int:
        return round(self.sim_duration_s * NS_PER_S)


@dataclass(frozen=True)
class Violation:
    kind: str
    entity: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} [{self.entity}]: {self.message}"


class NetworkValidationError(ValueError):
    """Raised by validate_network; carries every violation found."""

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"invalid network configuration:\n{lines}")


COPY_A = "A"
COPY_B = "B"


@dataclass(frozen=True)
class ResolvedVl:
    decl: VlDecl
    bag_ns: int
    #: copy id -> node paths (one per destination)
    routes: dict[str, tuple[tuple[str, ...], ...]]
    #: copy id -> next hops out of the source ES
    first_hops: dict[str, tuple[str, ...]]
    token_rate_bytes_per_s: float
    token_depth_bytes: float

    @property
    def vl_id(self) -> int:
        return self.decl.vl_id

    @property
    def copies(self) -> tuple[str, ...]:
        return tuple(self.routes)


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    cable_length_m: float
    speed_bps: int
    prop_ns: int


@dataclass(frozen=True)
class ValidatedNetwork:
    """Normalized, checked network ready for simulation."""

    config: NetworkConfig
    nodes: dict[str, NodeKind]
    links: dict[tuple[str, str], Link]
    neighbors: dict[str, tuple[str, ...]]
    vls: dict[int, ResolvedVl]
    #: switch id -> (vl_id, copy) -> next hops (fan-out at that switch)
    routing: dict[str, dict[tuple[int, str], tuple[str, ...]]]
    switch_params: dict[str, SwitchDecl]
    sim_duration_ns: int

    def link_between(self, u: str, v: str) -> Link:
        return self.links[(u, v) if u <= v else (v, u)]

    def is_switch(self, node_id: str) -> bool:
        return self.nodes[node_id] is NodeKind.SWITCH


def transmission_time_ns(frame_bytes: int, link_speed_bps: int) -> int:
    """Serialization time of a frame on a link, rounded to nanoseconds."""
    if frame_bytes <= 0:
        raise ValueError(f"frame_bytes must be positive, got {frame_bytes}")
    if link_speed_bps <= 0:
        raise ValueError(f"link_speed_bps must be positive, got {link_speed_bps}")
    num = frame_bytes * 8 * NS_PER_S
    return (2 * num + link_speed_bps) // (2 * link_speed_bps)


def propagation_delay_ns(cable_length_m: float) -> int:
    if cable_length_m < 0:
        raise ValueError(f"cable_length_m must be >= 0, got {cable_length_m}")
    return round(cable_length_m * PROPAGATION_NS_PER_M)


def analytic_min_delay_ns(net: ValidatedNetwork, vl_id: int,
                          frame_bytes: int | None = None) -> int:
    """Uncontended lower bound on the end-to-end delay of a VL.

    Sums per-link serialization and propagation plus per-switch latency over
    the route. Uses the VL's minimum frame length by default so the result
    bounds every delivered frame, whatever length the generator drew; with
    redundancy or multicast the bound is the minimum over copies and
    destination paths (first-valid-wins accepts the fastest copy).
    """
    rvl = net.vls[vl_id]
    nbytes = frame_bytes if frame_bytes is not None else rvl.decl.min_frame_bytes
    best: int | None = None
    for paths in rvl.routes.values():
        for path in paths:
            total = 0
            for u, v in zip(path, path[1:]):
                link = net.link_between(u, v)
                total += transmission_time_ns(nbytes, link.speed_bps) + link.prop_ns
            for node in path[1:-1]:
                total += net.switch_params[node].latency_ns
            best = total if best is None else min(best, total)
    assert best is not None
    return best


def build_routing_tables(
    net: ValidatedNetwork,
) -> dict[str, dict[tuple[int, str], tuple[str, ...]]]:
    """Per-switch forwarding tables keyed by (vl_id, copy)."""
    return _tables_from_routes({vid: rvl.routes for vid, rvl in net.vls.items()})


def _tables_from_routes(
    routes_by_vl: dict[int, dict[str, tuple[tuple[str, ...], ...]]],
) -> dict[str, dict[tuple[int, str], tuple[str, ...]]]:
    tables: dict[str, dict[tuple[int, str], set[str]]] = {}
    for vl_id, by_copy in routes_by_vl.items():
        for copy, paths in by_copy.items():
            for path in paths:
                for i in range(1, len(path) - 1):
                    sw = path[i]
                    tables.setdefault(sw, {}).setdefault((vl_id, copy), set()).add(path[i + 1])
    return {
        sw: {key: tuple(sorted(hops)) for key, hops in entries.items()}
        for sw, entries in tables.items()
    }


def validate_network(config: NetworkConfig) -> ValidatedNetwork:
    """Check every declaration against the model invariants.

    Collects all problems instead of failing fast and raises a single
    NetworkValidationError naming each offending entity.
    """
    bad: list[Violation] = []

    if config.sim_duration_s <= 0:
        bad.append(Violation("bad_sim_param", "sim_duration_s",
                             f"must be > 0, got {config.sim_duration_s}"))
    if not (0.0 <= config.ber < 1.0):
        bad.append(Violation("bad_sim_param", "ber",
                             f"must be in [0, 1), got {config.ber}"))

    nodes: dict[str, NodeKind] = {}
    for decl in config.nodes:
        if decl.id in nodes:
            bad.append(Violation("duplicate_node", decl.id, "node declared twice"))
        else:
            nodes[decl.id] = decl.kind

    links: dict[tuple[str, str], Link] = {}
    neighbors: dict[str, list[str]] = {n: [] for n in nodes}
    for decl in config.links:
        ok = True
        for end in (decl.a, decl.b):
            if end not in nodes:
                bad.append(Violation("unknown_node", f"link {decl.a}-{decl.b}",
                                     f"endpoint {end} is not a declared node"))
                ok = False
        if decl.a == decl.b:
            bad.append(Violation("self_link", decl.a, "link endpoints are identical"))
            ok = False
        if decl.link_speed_bps <= 0:
            bad.append(Violation("bad_link_param", f"link {decl.a}-{decl.b}",
                                 f"link_speed_bps must be > 0, got {decl.link_speed_bps}"))
            ok = False
        if decl.cable_length_m < 0:
            bad.append(Violation("bad_link_param", f"link {decl.a}-{decl.b}",
                                 f"cable_length_m must be >= 0, got {decl.cable_length_m}"))
            ok = False
        if not ok:
            continue
        key = decl.key()
        if key in links:
            bad.append(Violation("duplicate_link", f"link {decl.a}-{decl.b}",
                                 "link between this node pair declared twice"))
            continue
        links[key] = Link(key[0], key[1], decl.cable_length_m, decl.link_speed_bps,
                          propagation_delay_ns(decl.cable_length_m))
        neighbors[decl.a].append(decl.b)
        neighbors[decl.b].append(decl.a)

    switch_params: dict[str, SwitchDecl] = {}
    for sd in config.switches:
        if sd.id not in nodes:
            bad.append(Violation("unknown_node", f"switch_params {sd.id}",
                                 "parameters given for an undeclared node"))
            continue
        if nodes[sd.id] is not NodeKind.SWITCH:
            bad.append(Violation("bad_switch_param", sd.id,
                                 "switch parameters given for a non-switch node"))
            continue
        if sd.id in switch_params:
            bad.append(Violation("bad_switch_param", sd.id, "parameters declared twice"))
            continue
        if sd.latency_ns < 0 or sd.dedicated_bytes_per_port < 0 or sd.shared_pool_bytes < 0:
            bad.append(Violation("bad_switch_param", sd.id, "negative latency or memory"))
            continue
        switch_params[sd.id] = sd
    for n, kind in nodes.items():
        if kind is NodeKind.SWITCH and n not in switch_params:
            switch_params[n] = SwitchDecl(id=n)

    vls: dict[int, ResolvedVl] = {}
    for vl in config.vls:
        entity = f"VL{vl.vl_id}"
        if vl.vl_id in vls:
            bad.append(Violation("duplicate_vl_id", entity, "VL id declared twice"))
            continue

        if vl.bag_ms <= 0:
            bad.append(Violation("illegal_bag", entity,
                                 f"BAG/periodicity must be > 0, got {vl.bag_ms} ms"))
            continue
        if config.protocol is Protocol.AFDX and vl.bag_ms not in AFDX_BAG_MS:
            bad.append(Violation("illegal_bag", entity,
                                 f"AFDX BAG must be a power of 2 in 1..128 ms, got {vl.bag_ms} ms"))
        if not (FRAME_BYTES_MIN <= vl.min_frame_bytes <= vl.max_frame_bytes
                <= FRAME_BYTES_MAX):
            bad.append(Violation(
                "frame_bounds", entity,
                f"need {FRAME_BYTES_MIN} <= min <= max <= {FRAME_BYTES_MAX}, "
                f"got [{vl.min_frame_bytes}, {vl.max_frame_bytes}]"))
        if vl.start_offset_ns < 0 or vl.jitter_max_ns < 0:
            bad.append(Violation("bad_vl_param", entity, "negative offset or jitter"))
        if vl.token_rate_bytes_per_s is not None and vl.token_rate_bytes_per_s <= 0:
            bad.append(Violation("bad_vl_param", entity, "token rate must be > 0"))
        if vl.token_depth_bytes is not None and vl.token_depth_bytes <= 0:
            bad.append(Violation("bad_vl_param", entity, "token depth must be > 0"))

        endpoint_ok = True
        if vl.source not in nodes or not nodes[vl.source].is_end_system:
            bad.append(Violation("unknown_node", entity,
                                 f"source {vl.source} is not a declared End System"))
            endpoint_ok = False
        if not vl.destinations:
            bad.append(Violation("route_shape", entity, "no destinations declared"))
            endpoint_ok = False
        for d in vl.destinations:
            if d not in nodes or not nodes[d].is_end_system:
                bad.append(Violation("unknown_node", entity,
                                     f"destination {d} is not a declared End System"))
                endpoint_ok = False
        if len(set(vl.destinations)) != len(vl.destinations):
            bad.append(Violation("route_shape", entity, "duplicate destination"))
            endpoint_ok = False

        if config.redundancy and vl.route_b is None:
            bad.append(Violation("missing_route_b", entity,
                                 "redundancy is enabled but route B is missing"))

        if not endpoint_ok:
            continue

        # Route B is checked whenever declared but only carries traffic with
        # redundancy enabled.
        routes: dict[str, tuple[tuple[str, ...], ...]] = {}
        routes_ok = True
        for copy, paths, active in (
            (COPY_A, vl.route_a, True),
            (COPY_B, vl.route_b, config.redundancy),
        ):
            if paths is None:
                continue
            checked = _check_copy_routes(vl, copy, paths, nodes, links, bad)
            if checked is None:
                routes_ok = False
            elif active:
                routes[copy] = checked
        if not routes_ok:
            continue

        rate = vl.token_rate_bytes_per_s
        if rate is None:
            rate = vl.max_frame_bytes * NS_PER_S / vl.bag_ns
        depth = vl.token_depth_bytes
        if depth is None:
            depth = 2.0 * vl.max_frame_bytes

        vls[vl.vl_id] = ResolvedVl(
            decl=vl,
            bag_ns=vl.bag_ns,
            routes=routes,
            first_hops={c: tuple(sorted({p[1] for p in paths}))
                        for c, paths in routes.items()},
            token_rate_bytes_per_s=rate,
            token_depth_bytes=depth,
        )

    if bad:
        raise NetworkValidationError(bad)

    return ValidatedNetwork(
        config=config,
        nodes=nodes,
        links=links,
        neighbors={n: tuple(sorted(v)) for n, v in neighbors.items()},
        vls=vls,
        routing=_tables_from_routes({vid: r.routes for vid, r in vls.items()}),
        switch_params=switch_params,
        sim_duration_ns=config.sim_duration_ns,
    )


def _check_copy_routes(vl: VlDecl, copy: str, paths: tuple[tuple[str, ...], ...],
                       nodes: dict[str, NodeKind],
                       links: dict[tuple[str, str], Link],
                       bad: list[Violation]) -> tuple[tuple[str, ...], ...] | None:
    """Validate one copy's route paths; returns them or records violations."""
    entity = f"VL{vl.vl_id} route {copy}"
    if not paths:
        bad.append(Violation("route_shape", entity, "empty route"))
        return None

    ok = True
    leaves: list[str] = []
    for path in paths:
        if len(path) < 2:
            bad.append(Violation("route_shape", entity, f"path {list(path)} too short"))
            ok = False
            continue
        if path[0] != vl.source:
            bad.append(Violation("route_shape", entity,
                                 f"path starts at {path[0]}, not source {vl.source}"))
            ok = False
        if len(set(path)) != len(path):
            bad.append(Violation("route_shape", entity,
                                 f"path {list(path)} visits a node twice"))
            ok = False
        for hop in path[1:-1]:
            if hop in nodes and nodes[hop] is not NodeKind.SWITCH:
                bad.append(Violation("route_shape", entity,
                                     f"interior node {hop} is not a switch"))
                ok = False
        for u, v in zip(path, path[1:]):
            if u in nodes and v in nodes:
                key = (u, v) if u <= v else (v, u)
                if key not in links:
                    bad.append(Violation("disconnected_route", entity,
                                         f"no declared link {u}-{v}"))
                    ok = False
            else:
                for n in (u, v):
                    if n not in nodes:
                        bad.append(Violation("unknown_node", entity,
                                             f"route references undeclared node {n}"))
                        ok = False
        leaves.append(path[-1])

    if sorted(leaves) != sorted(vl.destinations):
        bad.append(Violation("route_shape", entity,
                             f"route leaves {sorted(leaves)} do not match "
                             f"destinations {sorted(vl.destinations)}"))
        ok = False

    # Paths of one copy must form a tree (single predecessor per node), so a
    # multicast frame reaches each switch exactly once before fanning out.
    pred: dict[str, str] = {}
    for path in paths:
        for u, v in zip(path, path[1:]):
            if v in pred and pred[v] != u:
                bad.append(Violation("inconsistent_route", entity,
                                     f"node {v} is reached from both {pred[v]} and {u}"))
                ok = False
            pred[v] = u

    return tuple(paths) if ok else None
