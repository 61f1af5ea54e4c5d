"""Built-in scenario builders.

The xu2019 scenario is the published validation use case: 7 End Systems,
3 switches, 5 virtual links, 500-byte frames on a 4 ms BAG, with per-row
start offsets that force each VL's worst-case collision. Link speed
(100 Mb/s) and switch latency (16 us) are pinned here as scenario data, not
engine defaults: they are the values under which the published worst-case
delays come out exactly.

The a350 scenario is a parametric 37-ES / 7-switch topology with 60 periodic
flows for performance work; its routing is seeded-random, so only its
qualitative traffic structure is meaningful.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .netmodel import (
    DEFAULT_LINK_SPEED_BPS,
    LinkDecl,
    NetworkConfig,
    NodeDecl,
    NodeKind,
    Protocol,
    SwitchDecl,
    VlDecl,
)

#: The "insignificant" time delta used to order frames inside a collision.
DELTA_T_NS = 1

XU_LINK_SPEED_BPS = 100_000_000
XU_SWITCH_LATENCY_NS = 16_000
XU_FRAME_BYTES = 500
XU_BAG_MS = 4.0


class UnknownRowError(ValueError):
    pass


class UnknownScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class WorstCaseRow:
    """One worst-case construction: who transmits when, and the expected
    worst delay of the targeted VL."""

    row_id: str
    target_vl_id: int
    offsets_ns: dict[str, int]
    expected_worst_delay_us: float


def xu2019_network() -> NetworkConfig:
    nodes = tuple(
        [NodeDecl(f"ES{i}", NodeKind.END_SYSTEM) for i in range(1, 8)]
        + [NodeDecl(f"S{i}", NodeKind.SWITCH) for i in range(1, 4)]
    )
    link_pairs = [
        ("ES1", "S1"), ("ES2", "S1"),
        ("ES3", "S2"), ("ES4", "S2"),
        ("ES5", "S3"), ("ES6", "S3"), ("ES7", "S3"),
        ("S1", "S3"), ("S2", "S3"),
    ]
    links = tuple(LinkDecl(a, b, 0.0, XU_LINK_SPEED_BPS) for a, b in link_pairs)
    paths = {
        1: ("ES1", "S1", "S3", "ES6"),
        2: ("ES2", "S1", "S3", "ES7"),
        3: ("ES3", "S2", "S3", "ES6"),
        4: ("ES4", "S2", "S3", "ES6"),
        5: ("ES5", "S3", "ES6"),
    }
    vls = tuple(
        VlDecl(vl_id=i, source=p[0], destinations=(p[-1],), route_a=(p,),
               bag_ms=XU_BAG_MS, min_frame_bytes=XU_FRAME_BYTES,
               max_frame_bytes=XU_FRAME_BYTES)
        for i, p in paths.items()
    )
    switches = tuple(SwitchDecl(f"S{i}", latency_ns=XU_SWITCH_LATENCY_NS)
                     for i in range(1, 4))
    return NetworkConfig(
        protocol=Protocol.AFDX, sim_duration_s=0.02, ber=0.0, rng_seed=1,
        redundancy=False, nodes=nodes, links=links, vls=vls, switches=switches)


def _row(row_id: str, target: int, es1, es2, es3, es4, es5,
         expected_us: float) -> WorstCaseRow:
    return WorstCaseRow(
        row_id=row_id, target_vl_id=target,
        offsets_ns={"ES1": es1, "ES2": es2, "ES3": es3, "ES4": es4, "ES5": es5},
        expected_worst_delay_us=expected_us)


D = DELTA_T_NS
XU2019_ROWS: dict[str, WorstCaseRow] = {
    "V1": _row("V1", 1, 2 * D, D, 0, 0, 96_000, 272.0),
    "V2": _row("V2", 2, 0, D, 0, 0, 96_000, 192.0),
    "V3": _row("V3", 3, D, 0, 2 * D, D, 96_000, 272.0),
    "V4": _row("V4", 4, D, 0, D, 2 * D, 96_000, 272.0),
    "V5": _row("V5", 5, D, 0, 0, 0, 96_000 + 2 * D, 176.0),
}


def xu2019_worst_case(row: str) -> dict[str, int]:
    """Per-ES first-departure offsets for a worst-case row (V1..V5)."""
    try:
        return dict(XU2019_ROWS[row].offsets_ns)
    except KeyError:
        raise UnknownRowError(
            f"unknown worst-case row {row!r}; expected one of {sorted(XU2019_ROWS)}")


@dataclass(frozen=True)
class A350Params:
    n_es: int = 37          # total End Systems, control units included
    n_cu: int = 6
    n_switches: int = 7
    n_vls: int = 60
    periodicity_ms: float = 0.5
    sim_duration_s: float = 1.0
    min_frame_bytes: int = 300
    length_spread_bytes: int = 200
    seed: int = 1


def a350_network(params: A350Params = A350Params()) -> NetworkConfig:
    """Seeded-random A350-style topology.

    Control units hang off the first n_cu switches; the remaining End
    Systems spread round-robin over all switches; the switch backbone is a
    full mesh so every route crosses at most two switches. Flows split into
    a small CU-to-ES group (one per control unit, low contention) and an
    ES-to-CU group (the rest, converging on the CU links).
    """
    if params.n_cu >= params.n_es or params.n_cu > params.n_vls:
        raise ValueError("need n_cu < n_es and n_cu <= n_vls")
    if params.n_cu > params.n_switches:
        raise ValueError("need one switch per control unit")
    rng = random.Random(params.seed)

    switches = [f"SW{i}" for i in range(1, params.n_switches + 1)]
    cus = [f"CU{i}" for i in range(1, params.n_cu + 1)]
    n_plain = params.n_es - params.n_cu
    ess = [f"ES{i}" for i in range(1, n_plain + 1)]

    nodes = (
        [NodeDecl(s, NodeKind.SWITCH) for s in switches]
        + [NodeDecl(c, NodeKind.CONTROL_UNIT) for c in cus]
        + [NodeDecl(e, NodeKind.END_SYSTEM) for e in ess]
    )

    attach: dict[str, str] = {}
    links: list[LinkDecl] = []
    for i, cu in enumerate(cus):
        attach[cu] = switches[i]
        links.append(LinkDecl(cu, switches[i], 0.0, DEFAULT_LINK_SPEED_BPS))
    for i, es in enumerate(ess):
        attach[es] = switches[i % len(switches)]
        links.append(LinkDecl(es, switches[i % len(switches)], 0.0,
                              DEFAULT_LINK_SPEED_BPS))
    for i, a in enumerate(switches):
        for b in switches[i + 1:]:
            links.append(LinkDecl(a, b, 0.0, DEFAULT_LINK_SPEED_BPS))

    def route(src: str, dst: str) -> tuple[str, ...]:
        sa, sb = attach[src], attach[dst]
        return (src, sa, dst) if sa == sb else (src, sa, sb, dst)

    cu_vl_ids = set(rng.sample(range(1, params.n_vls + 1), params.n_cu))
    # Spread the ES-to-CU flows evenly over the control units so no CU link
    # saturates; sources stay random draws, so several flows can share one
    # source ES and contend for its output port.
    n_to_cu = params.n_vls - params.n_cu
    cu_dsts = [cus[i % len(cus)] for i in range(n_to_cu)]
    rng.shuffle(cu_dsts)
    vls: list[VlDecl] = []
    cu_iter = iter(cus)
    cu_dst_iter = iter(cu_dsts)
    for vl_id in range(1, params.n_vls + 1):
        if vl_id in cu_vl_ids:
            src = next(cu_iter)
            dst = rng.choice(ess)
        else:
            src = rng.choice(ess)
            dst = next(cu_dst_iter)
        vls.append(VlDecl(
            vl_id=vl_id, source=src, destinations=(dst,),
            route_a=(route(src, dst),), bag_ms=params.periodicity_ms,
            min_frame_bytes=params.min_frame_bytes,
            max_frame_bytes=params.min_frame_bytes + params.length_spread_bytes))

    return NetworkConfig(
        protocol=Protocol.ETHERNET, sim_duration_s=params.sim_duration_s,
        ber=0.0, rng_seed=params.seed, redundancy=False,
        nodes=tuple(nodes), links=tuple(links), vls=tuple(vls),
        switches=tuple(SwitchDecl(s) for s in switches))


def random_network(seed: int, max_es: int = 10, max_switches: int = 3,
                   max_vls: int = 6) -> NetworkConfig:
    """Small seeded-random valid topology for property checks.

    Switches form a random tree, End Systems attach to random switches, and
    routes follow the unique tree path, so every generated config passes
    validation by construction. With zero switches the End Systems pair up
    over direct links.
    """
    rng = random.Random(seed)
    n_sw = rng.randint(0, max_switches)
    n_es = rng.randint(2, max_es)
    if n_sw == 0 and n_es % 2:
        n_es += 1

    protocol = rng.choice([Protocol.AFDX, Protocol.ETHERNET])
    ess = [f"ES{i}" for i in range(1, n_es + 1)]
    sws = [f"S{i}" for i in range(1, n_sw + 1)]
    nodes = ([NodeDecl(e, NodeKind.END_SYSTEM) for e in ess]
             + [NodeDecl(s, NodeKind.SWITCH) for s in sws])

    def speed() -> int:
        return rng.choice([10_000_000, 100_000_000, 1_000_000_000])

    links: list[LinkDecl] = []
    pairs: list[tuple[str, str]] = []
    parent: dict[str, str | None] = {}
    attach: dict[str, str] = {}
    if n_sw == 0:
        for i in range(0, n_es, 2):
            pairs.append((ess[i], ess[i + 1]))
            links.append(LinkDecl(ess[i], ess[i + 1], rng.uniform(0, 100), speed()))
    else:
        parent[sws[0]] = None
        for s in sws[1:]:
            p = rng.choice(sws[:sws.index(s)])
            parent[s] = p
            links.append(LinkDecl(s, p, rng.uniform(0, 100), speed()))
        for e in ess:
            a = rng.choice(sws)
            attach[e] = a
            links.append(LinkDecl(e, a, rng.uniform(0, 100), speed()))

    def tree_path(u: str, v: str) -> list[str]:
        anc_u = [u]
        while parent[anc_u[-1]] is not None:
            anc_u.append(parent[anc_u[-1]])
        anc_v = [v]
        while parent[anc_v[-1]] is not None:
            anc_v.append(parent[anc_v[-1]])
        seen = set(anc_u)
        common_i = next(i for i, x in enumerate(anc_v) if x in seen)
        common = anc_v[common_i]
        return anc_u[:anc_u.index(common) + 1] + anc_v[:common_i][::-1]

    vls: list[VlDecl] = []
    for vl_id in range(1, rng.randint(1, max_vls) + 1):
        if n_sw == 0:
            a, b = rng.choice(pairs)
            path = [a, b]
        else:
            a = rng.choice(ess)
            b = rng.choice([e for e in ess if e != a])
            path = [a] + tree_path(attach[a], attach[b]) + [b]
        lo = rng.randint(64, 1000)
        hi = rng.randint(lo, 1518)
        bag = (float(rng.choice([1, 2, 4, 8])) if protocol is Protocol.AFDX
               else round(rng.uniform(0.5, 4.0), 3))
        vls.append(VlDecl(
            vl_id=vl_id, source=a, destinations=(b,), route_a=(tuple(path),),
            bag_ms=bag, min_frame_bytes=lo, max_frame_bytes=hi,
            start_offset_ns=rng.randint(0, 200_000)))

    switches = tuple(
        SwitchDecl(s, latency_ns=rng.choice([0, 8_000, 16_000, 33_000]))
        for s in sws)
    return NetworkConfig(
        protocol=protocol, sim_duration_s=0.02, ber=0.0, rng_seed=seed,
        redundancy=False, nodes=tuple(nodes), links=tuple(links),
        vls=tuple(vls), switches=switches)


def adjacency_to_links(node_ids: list[str], matrix: list[list[int]],
                       cable_length_m: float = 0.0,
                       link_speed_bps: int = DEFAULT_LINK_SPEED_BPS) -> tuple[LinkDecl, ...]:
    """Convert an adjacency-matrix topology to the explicit link list."""
    n = len(node_ids)
    if any(len(row) != n for row in matrix) or len(matrix) != n:
        raise ValueError("adjacency matrix shape does not match node list")
    links = []
    for i in range(n):
        for j in range(i + 1, n):
            if bool(matrix[i][j]) != bool(matrix[j][i]):
                raise ValueError(
                    f"adjacency matrix is not symmetric at ({i}, {j})")
            if matrix[i][j]:
                links.append(LinkDecl(node_ids[i], node_ids[j],
                                      cable_length_m, link_speed_bps))
    return tuple(links)
