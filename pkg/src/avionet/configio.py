"""Configuration file parsing/serialization and report writing.

The config format is a YAML document mirroring the simulator's input
parameter set (see README for the full schema). Reports are deterministic:
identical report documents serialize to byte-identical text, with
microsecond values at 3 decimals and percentages at 4.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .metrics import FomStats, StatSummary
from .netmodel import (
    DEFAULT_DEDICATED_BYTES_PER_PORT,
    DEFAULT_LINK_SPEED_BPS,
    DEFAULT_SHARED_POOL_BYTES,
    DEFAULT_SWITCH_LATENCY_NS,
    LinkDecl,
    NetworkConfig,
    NodeDecl,
    NodeKind,
    Protocol,
    SwitchDecl,
    VlDecl,
)


class ConfigParseError(ValueError):
    """Config text is not well-formed YAML; carries the reported line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"config syntax error{where}: {message}")


@dataclass(frozen=True)
class SchemaProblem:
    kind: str  # missing_field | unknown_field | type_mismatch | bad_value
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.path}: {self.message}"


class ConfigSchemaError(ValueError):
    def __init__(self, problems: list[SchemaProblem]):
        self.problems = list(problems)
        lines = "\n".join(f"  - {p}" for p in self.problems)
        super().__init__(f"invalid config document:\n{lines}")


class _Reader:
    """Strict mapping reader that records schema problems with field paths."""

    def __init__(self):
        self.problems: list[SchemaProblem] = []

    def fail(self, kind: str, path: str, message: str) -> None:
        self.problems.append(SchemaProblem(kind, path, message))

    def mapping(self, value, path: str) -> dict | None:
        if not isinstance(value, dict):
            self.fail("type_mismatch", path, f"expected a mapping, got {type(value).__name__}")
            return None
        return dict(value)

    def take(self, d: dict, key: str, path: str, kind: str, required: bool = True,
             default=None):
        if key not in d:
            if required:
                self.fail("missing_field", f"{path}.{key}", "required field is missing")
            return default
        value = d.pop(key)
        return self.coerce(value, kind, f"{path}.{key}", default)

    def coerce(self, value, kind: str, path: str, default=None):
        ok: bool
        if kind == "int":
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif kind == "float":
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            if ok:
                value = float(value)
        elif kind == "bool":
            ok = isinstance(value, bool)
        elif kind == "str":
            ok = isinstance(value, str)
        elif kind == "list":
            ok = isinstance(value, list)
        else:  # pragma: no cover
            raise AssertionError(kind)
        if not ok:
            self.fail("type_mismatch", path, f"expected {kind}, got {type(value).__name__}")
            return default
        return value

    def leftovers(self, d: dict, path: str) -> None:
        for key in d:
            self.fail("unknown_field", f"{path}.{key}", "field is not part of the schema")


def _us_to_ns(us: float) -> int:
    return round(us * 1000.0)


def _ns_to_us(ns: int) -> float:
    return ns / 1000.0


def parse_config(text: str) -> NetworkConfig:
    """Parse a YAML config document into a NetworkConfig.

    Raises ConfigParseError on malformed YAML and ConfigSchemaError (listing
    every offending field path) on schema violations. Semantic network
    checks are validate_network's job.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        line = None
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            line = mark.line + 1
        raise ConfigParseError(str(exc), line) from exc

    r = _Reader()
    top = r.mapping(doc, "$")
    if top is None:
        raise ConfigSchemaError(r.problems)

    proto_raw = r.take(top, "protocol", "$", "str")
    protocol = None
    if proto_raw is not None:
        try:
            protocol = Protocol(proto_raw)
        except ValueError:
            r.fail("bad_value", "$.protocol",
                   f"must be one of {[p.value for p in Protocol]}, got {proto_raw!r}")

    sim_s = r.take(top, "simulation_time_s", "$", "float")
    ber = r.take(top, "ber", "$", "float", required=False, default=0.0)
    seed = r.take(top, "seed", "$", "int", required=False, default=1)
    redundancy = r.take(top, "redundancy", "$", "bool", required=False, default=False)

    nodes: list[NodeDecl] = []
    for i, item in enumerate(r.take(top, "nodes", "$", "list") or []):
        path = f"$.nodes[{i}]"
        d = r.mapping(item, path)
        if d is None:
            continue
        nid = r.take(d, "id", path, "str")
        kind_raw = r.take(d, "kind", path, "str")
        r.leftovers(d, path)
        kind = None
        if kind_raw is not None:
            try:
                kind = NodeKind(kind_raw)
            except ValueError:
                r.fail("bad_value", f"{path}.kind",
                       f"must be one of {[k.value for k in NodeKind]}, got {kind_raw!r}")
        if nid is not None and kind is not None:
            nodes.append(NodeDecl(id=nid, kind=kind))

    links: list[LinkDecl] = []
    for i, item in enumerate(r.take(top, "links", "$", "list") or []):
        path = f"$.links[{i}]"
        d = r.mapping(item, path)
        if d is None:
            continue
        a = r.take(d, "a", path, "str")
        b = r.take(d, "b", path, "str")
        length = r.take(d, "cable_length_m", path, "float", required=False, default=0.0)
        speed = r.take(d, "link_speed_bps", path, "int", required=False,
                       default=DEFAULT_LINK_SPEED_BPS)
        r.leftovers(d, path)
        if a is not None and b is not None:
            links.append(LinkDecl(a=a, b=b, cable_length_m=length, link_speed_bps=speed))

    vls: list[VlDecl] = []
    for i, item in enumerate(r.take(top, "vls", "$", "list") or []):
        path = f"$.vls[{i}]"
        d = r.mapping(item, path)
        if d is None:
            continue
        vid = r.take(d, "id", path, "int")
        source = r.take(d, "source", path, "str")
        dests = r.take(d, "destinations", path, "list")
        route_a = _parse_route(r, d, "route_a", path, required=True)
        route_b = _parse_route(r, d, "route_b", path, required=False)
        if "bag_ms" in d and "periodicity_ms" in d:
            r.fail("bad_value", f"{path}.bag_ms",
                   "give either bag_ms or periodicity_ms, not both")
            d.pop("periodicity_ms")
        if "bag_ms" in d:
            bag = r.take(d, "bag_ms", path, "float")
        elif "periodicity_ms" in d:
            bag = r.take(d, "periodicity_ms", path, "float")
        else:
            bag = None
            r.fail("missing_field", f"{path}.bag_ms",
                   "VL needs bag_ms (AFDX) or periodicity_ms (Ethernet)")
        min_b = r.take(d, "min_frame_bytes", path, "int")
        max_b = r.take(d, "max_frame_bytes", path, "int")
        offset_us = r.take(d, "start_offset_us", path, "float", required=False, default=0.0)
        jitter_us = r.take(d, "jitter_max_us", path, "float", required=False, default=0.0)
        rate = r.take(d, "token_rate_bytes_per_s", path, "float", required=False)
        depth = r.take(d, "token_depth_bytes", path, "float", required=False)
        r.leftovers(d, path)
        if None in (vid, source, dests, route_a, bag, min_b, max_b):
            continue
        dest_list = [r.coerce(x, "str", f"{path}.destinations[{j}]")
                     for j, x in enumerate(dests)]
        if None in dest_list:
            continue
        vls.append(VlDecl(
            vl_id=vid, source=source, destinations=tuple(dest_list),
            route_a=route_a, route_b=route_b, bag_ms=bag,
            min_frame_bytes=min_b, max_frame_bytes=max_b,
            start_offset_ns=_us_to_ns(offset_us),
            jitter_max_ns=_us_to_ns(jitter_us),
            token_rate_bytes_per_s=rate, token_depth_bytes=depth))

    switches: list[SwitchDecl] = []
    for i, item in enumerate(r.take(top, "switches", "$", "list", required=False) or []):
        path = f"$.switches[{i}]"
        d = r.mapping(item, path)
        if d is None:
            continue
        sid = r.take(d, "id", path, "str")
        latency_us = r.take(d, "latency_us", path, "float", required=False,
                            default=_ns_to_us(DEFAULT_SWITCH_LATENCY_NS))
        dedicated = r.take(d, "dedicated_bytes_per_port", path, "int", required=False,
                           default=DEFAULT_DEDICATED_BYTES_PER_PORT)
        shared = r.take(d, "shared_pool_bytes", path, "int", required=False,
                        default=DEFAULT_SHARED_POOL_BYTES)
        r.leftovers(d, path)
        if sid is not None:
            switches.append(SwitchDecl(id=sid, latency_ns=_us_to_ns(latency_us),
                                       dedicated_bytes_per_port=dedicated,
                                       shared_pool_bytes=shared))

    r.leftovers(top, "$")
    if r.problems:
        raise ConfigSchemaError(r.problems)
    assert protocol is not None and sim_s is not None
    return NetworkConfig(
        protocol=protocol, sim_duration_s=sim_s, ber=ber, rng_seed=seed,
        redundancy=redundancy, nodes=tuple(nodes), links=tuple(links),
        vls=tuple(vls), switches=tuple(switches))


def _parse_route(r: _Reader, d: dict, key: str, path: str,
                 required: bool) -> tuple[tuple[str, ...], ...] | None:
    """A route is a node path or, for multicast, a list of node paths."""
    raw = r.take(d, key, path, "list", required=required)
    if raw is None:
        return None
    if raw and all(isinstance(x, str) for x in raw):
        return (tuple(raw),)
    paths = []
    for j, sub in enumerate(raw):
        sub_list = r.coerce(sub, "list", f"{path}.{key}[{j}]")
        if sub_list is None:
            return None
        hops = [r.coerce(x, "str", f"{path}.{key}[{j}][{k}]")
                for k, x in enumerate(sub_list)]
        if None in hops:
            return None
        paths.append(tuple(hops))
    if not paths:
        r.fail("bad_value", f"{path}.{key}", "route must not be empty")
        return None
    return tuple(paths)


def serialize_config(config: NetworkConfig) -> str:
    """Inverse of parse_config: parse(serialize(c)) == c for valid configs."""
    doc: dict = {
        "protocol": config.protocol.value,
        "simulation_time_s": config.sim_duration_s,
        "ber": config.ber,
        "seed": config.rng_seed,
        "redundancy": config.redundancy,
        "nodes": [{"id": n.id, "kind": n.kind.value} for n in config.nodes],
        "links": [
            {"a": l.a, "b": l.b, "cable_length_m": l.cable_length_m,
             "link_speed_bps": l.link_speed_bps}
            for l in config.links
        ],
        "vls": [_vl_to_doc(vl, config.protocol) for vl in config.vls],
    }
    if config.switches:
        doc["switches"] = [
            {"id": s.id, "latency_us": _ns_to_us(s.latency_ns),
             "dedicated_bytes_per_port": s.dedicated_bytes_per_port,
             "shared_pool_bytes": s.shared_pool_bytes}
            for s in config.switches
        ]
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def _route_to_doc(paths: tuple[tuple[str, ...], ...]) -> list:
    if len(paths) == 1:
        return list(paths[0])
    return [list(p) for p in paths]


def _vl_to_doc(vl: VlDecl, protocol: Protocol) -> dict:
    d: dict = {
        "id": vl.vl_id,
        "source": vl.source,
        "destinations": list(vl.destinations),
        "route_a": _route_to_doc(vl.route_a),
    }
    if vl.route_b is not None:
        d["route_b"] = _route_to_doc(vl.route_b)
    bag_key = "bag_ms" if protocol is Protocol.AFDX else "periodicity_ms"
    d[bag_key] = vl.bag_ms
    d["min_frame_bytes"] = vl.min_frame_bytes
    d["max_frame_bytes"] = vl.max_frame_bytes
    if vl.start_offset_ns:
        d["start_offset_us"] = _ns_to_us(vl.start_offset_ns)
    if vl.jitter_max_ns:
        d["jitter_max_us"] = _ns_to_us(vl.jitter_max_ns)
    if vl.token_rate_bytes_per_s is not None:
        d["token_rate_bytes_per_s"] = vl.token_rate_bytes_per_s
    if vl.token_depth_bytes is not None:
        d["token_depth_bytes"] = vl.token_depth_bytes
    return d


# -- report documents -------------------------------------------------------

@dataclass(frozen=True)
class RunMeta:
    protocol: str
    seed: int
    sim_duration_ns: int
    final_time_ns: int
    event_count: int
    #: excluded from serialized reports so identical runs stay byte-identical
    wall_clock_s: float


@dataclass(frozen=True)
class SwitchReport:
    switch_id: str
    drops: dict[str, int]
    frames_in: int
    frames_out: int
    fanout_created: int
    peak_used_bytes: int
    total_capacity_bytes: int
    #: (time_ns, used_bytes, used_percent, kind) step samples
    capacity: tuple[tuple[int, int, float, str], ...]


@dataclass(frozen=True)
class ReportDocument:
    meta: RunMeta
    vls: tuple[tuple[int, FomStats], ...]
    switches: tuple[SwitchReport, ...]


FOM_CSV_HEADER = (
    "vl,delay_max_us,delay_min_us,delay_mean_us,delay_std_us,"
    "jitter_max_us,jitter_min_us,jitter_mean_us,jitter_std_us,"
    "throughput_max_bps,throughput_min_bps,throughput_mean_bps,throughput_std_bps,"
    "loss_percent"
)


def _f3(v: float | None) -> str:
    return "" if v is None else f"{v:.3f}"


def _stat_cells(s: StatSummary | None) -> list[str]:
    if s is None:
        return ["", "", "", ""]
    return [_f3(s.max), _f3(s.min), _f3(s.mean), _f3(s.std)]


def write_report(report: ReportDocument, format: str) -> str:
    """Render the FOM report; identical reports give byte-identical text."""
    if format == "csv":
        lines = [FOM_CSV_HEADER]
        for vl_id, stats in report.vls:
            cells = [f"V{vl_id}"]
            cells += _stat_cells(stats.delay_us)
            cells += _stat_cells(stats.jitter_us)
            cells += _stat_cells(stats.throughput_bps)
            cells.append(f"{stats.loss_percent:.4f}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    if format == "json":
        return json.dumps(_report_to_obj(report), indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def _stat_obj(s: StatSummary | None, scale: float = 1.0,
              ndigits: int = 3) -> dict | None:
    if s is None:
        return None
    return {k: round(getattr(s, k) * scale, ndigits)
            for k in ("max", "min", "mean", "std")}


def _report_to_obj(report: ReportDocument) -> dict:
    meta = report.meta
    vls = []
    for vl_id, st in report.vls:
        vls.append({
            "vl": vl_id,
            "sent": st.sent,
            "accepted": st.accepted,
            "duplicate_discarded": st.duplicate_discarded,
            "corrupt_discarded": st.corrupt_discarded,
            "loss_percent": round(st.loss_percent, 4),
            "delay_us": _stat_obj(st.delay_us),
            "delay_ms": _stat_obj(st.delay_us, scale=1e-3, ndigits=6),
            "jitter_us": _stat_obj(st.jitter_us),
            "jitter_ms": _stat_obj(st.jitter_us, scale=1e-3, ndigits=6),
            "throughput_bps": _stat_obj(st.throughput_bps),
        })
    switches = []
    for sw in report.switches:
        switches.append({
            "switch": sw.switch_id,
            "drops": dict(sorted(sw.drops.items())),
            "frames_in": sw.frames_in,
            "frames_out": sw.frames_out,
            "fanout_created": sw.fanout_created,
            "peak_used_bytes": sw.peak_used_bytes,
            "total_capacity_bytes": sw.total_capacity_bytes,
            "capacity_samples": len(sw.capacity),
        })
    return {
        "meta": {
            "protocol": meta.protocol,
            "seed": meta.seed,
            "sim_duration_s": meta.sim_duration_ns / 1e9,
            "final_time_us": round(meta.final_time_ns / 1000.0, 3),
            "event_count": meta.event_count,
        },
        "vls": vls,
        "switches": switches,
    }


def capacity_csv_text(sw: SwitchReport) -> str:
    lines = ["time_us,used_bytes,used_percent"]
    for t_ns, used, percent, _kind in sw.capacity:
        lines.append(f"{t_ns / 1000.0:.3f},{used},{percent:.4f}")
    return "\n".join(lines) + "\n"


def trace_csv_text(rows: list[tuple]) -> str:
    lines = ["vl,seq,copy,node,event,time_us"]
    for vl, seq, copy, node, event, t_ns in rows:
        lines.append(f"{vl},{seq},{copy},{node},{event},{t_ns / 1000.0:.3f}")
    return "\n".join(lines) + "\n"


def write_run_files(report: ReportDocument, outdir: Path | str,
                    formats: tuple[str, ...] = ("json", "csv"),
                    trace_rows: list[tuple] | None = None) -> list[Path]:
    """Write the report file set for one run under outdir."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for fmt in formats:
        path = outdir / f"fom.{fmt}"
        path.write_text(write_report(report, fmt))
        written.append(path)
    for sw in report.switches:
        path = outdir / f"switch_capacity_{sw.switch_id}.csv"
        path.write_text(capacity_csv_text(sw))
        written.append(path)
    if trace_rows is not None:
        path = outdir / "trace.csv"
        path.write_text(trace_csv_text(trace_rows))
        written.append(path)
    meta_path = outdir / "meta.json"
    meta_path.write_text(json.dumps(
        {"wall_clock_s": report.meta.wall_clock_s,
         "seed": report.meta.seed,
         "event_count": report.meta.event_count}, indent=2, sort_keys=True) + "\n")
    written.append(meta_path)
    return written
