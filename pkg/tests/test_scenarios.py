"""Built-in scenario builders and the shipped scenario files."""

from pathlib import Path

import pytest

from avionet import engine
from avionet.configio import parse_config
from avionet.netmodel import NodeKind, Protocol, validate_network
from avionet.scenarios import (
    A350Params,
    UnknownRowError,
    a350_network,
    adjacency_to_links,
    random_network,
    xu2019_network,
    xu2019_worst_case,
)

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


class TestXu2019:
    def test_topology_counts(self):
        cfg = xu2019_network()
        kinds = [n.kind for n in cfg.nodes]
        assert kinds.count(NodeKind.END_SYSTEM) == 7
        assert kinds.count(NodeKind.SWITCH) == 3
        assert len(cfg.vls) == 5

    def test_vl_paths(self):
        cfg = xu2019_network()
        routes = {vl.vl_id: vl.route_a[0] for vl in cfg.vls}
        assert routes[1] == ("ES1", "S1", "S3", "ES6")
        assert routes[5] == ("ES5", "S3", "ES6")

    def test_traffic_parameters(self):
        cfg = xu2019_network()
        assert all(vl.min_frame_bytes == vl.max_frame_bytes == 500
                   for vl in cfg.vls)
        assert all(vl.bag_ms == 4.0 for vl in cfg.vls)
        assert cfg.protocol is Protocol.AFDX
        assert all(s.latency_ns == 16_000 for s in cfg.switches)

    def test_worst_case_row_v1_offsets(self):
        offsets = xu2019_worst_case("V1")
        assert offsets == {"ES1": 2, "ES2": 1, "ES3": 0, "ES4": 0, "ES5": 96_000}

    def test_unknown_row(self):
        with pytest.raises(UnknownRowError):
            xu2019_worst_case("V9")

    def test_row_v1_reproduces_published_delay(self):
        net = validate_network(xu2019_network())
        result = engine.run(net, offsets=xu2019_worst_case("V1"))
        stats = dict(result.report.vls)[1]
        assert stats.delay_us.max == pytest.approx(272.0, abs=0.01)


class TestA350:
    def test_structure(self):
        cfg = a350_network()
        kinds = [n.kind for n in cfg.nodes]
        assert kinds.count(NodeKind.SWITCH) == 7
        assert kinds.count(NodeKind.CONTROL_UNIT) == 6
        assert kinds.count(NodeKind.END_SYSTEM) == 31
        assert len(cfg.vls) == 60

    def test_flow_groups(self):
        cfg = a350_network()
        cu_to_es = [vl for vl in cfg.vls if vl.source.startswith("CU")]
        es_to_cu = [vl for vl in cfg.vls if vl.source.startswith("ES")]
        assert len(cu_to_es) == 6
        assert len(es_to_cu) == 54
        assert all(vl.destinations[0].startswith("ES") for vl in cu_to_es)
        assert all(vl.destinations[0].startswith("CU") for vl in es_to_cu)
        # every CU-to-ES route crosses at least one switch
        assert all(len(vl.route_a[0]) >= 3 for vl in cu_to_es)

    def test_length_spread(self):
        cfg = a350_network()
        assert all(vl.max_frame_bytes - vl.min_frame_bytes == 200
                   for vl in cfg.vls)

    def test_deterministic_per_seed(self):
        assert a350_network(A350Params(seed=5)) == a350_network(A350Params(seed=5))
        assert a350_network(A350Params(seed=5)) != a350_network(A350Params(seed=6))

    def test_valid_and_message_count(self):
        # 0.5 ms periodicity over 20 ms: 40 messages per VL
        params = A350Params(periodicity_ms=0.5, sim_duration_s=0.02)
        net = validate_network(a350_network(params))
        result = engine.run(net)
        assert sum(s.sent for _, s in result.report.vls) == 60 * 40

    def test_throughput_mean_below_route_link_speed(self):
        params = A350Params(periodicity_ms=0.5, sim_duration_s=0.02)
        net = validate_network(a350_network(params))
        result = engine.run(net)
        for vl_id, stats in result.report.vls:
            paths = net.vls[vl_id].routes["A"]
            min_speed = min(net.link_between(u, v).speed_bps
                            for path in paths for u, v in zip(path, path[1:]))
            assert stats.throughput_bps.mean <= min_speed


class TestRandomNetwork:
    def test_seeds_generate_valid_configs(self):
        for seed in range(30):
            net = validate_network(random_network(seed))
            assert net.vls

    def test_deterministic(self):
        assert random_network(3) == random_network(3)


class TestAdjacency:
    def test_matrix_to_links(self):
        links = adjacency_to_links(
            ["A", "B", "C"],
            [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
        assert {(l.a, l.b) for l in links} == {("A", "B"), ("B", "C")}

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            adjacency_to_links(["A", "B"], [[0, 1], [0, 0]])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            adjacency_to_links(["A", "B"], [[0, 1]])


class TestShippedFiles:
    def test_xu2019_file_matches_builder(self):
        text = (SCENARIO_DIR / "xu2019.yaml").read_text()
        assert parse_config(text) == xu2019_network()

    def test_a350_file_matches_builder(self):
        text = (SCENARIO_DIR / "a350.yaml").read_text()
        assert parse_config(text) == a350_network(A350Params())
