import math

import numpy as np
import pytest

from scglab.model import ModelParams, SimConfig, Window
from scglab.percolation import (components, corridor_node_ids,
                                percolation_sweep, potential_graph,
                                shortest_path_in, tile_certificate_nsp)
from scglab.point_process import PointSet
from scglab.protocol import (NetworkRealization, draw_slot_roles,
                             sample_realization, slot_edge_set)
from scglab.rng import RandomStream
from scglab.temporal_routing import zeta_path_check

from test_protocol import make_realization


def brute_force_potential(realization):
    p = realization.params
    legit = realization.legit
    n = realization.n_legit
    adj = {i: set() for i in range(n)}
    for u in range(n):
        for v in range(u + 1, n):
            d = math.hypot(legit.xs[u] - legit.xs[v], legit.ys[u] - legit.ys[v])
            if d >= p.eta:
                continue
            ok = True
            for side in (u, v):
                if len(realization.eds) and p.beta_e > 0:
                    ed = np.hypot(realization.eds.xs - legit.xs[side],
                                  realization.eds.ys - legit.ys[side]).min()
                    if ed < p.beta_e * d:
                        ok = False
            if ok:
                adj[u].add(v)
                adj[v].add(u)
    return adj


def bfs_components(adj):
    seen = {}
    label = 0
    for start in adj:
        if start in seen:
            continue
        stack = [start]
        seen[start] = label
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen[v] = label
                    stack.append(v)
        label += 1
    groups = {}
    for node, lab in seen.items():
        groups.setdefault(lab, set()).add(node)
    return sorted((sorted(g) for g in groups.values()), key=len, reverse=True)


class TestPotentialGraph:
    def test_no_eds_gives_disk_graph(self):
        params = ModelParams(2.0, 0.0, 0.5, 1.0, 0.2, 0.6)
        r = sample_realization(params, Window.centered(3.0), RandomStream(1).trial(0))
        adj = potential_graph(r)
        legit = r.legit
        for u in range(r.n_legit):
            want = sorted(int(v) for v in range(r.n_legit) if v != u
                          and math.hypot(legit.xs[u] - legit.xs[v],
                                         legit.ys[u] - legit.ys[v]) < params.eta)
            assert list(adj[u]) == want

    def test_midpoint_ed_removes_edge_both_ways(self):
        params = ModelParams(1.0, 0.1, 0.5, 1.0, 0.2, 2.0)
        r = make_realization(params, [(0.0, 0.0), (0.5, 0.0)], [(0.25, 0.0)])
        adj = potential_graph(r)
        assert len(adj[0]) == 0 and len(adj[1]) == 0

    def test_matches_all_pairs_oracle(self):
        rng = np.random.default_rng(2)
        for case in range(60):
            params = ModelParams(
                lambda_l=1.0, lambda_e=1.0, p=0.5,
                eta=float(rng.uniform(0.5, 1.8)),
                beta_l=0.2, beta_e=float(rng.uniform(0.0, 1.8)))
            window = Window.centered(2.5)
            n = int(rng.integers(2, 31))
            legit = PointSet(rng.uniform(-2.5, 2.5, n), rng.uniform(-2.5, 2.5, n),
                             window)
            m = int(rng.integers(0, 8))
            eds = PointSet(rng.uniform(-2.5, 2.5, m), rng.uniform(-2.5, 2.5, m),
                           window)
            r = NetworkRealization(params, window, legit, eds)
            got = {u: set(int(v) for v in vs)
                   for u, vs in potential_graph(r).items()}
            assert got == brute_force_potential(r), f"case {case}"

    def test_slot_edges_satisfy_potential_conditions(self):
        # Every slot edge is in range with the transmitter-side disk clear;
        # whenever the receiver-side disk is also clear, the undirected
        # potential graph carries the pair. (The potential graph is stricter
        # than one slot direction by design: it needs both sides clear.)
        rng = np.random.default_rng(3)
        for case in range(100):
            params = ModelParams(1.5, 0.2, 0.5, 1.0, 0.4,
                                 float(rng.uniform(0.2, 1.2)))
            stream = RandomStream(100 + case).trial(0)
            r = sample_realization(params, Window.centered(2.5), stream)
            if r.n_legit < 2:
                continue
            adj = potential_graph(r)
            legit = r.legit
            roles = draw_slot_roles(r, int(rng.integers(1, 50)), stream)
            for u, v in slot_edge_set(r, roles).edges:
                d = math.hypot(legit.xs[u] - legit.xs[v],
                               legit.ys[u] - legit.ys[v])
                assert d < params.eta
                assert r.ed_dist_to_legit[u] >= params.beta_e * d
                if r.ed_dist_to_legit[v] >= params.beta_e * d:
                    assert v in set(int(x) for x in adj[u])

    def test_ed_addition_shrinks_graph(self):
        rng = np.random.default_rng(4)
        params = ModelParams(1.5, 0.0, 0.5, 1.0, 0.2, 1.0)
        window = Window.centered(2.5)
        for _ in range(40):
            stream = RandomStream(int(rng.integers(1 << 30))).trial(0)
            base = sample_realization(params, window, stream)
            extra = NetworkRealization(
                params, window, base.legit,
                PointSet(rng.uniform(-2.5, 2.5, 1), rng.uniform(-2.5, 2.5, 1),
                         window))
            before = potential_graph(base)
            after = potential_graph(extra)
            for u in before:
                assert set(int(v) for v in after[u]) <= \
                    set(int(v) for v in before[u])


class TestComponents:
    params = ModelParams(1.0, 0.0, 0.5, 1.0, 0.2, 0.6)

    def test_empty_graph_all_singletons(self):
        r = make_realization(self.params, [(0, 0), (3, 3), (-3, 3)], [])
        report = components({0: np.empty(0, int), 1: np.empty(0, int),
                             2: np.empty(0, int)}, r.legit, r.window, 1.0)
        assert report.component_sizes == (1, 1, 1)
        assert not report.crossing_left_right
        assert not report.crossing_bottom_top

    def test_hand_built_chain_crosses(self):
        window = Window(0.0, 0.0, 6.0, 6.0)
        xs = np.arange(0.5, 6.0, 0.9)
        ys = np.full(xs.size, 3.0)
        ps = PointSet(xs, ys, window)
        adj = {i: np.array([j for j in (i - 1, i + 1) if 0 <= j < xs.size])
               for i in range(xs.size)}
        report = components(adj, ps, window, eta=1.0)
        assert report.crossing_left_right
        assert not report.crossing_bottom_top
        assert report.largest_fraction == 1.0

    def test_matches_bfs_oracle(self):
        rng = np.random.default_rng(6)
        for case in range(40):
            params = ModelParams(1.5, 0.3, 0.5, 1.0, 0.2, 0.8)
            stream = RandomStream(200 + case).trial(0)
            r = sample_realization(params, Window.centered(2.5), stream)
            if r.n_legit == 0:
                continue
            adj = potential_graph(r)
            report = components(adj, r.legit, r.window, params.eta)
            want = bfs_components({u: set(int(v) for v in vs)
                                   for u, vs in adj.items()})
            assert report.component_sizes == tuple(
                sorted((len(g) for g in want), reverse=True))
            largest = np.flatnonzero(report.labels == report.largest_label)
            assert sorted(int(i) for i in largest) in [sorted(g) for g in want]

    def test_largest_fraction_shrinks_with_added_eds(self):
        rng = np.random.default_rng(7)
        params = ModelParams(2.0, 0.0, 0.5, 1.0, 0.2, 1.0)
        window = Window.centered(3.0)
        for _ in range(25):
            stream = RandomStream(int(rng.integers(1 << 30))).trial(0)
            base = sample_realization(params, window, stream)
            if base.n_legit == 0:
                continue
            eds = PointSet(rng.uniform(-3, 3, 4), rng.uniform(-3, 3, 4), window)
            more = NetworkRealization(params, window, base.legit, eds)
            rep_before = components(potential_graph(base), base.legit, window,
                                    params.eta)
            rep_after = components(potential_graph(more), base.legit, window,
                                   params.eta)
            assert rep_after.largest_fraction <= rep_before.largest_fraction + 1e-12


class TestTileCertificate:
    def certified_instance(self, seed, lambda_l=9.0, lambda_e=0.08,
                           beta_e=0.4, span=2.5):
        params = ModelParams(lambda_l, lambda_e, 0.5, 1.0, 0.2, beta_e)
        window = Window(-2.0, -3.0, span + 2.0, 3.0)
        r = sample_realization(params, window, RandomStream(seed).trial(0))
        return r, (0.0, 0.0), (span, 0.0)

    def test_no_eds_dense_tiles_certifies(self):
        params = ModelParams(1.0, 0.0, 0.5, 1.0, 0.2, 0.5)
        window = Window(-2.0, -2.0, 5.0, 2.0)
        s = params.eta / math.sqrt(3.0)
        xs = np.arange(0.5 * s, 5 * s, 0.9 * s)
        legit = PointSet(xs, np.zeros(xs.size), window)
        r = NetworkRealization(params, window, legit,
                               PointSet(np.empty(0), np.empty(0), window))
        assert tile_certificate_nsp(r, (0.0, 0.0), (4 * s, 0.0))

    def test_single_ed_in_rectangle_fails(self):
        params = ModelParams(1.0, 0.1, 0.5, 1.0, 0.2, 0.5)
        window = Window(-2.0, -2.0, 5.0, 2.0)
        s = params.eta / math.sqrt(3.0)
        xs = np.arange(0.5 * s, 5 * s, 0.9 * s)
        legit = PointSet(xs, np.zeros(xs.size), window)
        eds = PointSet(np.array([2 * s]), np.array([0.1]), window)
        r = NetworkRealization(params, window, legit, eds)
        assert not tile_certificate_nsp(r, (0.0, 0.0), (4 * s, 0.0))

    def test_empty_tile_fails(self):
        params = ModelParams(1.0, 0.0, 0.5, 1.0, 0.2, 0.5)
        window = Window(-2.0, -2.0, 5.0, 2.0)
        s = params.eta / math.sqrt(3.0)
        legit = PointSet(np.array([0.2 * s]), np.array([0.0]), window)
        r = NetworkRealization(params, window, legit,
                               PointSet(np.empty(0), np.empty(0), window))
        assert not tile_certificate_nsp(r, (0.0, 0.0), (4 * s, 0.0))

    def test_rotation_invariance(self):
        # The corridor frame rotates arbitrary endpoint axes onto x.
        r, src, dst = self.certified_instance(12345)
        verdict = tile_certificate_nsp(r, src, dst)
        theta = 0.7
        cos, sin = math.cos(theta), math.sin(theta)
        legit = r.legit
        rot_legit = PointSet(cos * legit.xs - sin * legit.ys,
                             sin * legit.xs + cos * legit.ys, r.window)
        eds = r.eds
        rot_eds = PointSet(cos * eds.xs - sin * eds.ys,
                           sin * eds.xs + cos * eds.ys, r.window)
        rotated = NetworkRealization(r.params, r.window, rot_legit, rot_eds)
        rot_dst = (cos * dst[0], sin * dst[0])
        assert tile_certificate_nsp(rotated, (0.0, 0.0), rot_dst) == verdict

    def test_certificate_implies_connected_zeta_path(self):
        # Over random certified instances, the endpoint-nearest nodes connect
        # inside the corridor and the hop-minimal corridor path is a
        # zeta-path with zeta = eta/sqrt(3).
        found = 0
        for seed in range(400):
            r, src, dst = self.certified_instance(seed)
            if not tile_certificate_nsp(r, src, dst):
                continue
            found += 1
            adj = potential_graph(r)
            corridor = corridor_node_ids(r, src, dst)
            src_node = int(min(corridor, key=lambda i: math.hypot(
                r.legit.xs[i] - src[0], r.legit.ys[i] - src[1])))
            dst_node = int(min(corridor, key=lambda i: math.hypot(
                r.legit.xs[i] - dst[0], r.legit.ys[i] - dst[1])))
            path = shortest_path_in(adj, corridor, src_node, dst_node)
            assert path is not None, f"seed {seed}: corridor disconnected"
            positions = np.stack([r.legit.xs, r.legit.ys], axis=1)
            itinerary = tuple((v, k) for k, v in enumerate(path))
            assert zeta_path_check(itinerary, positions,
                                   r.params.eta / math.sqrt(3.0)), f"seed {seed}"
            if found >= 40:
                break
        assert found >= 40


class TestSweep:
    def test_supercritical_no_eds_crosses(self):
        # Densities comfortably above the continuum percolation threshold
        # cross a 20-eta window nearly always.
        params = ModelParams(3.0, 1e-9, 0.5, 1.0, 0.2, 0.0)
        window = Window(0.0, 0.0, 20.0, 20.0)
        cfg = SimConfig(seed=5, trials=30, slot_cap=10)
        rows = percolation_sweep(params, window, cfg, [1e9], RandomStream(5))
        assert rows[0].crossing_rate >= 0.9

    def test_subcritical_rarely_crosses(self):
        params = ModelParams(0.25, 1e-9, 0.5, 1.0, 0.2, 0.0)
        window = Window(0.0, 0.0, 20.0, 20.0)
        cfg = SimConfig(seed=6, trials=30, slot_cap=10)
        rows = percolation_sweep(params, window, cfg, [1e9], RandomStream(6))
        assert rows[0].crossing_rate <= 0.1

    def test_crossing_rate_monotone_in_lambda_l(self):
        window = Window(0.0, 0.0, 12.0, 12.0)
        cfg = SimConfig(seed=7, trials=40, slot_cap=10)
        rates = []
        for lam in (0.6, 1.2, 2.4):
            params = ModelParams(lam, 0.05, 0.5, 1.0, 0.2, 0.6)
            rows = percolation_sweep(params, window, cfg, [lam / 0.05],
                                     RandomStream(7))
            rates.append(rows[0].crossing_rate)
        slack = 2 * math.sqrt(0.25 / cfg.trials)
        assert rates[0] <= rates[1] + slack
        assert rates[1] <= rates[2] + slack

    def test_rows_carry_densities(self):
        params = ModelParams(1.0, 1.0, 0.5, 1.0, 0.2, 0.6)
        window = Window(0.0, 0.0, 8.0, 8.0)
        cfg = SimConfig(seed=8, trials=5, slot_cap=10)
        sink = []
        rows = percolation_sweep(params, window, cfg, [2.0, 4.0],
                                 RandomStream(8), per_trial_rows=sink)
        assert rows[0].lambda_e == pytest.approx(0.5)
        assert rows[1].lambda_e == pytest.approx(0.25)
        assert len(sink) == 10
