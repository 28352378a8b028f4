"""Minimum-delay causal paths in the dynamic secure-connectivity graph.

The search is a slot-by-slot frontier relaxation: each slot draws its ALOHA
roles lazily from the trial stream, fires the secure edges leaving already
reached transmitters, and relaxes earliest arrivals. Hop counts follow the
secondary objective: among all minimum-delay paths, the fewest hops, with
remaining ties broken toward the lowest predecessor id so itineraries are
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scglab.model import SimConfig, validate_config
from scglab.protocol import NetworkRealization, draw_slot_roles
from scglab.point_process import neighbor_ids
from scglab.rng import RandomStream


class UnknownNode(KeyError):
    pass


class EmptyComponent(ValueError):
    pass


@dataclass(frozen=True)
class PathResult:
    """Outcome of one routed packet. ``itinerary`` lists (node, slot) pairs
    starting at (src, 0) with strictly increasing slots; delay is the final
    slot and hops the edge count, so delay >= hops always."""

    delay: int | None
    hops: int | None
    itinerary: tuple[tuple[int, int], ...]
    censored: bool

    @staticmethod
    def censored_at(cap: int) -> "PathResult":
        return PathResult(None, None, (), True)


class CandidateEdges:
    """Static geometry shared by every slot of a search: directed in-range
    pairs, their eavesdropper verdicts, and per-edge interferer lists.

    Interferers for edge (u, v) are the nodes strictly inside the disk of
    radius beta_l*dist(u, v) around v, except u and v themselves. They are
    stored as slices into per-node lists sorted by distance to v, so one
    index query per node covers every edge into it.
    """

    def __init__(self, realization: NetworkRealization):
        self.realization = realization
        p = realization.params
        legit = realization.legit
        n = realization.n_legit

        nbr_sorted_ids: list[np.ndarray] = []
        nbr_sorted_dist: list[np.ndarray] = []
        guard_radius = p.beta_l * p.eta
        for v in range(n):
            ids = neighbor_ids(realization.legit_index, float(legit.xs[v]),
                               float(legit.ys[v]), guard_radius)
            d = np.hypot(legit.xs[ids] - legit.xs[v], legit.ys[ids] - legit.ys[v])
            order = np.argsort(d, kind="stable")
            nbr_sorted_ids.append(ids[order])
            nbr_sorted_dist.append(d[order])

        ed_dist = realization.ed_dist_to_legit
        src_list: list[int] = []
        dst_list: list[int] = []
        dist_list: list[float] = []
        c3_list: list[bool] = []
        inter_slices: list[np.ndarray] = []
        for u in range(n):
            for v in neighbor_ids(realization.legit_index, float(legit.xs[u]),
                                  float(legit.ys[u]), p.eta):
                v = int(v)
                if v == u:
                    continue
                d = float(math.hypot(legit.xs[u] - legit.xs[v],
                                     legit.ys[u] - legit.ys[v]))
                cut = int(np.searchsorted(nbr_sorted_dist[v], p.beta_l * d, side="left"))
                inter = nbr_sorted_ids[v][:cut]
                inter = inter[(inter != u) & (inter != v)]
                src_list.append(u)
                dst_list.append(v)
                dist_list.append(d)
                c3_list.append(bool(ed_dist[u] >= p.beta_e * d))
                inter_slices.append(inter)

        self.edge_src = np.array(src_list, dtype=np.int64)
        self.edge_dst = np.array(dst_list, dtype=np.int64)
        self.edge_dist = np.array(dist_list, dtype=float)
        self.edge_c3_ok = np.array(c3_list, dtype=bool)
        self.interferers = inter_slices

    def n_edges(self) -> int:
        return self.edge_src.size


def earliest_arrival(realization: NetworkRealization, src_id: int, dst_id: int,
                     config: SimConfig, stream: RandomStream,
                     edges: CandidateEdges | None = None,
                     admissible: np.ndarray | None = None,
                     tx_allowed: np.ndarray | None = None) -> PathResult:
    """Minimum-delay causal secure path from src to dst, censored at slot_cap.

    ``admissible`` masks candidate edges (defaults to the fully secure set);
    ``tx_allowed`` masks which nodes may transmit payload hops. Both knobs are
    what the packet-splitting router layers on top of the plain search.
    """
    arrivals, histories = _flood(realization, src_id, [dst_id], config, stream,
                                 edges, admissible, tx_allowed)
    if arrivals[dst_id] is None:
        return PathResult.censored_at(config.slot_cap)
    return _build_result(src_id, dst_id, arrivals[dst_id], histories)


def earliest_arrival_all(realization: NetworkRealization, src_id: int,
                         targets: list[int], config: SimConfig,
                         stream: RandomStream,
                         edges: CandidateEdges | None = None
                         ) -> dict[int, PathResult]:
    """One flood from src returning a PathResult per target (earliest arrivals
    to every target are settled in a single pass)."""
    arrivals, histories = _flood(realization, src_id, targets, config, stream,
                                 edges, None, None)
    out: dict[int, PathResult] = {}
    for t in targets:
        if t == src_id:
            out[t] = PathResult(0, 0, ((src_id, 0),), False)
        elif arrivals[t] is None:
            out[t] = PathResult.censored_at(config.slot_cap)
        else:
            out[t] = _build_result(src_id, t, arrivals[t], histories)
    return out


def _flood(realization: NetworkRealization, src_id: int, targets: list[int],
           config: SimConfig, stream: RandomStream,
           edges: CandidateEdges | None,
           admissible: np.ndarray | None,
           tx_allowed: np.ndarray | None):
    validate_config(config)
    n = realization.n_legit
    for node in [src_id, *targets]:
        if not 0 <= node < n:
            raise UnknownNode(f"node id {node} outside 0..{n - 1}")
    if edges is None:
        edges = CandidateEdges(realization)
    usable = edges.edge_c3_ok if admissible is None else admissible
    if tx_allowed is not None:
        usable = usable & tx_allowed[edges.edge_src]

    INF = config.slot_cap + 1
    arrival = np.full(n, INF, dtype=np.int64)
    hops = np.full(n, INF, dtype=np.int64)
    arrival[src_id] = 0
    hops[src_id] = 0
    # Per-node update log (slot, hops, pred, pred_slot): reconstruction needs
    # each node's state as of the slot before its successor edge fired, not
    # its final state.
    histories: dict[int, list[tuple[int, int, int, int]]] = {
        src_id: [(0, 0, -1, 0)]}
    pending = {t for t in targets if t != src_id}

    e_src, e_dst = edges.edge_src, edges.edge_dst
    interferers = edges.interferers
    candidate_idx = np.flatnonzero(usable)

    for slot in range(1, config.slot_cap + 1):
        roles = draw_slot_roles(realization, slot, stream)
        tx = roles.tx_mask
        sub = candidate_idx
        live = (arrival[e_src[sub]] < slot) & tx[e_src[sub]] & ~tx[e_dst[sub]]
        sub = sub[live]
        if sub.size:
            better = hops[e_src[sub]] + 1 <= hops[e_dst[sub]]
            new = arrival[e_dst[sub]] > slot
            sub = sub[new | better]
        updates: dict[int, tuple[int, int]] = {}
        for idx in sub:
            inter = interferers[idx]
            if inter.size and tx[inter].any():
                continue
            u = int(e_src[idx])
            v = int(e_dst[idx])
            cand = (int(hops[u]) + 1, u)
            if v in updates:
                if cand < updates[v]:
                    updates[v] = cand
            else:
                updates[v] = cand
        reached_target = False
        for v, (h, u) in updates.items():
            if arrival[v] > slot:
                arrival[v] = slot
                hops[v] = h
                histories.setdefault(v, []).append((slot, h, u, slot))
                if v in pending:
                    pending.discard(v)
                    reached_target = True
            elif h < hops[v]:
                hops[v] = h
                histories.setdefault(v, []).append((slot, h, u, slot))
        if reached_target and not pending:
            break

    out = {t: (int(arrival[t]) if arrival[t] <= config.slot_cap else None)
           for t in targets}
    return out, histories


def _state_at(histories, node: int, by_slot: int) -> tuple[int, int, int, int]:
    """Latest logged (slot, hops, pred, pred_slot) of node applied at or
    before by_slot."""
    best = None
    for entry in histories.get(node, ()):
        if entry[0] <= by_slot:
            best = entry
        else:
            break
    if best is None:
        raise AssertionError("path reconstruction fell off the update log")
    return best


def _build_result(src_id: int, dst_id: int, delay: int, histories) -> PathResult:
    seq: list[tuple[int, int]] = []
    node, need = dst_id, delay
    while True:
        slot, h, pred, pred_slot = _state_at(histories, node, need)
        seq.append((node, pred_slot))
        if node == src_id and h == 0:
            break
        node, need = pred, pred_slot - 1
    seq.reverse()
    return PathResult(delay, len(seq) - 1, tuple(seq), False)


def nearest_component_node(realization: NetworkRealization,
                           point: tuple[float, float],
                           component: set[int] | frozenset[int] | np.ndarray) -> int:
    """Component node closest to the anchor point; ties by lowest id."""
    ids = np.asarray(sorted(int(i) for i in component), dtype=np.int64)
    if ids.size == 0:
        raise EmptyComponent("component is empty")
    legit = realization.legit
    d = np.hypot(legit.xs[ids] - point[0], legit.ys[ids] - point[1])
    return int(ids[int(np.argmin(d))])


def zeta_path_check(itinerary: tuple[tuple[int, int], ...],
                    positions: np.ndarray, zeta: float) -> bool:
    """True iff every two-hop stretch advances strictly more than zeta:
    consecutive triple (x, y, z) must have dist(x, z) > zeta."""
    nodes = [node for node, _ in itinerary]
    for a, c in zip(nodes, nodes[2:]):
        if math.hypot(positions[a][0] - positions[c][0],
                      positions[a][1] - positions[c][1]) <= zeta:
            return False
    return True


@dataclass(frozen=True)
class DelayRow:
    distance: float
    trials: int
    mean_delay: float
    stderr: float
    censor_rate: float
    mean_hops: float


def delay_vs_distance_experiment(params, window, config: SimConfig,
                                 distances: list[float], stream: RandomStream,
                                 per_trial_rows: list | None = None
                                 ) -> list[DelayRow]:
    """Fig-style sweep: anchor pairs ((0,0),(d,0)) recentred on the window,
    mapped to their nearest largest-component nodes, routed by one earliest
    arrival flood per realization; non-censored delays are averaged per
    distance and censoring is reported, never imputed.
    """
    from scglab.percolation import components, potential_graph
    from scglab.protocol import sample_realization

    if sorted(distances) != list(distances):
        raise ValueError("distances must be sorted ascending")
    cx = (window.x_min + window.x_max) / 2.0
    cy = (window.y_min + window.y_max) / 2.0
    # Source anchor sits half the largest span left of center, so every
    # (0,0)/(d,0) pair is separated by exactly d and stays inside the window.
    src_anchor = (cx - distances[-1] / 2.0, cy)
    sums = {d: 0.0 for d in distances}
    sqs = {d: 0.0 for d in distances}
    hop_sums = {d: 0.0 for d in distances}
    counts = {d: 0 for d in distances}
    censored = {d: 0 for d in distances}

    for trial in range(config.trials):
        tstream = stream.trial(trial)
        realization = sample_realization(params, window, tstream)
        if realization.n_legit == 0:
            for d in distances:
                censored[d] += 1
            continue
        adjacency = potential_graph(realization)
        report = components(adjacency, realization.legit, window, params.eta)
        largest = np.flatnonzero(report.labels == report.largest_label)
        anchors = {d: (src_anchor[0] + d, cy) for d in distances}
        src = nearest_component_node(realization, src_anchor, largest)
        targets = {d: nearest_component_node(realization, anchors[d], largest)
                   for d in distances}
        results = earliest_arrival_all(realization, src,
                                       sorted(set(targets.values())),
                                       config, tstream)
        for d in distances:
            res = results[targets[d]]
            if res.censored:
                censored[d] += 1
            else:
                sums[d] += res.delay
                sqs[d] += res.delay ** 2
                hop_sums[d] += res.hops
                counts[d] += 1
            if per_trial_rows is not None:
                per_trial_rows.append((d, trial, res))

    rows = []
    for d in distances:
        k = counts[d]
        mean = sums[d] / k if k else math.nan
        var = (sqs[d] / k - mean ** 2) if k > 1 else 0.0
        stderr = math.sqrt(max(var, 0.0) / k) if k > 1 else math.nan
        hops = hop_sums[d] / k if k else math.nan
        rows.append(DelayRow(d, config.trials, mean, stderr,
                             censored[d] / config.trials, hops))
    return rows
