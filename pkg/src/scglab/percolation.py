"""Component structure of the secure-connectivity graph.

The potential graph keeps an undirected edge wherever the two nodes could
eventually exchange a packet given enough slots: within range and with both
directions' decoding disks clear of eavesdroppers. Interference and ALOHA are
waited out, so they do not appear here. Window-crossing components stand in
for the giant component at finite scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scglab.model import ModelParams, SimConfig, Window, validate
from scglab.point_process import PointSet, neighbor_ids
from scglab.protocol import NetworkRealization, sample_realization
from scglab.rng import RandomStream


class GeometryError(ValueError):
    pass


class UnionFind:
    """Disjoint sets with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def potential_graph(realization: NetworkRealization) -> dict[int, np.ndarray]:
    """Undirected adjacency: edge {x, y} iff dist < eta and neither node's
    decoding disk of radius beta_e*dist contains an eavesdropper.

    Both directions must be clear because a causal route may traverse the
    pair either way over time; this is deliberately stricter than one
    direction alone.
    """
    p = realization.params
    legit = realization.legit
    ed_dist = realization.ed_dist_to_legit
    adjacency: dict[int, list[int]] = {i: [] for i in range(realization.n_legit)}
    for u in range(realization.n_legit):
        ids = neighbor_ids(realization.legit_index, float(legit.xs[u]),
                           float(legit.ys[u]), p.eta)
        ids = ids[ids > u]
        if ids.size == 0:
            continue
        d = np.hypot(legit.xs[ids] - legit.xs[u], legit.ys[ids] - legit.ys[u])
        ok = (p.beta_e * d <= ed_dist[u]) & (p.beta_e * d <= ed_dist[ids])
        for v in ids[ok]:
            adjacency[u].append(int(v))
            adjacency[int(v)].append(u)
    return {u: np.array(sorted(vs), dtype=np.int64) for u, vs in adjacency.items()}


@dataclass(frozen=True)
class ComponentReport:
    component_sizes: tuple[int, ...]
    largest_fraction: float
    crossing_left_right: bool
    crossing_bottom_top: bool
    labels: np.ndarray
    largest_label: int


def components(adjacency: dict[int, np.ndarray], points: PointSet,
               window: Window, eta: float) -> ComponentReport:
    """Connected components via union-find, plus whether one component spans
    the window: crossing holds when a single component has nodes within eta
    of both opposing edges."""
    n = len(adjacency)
    if n == 0:
        return ComponentReport((), 0.0, False, False,
                               np.empty(0, dtype=np.int64), -1)
    uf = UnionFind(n)
    for u, vs in adjacency.items():
        for v in vs:
            uf.union(u, int(v))
    labels = np.array([uf.find(i) for i in range(n)], dtype=np.int64)
    sizes: dict[int, int] = {}
    for root in labels:
        sizes[int(root)] = sizes.get(int(root), 0) + 1
    largest_label = max(sizes, key=lambda r: (sizes[r], -r))
    near_left = points.xs <= window.x_min + eta
    near_right = points.xs >= window.x_max - eta
    near_bottom = points.ys <= window.y_min + eta
    near_top = points.ys >= window.y_max - eta

    def spans(side_a: np.ndarray, side_b: np.ndarray) -> bool:
        roots = set(labels[side_a]) & set(labels[side_b])
        return len(roots) > 0

    return ComponentReport(
        component_sizes=tuple(sorted(sizes.values(), reverse=True)),
        largest_fraction=sizes[largest_label] / n,
        crossing_left_right=spans(near_left, near_right),
        crossing_bottom_top=spans(near_bottom, near_top),
        labels=labels,
        largest_label=int(largest_label),
    )


def _corridor_frame(realization: NetworkRealization,
                    src: tuple[float, float], dst: tuple[float, float]):
    """Rotate/translate all points so src maps to the origin and dst onto the
    positive x axis; returns transformed legit and ED coordinates plus the
    span."""
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    span = math.hypot(dx, dy)
    if span <= 0:
        raise GeometryError("src and dst must be distinct")
    cos, sin = dx / span, dy / span
    legit = realization.legit
    lx = cos * (legit.xs - src[0]) + sin * (legit.ys - src[1])
    ly = -sin * (legit.xs - src[0]) + cos * (legit.ys - src[1])
    eds = realization.eds
    ex = cos * (eds.xs - src[0]) + sin * (eds.ys - src[1])
    ey = -sin * (eds.xs - src[0]) + cos * (eds.ys - src[1])
    return lx, ly, ex, ey, span


def _rect_has_ed(ex: np.ndarray, ey: np.ndarray,
                 x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> bool:
    return bool(((ex >= x_lo) & (ex <= x_hi) & (ey >= y_lo) & (ey <= y_hi)).any())


def _tile_occupied(lx: np.ndarray, ly: np.ndarray,
                   x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> bool:
    return bool(((lx >= x_lo) & (lx <= x_hi) & (ly >= y_lo) & (ly <= y_hi)).any())


def tile_certificate_nsp(realization: NetworkRealization,
                         src: tuple[float, float], dst: tuple[float, float]) -> bool:
    """Sufficient corridor condition for a secure eta/sqrt(3) path between the
    endpoints: an eavesdropper-free rectangle around the src->dst axis, with
    margins sqrt(3)*beta_e*s on each side, whose n_s center tiles of size s
    each contain a legitimate node (s = eta/sqrt(3))."""
    p = realization.params
    s = p.eta / math.sqrt(3.0)
    lx, ly, ex, ey, span = _corridor_frame(realization, src, dst)
    n_s = max(1, math.ceil(span / s))
    margin = math.sqrt(3.0) * p.beta_e * s
    if _rect_has_ed(ex, ey, -margin, n_s * s + margin,
                    -(s / 2.0 + margin), s / 2.0 + margin):
        return False
    for i in range(n_s):
        if not _tile_occupied(lx, ly, i * s, (i + 1) * s, -s / 2.0, s / 2.0):
            return False
    return True


def corridor_node_ids(realization: NetworkRealization,
                      src: tuple[float, float], dst: tuple[float, float]
                      ) -> np.ndarray:
    """Legitimate nodes usable for the corridor path the certificate promises.

    The strip is the tile row plus the part of the eavesdropper-free margin
    where a decoding disk of radius beta_e*(eta/sqrt(3)) still fits inside
    the certified rectangle; within that strip, any sub-zeta shortcut edge is
    provably present, so hop-minimal corridor paths are zeta-paths.
    """
    p = realization.params
    s = p.eta / math.sqrt(3.0)
    lx, ly, _, _, span = _corridor_frame(realization, src, dst)
    n_s = max(1, math.ceil(span / s))
    reach = s / 2.0 + (math.sqrt(3.0) - 1.0) * p.beta_e * s
    mask = (lx >= 0) & (lx <= n_s * s) & (np.abs(ly) <= reach)
    return np.flatnonzero(mask)


def shortest_path_in(adjacency: dict[int, np.ndarray], allowed: np.ndarray,
                     src: int, dst: int) -> list[int] | None:
    """Hop-minimal path from src to dst using only allowed nodes; None when
    disconnected. Deterministic: neighbors expand in ascending id order."""
    allowed_set = set(int(i) for i in allowed)
    if src not in allowed_set or dst not in allowed_set:
        return None
    prev = {src: -1}
    frontier = [src]
    while frontier and dst not in prev:
        nxt: list[int] = []
        for u in frontier:
            for v in adjacency[u]:
                v = int(v)
                if v in allowed_set and v not in prev:
                    prev[v] = u
                    nxt.append(v)
        frontier = sorted(nxt)
    if dst not in prev:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


@dataclass(frozen=True)
class SweepRow:
    ratio: float
    lambda_l: float
    lambda_e: float
    trials: int
    crossing_rate: float
    crossing_stderr: float
    mean_largest_fraction: float
    largest_fraction_stderr: float


def percolation_sweep(base: ModelParams, window: Window, config: SimConfig,
                      ratios: list[float], stream: RandomStream,
                      per_trial_rows: list | None = None) -> list[SweepRow]:
    """Estimate crossing probability and mean largest-component fraction over
    a grid of density ratios lambda_l/lambda_e, holding lambda_l fixed."""
    validate(base)
    rows = []
    core = window.core()
    for ridx, ratio in enumerate(ratios):
        if ratio <= 0:
            raise ValueError("ratios must be positive")
        params = base.with_(lambda_e=base.lambda_l / ratio)
        crossings = 0
        fractions = []
        for trial in range(config.trials):
            tstream = stream.child(ridx).trial(trial)
            realization = sample_realization(params, window, tstream)
            mask = realization.legit.in_rect(core.x_min, core.x_max,
                                             core.y_min, core.y_max)
            adjacency = potential_graph(realization)
            report = components(adjacency, realization.legit, core, params.eta)
            crossed = report.crossing_left_right
            frac = _core_largest_fraction(report, mask)
            crossings += int(crossed)
            fractions.append(frac)
            if per_trial_rows is not None:
                per_trial_rows.append(
                    (ratio, params.lambda_l, params.lambda_e, trial,
                     int(crossed), frac))
        k = config.trials
        rate = crossings / k
        frac_arr = np.array(fractions)
        rows.append(SweepRow(
            ratio, params.lambda_l, params.lambda_e, k,
            rate, math.sqrt(rate * (1 - rate) / k),
            float(frac_arr.mean()),
            float(frac_arr.std(ddof=1) / math.sqrt(k)) if k > 1 else math.nan))
    return rows


def _core_largest_fraction(report: ComponentReport, core_mask: np.ndarray) -> float:
    """Largest component's share of the core nodes (guard band excluded)."""
    total = int(core_mask.sum())
    if total == 0:
        return 0.0
    in_core = report.labels[core_mask]
    best = 0
    for root in set(int(r) for r in in_core):
        best = max(best, int((in_core == root).sum()))
    return best / total
