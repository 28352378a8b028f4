"""Packet splitting over two spatially separated paths.

A packet may travel as one unit over a fully secure direct path, or as two
sub-packets over a pair of paths kept far enough apart that no single
eavesdropper can decode hops of both. Security is then enforced only near the
endpoints; in between, hops may be overheard as long as the two exposure sets
stay disjoint. The router is a greedy two-stage heuristic (path A first, then
a separated path B) gated by the exact disjoint-exposure predicate, with the
direct path always kept in the candidate set, so splitting can never lose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scglab.model import SimConfig
from scglab.percolation import GeometryError, _corridor_frame, _rect_has_ed, \
    _tile_occupied
from scglab.protocol import NetworkRealization
from scglab.rng import RandomStream
from scglab.temporal_routing import CandidateEdges, PathResult, earliest_arrival


@dataclass(frozen=True)
class SplitRoute:
    """Routing outcome: a direct fully-secure path, or a split pair whose
    delay is the later of the two sub-packet arrivals."""

    kind: str  # "direct" or "split"
    path_a: PathResult
    path_b: PathResult | None
    delay: int | None
    censored: bool


def eavesdrop_exposure(itinerary, realization: NetworkRealization) -> frozenset[int]:
    """Ids of eavesdroppers able to decode at least one hop: strictly inside
    the disk of radius beta_e*hop_length around that hop's transmitter."""
    p = realization.params
    eds = realization.eds
    if len(eds) == 0:
        return frozenset()
    legit = realization.legit
    exposed: set[int] = set()
    for (u, _), (v, _) in zip(itinerary, itinerary[1:]):
        hop = math.hypot(legit.xs[u] - legit.xs[v], legit.ys[u] - legit.ys[v])
        radius = p.beta_e * hop
        if radius <= 0:
            continue
        d = eds.distances_to(float(legit.xs[u]), float(legit.ys[u]))
        exposed.update(int(i) for i in np.flatnonzero(d < radius))
    return frozenset(exposed)


def is_two_secure(path_a: PathResult, path_b: PathResult,
                  realization: NetworkRealization) -> bool:
    """Assumption behind splitting: the pair is secure iff no eavesdropper
    appears in both paths' exposure sets."""
    ex_a = eavesdrop_exposure(path_a.itinerary, realization)
    ex_b = eavesdrop_exposure(path_b.itinerary, realization)
    return not (ex_a & ex_b)


def default_separation(params) -> float:
    """Twice the largest decoding radius: transmitter sets farther apart than
    this can never share a decoding eavesdropper."""
    return 2.0 * params.beta_e * params.eta


def default_endpoint_guard(params) -> float:
    """Security stays fully enforced within two hop-lengths of each endpoint."""
    return 2.0 * params.eta


def two_secure_route(realization: NetworkRealization, src_id: int, dst_id: int,
                     config: SimConfig, stream: RandomStream,
                     edges: CandidateEdges | None = None,
                     separation: float | None = None,
                     endpoint_guard: float | None = None) -> SplitRoute:
    """Best of the direct path and a greedy split pair.

    Path A relaxes the eavesdropper condition except for hops transmitted
    within endpoint_guard of either endpoint. Path B searches under the same
    relaxation with every transmitter outside the guard disks kept farther
    than `separation` from every path-A transmitter. The pair counts only if
    the exact disjoint-exposure check passes against the realization's actual
    eavesdroppers; the direct path always remains a candidate.
    """
    p = realization.params
    if edges is None:
        edges = CandidateEdges(realization)
    if separation is None:
        separation = default_separation(p)
    if endpoint_guard is None:
        endpoint_guard = default_endpoint_guard(p)

    direct = earliest_arrival(realization, src_id, dst_id, config, stream, edges)

    legit = realization.legit
    d_src = legit.distances_to(float(legit.xs[src_id]), float(legit.ys[src_id]))
    d_dst = legit.distances_to(float(legit.xs[dst_id]), float(legit.ys[dst_id]))
    in_guard = (d_src < endpoint_guard) | (d_dst < endpoint_guard)
    # Relaxed admissibility: (C3) binds only on guarded transmitters.
    relaxed = edges.edge_c3_ok | ~in_guard[edges.edge_src]

    path_a = earliest_arrival(realization, src_id, dst_id, config, stream,
                              edges, admissible=relaxed)
    split_delay: int | None = None
    path_b: PathResult | None = None
    if not path_a.censored:
        a_tx = [u for u, _ in path_a.itinerary[:-1]]
        sep_dist = np.full(realization.n_legit, np.inf)
        for u in a_tx:
            sep_dist = np.minimum(
                sep_dist,
                legit.distances_to(float(legit.xs[u]), float(legit.ys[u])))
        tx_allowed = (sep_dist > separation) | in_guard
        candidate_b = earliest_arrival(realization, src_id, dst_id, config,
                                       stream, edges, admissible=relaxed,
                                       tx_allowed=tx_allowed)
        if not candidate_b.censored and is_two_secure(path_a, candidate_b,
                                                      realization):
            path_b = candidate_b
            split_delay = max(path_a.delay, path_b.delay)

    if direct.censored and split_delay is None:
        return SplitRoute("direct", direct, None, None, True)
    if split_delay is not None and (direct.censored or split_delay < direct.delay):
        return SplitRoute("split", path_a, path_b, split_delay, False)
    return SplitRoute("direct", direct, None, direct.delay, False)


def split_tile_certificate(realization: NetworkRealization,
                           src: tuple[float, float],
                           dst: tuple[float, float]) -> bool:
    """Sufficient condition for a two-secure s-path (s = eta/sqrt(3)):
    eavesdropper-free regions around both endpoints (an L of two rectangles
    each), one straight corridor of n_s occupied tiles between the endpoints,
    and a detour corridor (riser, top row, riser: n_s + 8 occupied tiles)
    clear of the first, for 2*(n_s + 4) occupied tiles in all."""
    p = realization.params
    s = p.eta / math.sqrt(3.0)
    lx, ly, ex, ey, span = _corridor_frame(realization, src, dst)
    if span < s:
        raise GeometryError("endpoints closer than one tile")
    n_s = max(1, math.ceil(span / s))
    margin = math.sqrt(3.0) * p.beta_e * s
    right = n_s * s

    # Endpoint security regions: horizontal box over the first/last four
    # bottom tiles plus a vertical box over the riser column, both with
    # beta_e margins.
    secure_rects = [
        (-margin, 4.0 * s + margin, -(s / 2.0 + margin), s / 2.0 + margin),
        (-margin, s + margin, -(s / 2.0 + margin), 4.5 * s + margin),
        (right - 4.0 * s - margin, right + margin,
         -(s / 2.0 + margin), s / 2.0 + margin),
        (right - s - margin, right + margin,
         -(s / 2.0 + margin), 4.5 * s + margin),
    ]
    for rect in secure_rects:
        if _rect_has_ed(ex, ey, *rect):
            return False

    # Bottom corridor tiles.
    for i in range(n_s):
        if not _tile_occupied(lx, ly, i * s, (i + 1) * s, -s / 2.0, s / 2.0):
            return False
    # Detour: left riser, top row, right riser.
    for j in range(4):
        y_lo = s / 2.0 + j * s
        if not _tile_occupied(lx, ly, 0.0, s, y_lo, y_lo + s):
            return False
        if not _tile_occupied(lx, ly, right - s, right, y_lo, y_lo + s):
            return False
    for i in range(n_s):
        if not _tile_occupied(lx, ly, i * s, (i + 1) * s, 4.5 * s, 5.5 * s):
            return False
    return True
