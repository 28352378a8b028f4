"""Per-slot secure links: ALOHA roles, the three link conditions, edge sets,
and Palm degree counts at a node conditioned to sit at the origin.

A transmitter x reaches a receiver y in a slot iff (1) they are strictly
within range eta, (2) no other transmitter sits strictly inside the disk of
radius beta_l*dist around y, and (3) no eavesdropper sits strictly inside the
disk of radius beta_e*dist around x. The transmitter itself never counts as
its own interferer, which keeps the predicate well-defined for beta_l >= 1.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from scglab.model import ModelParams, Window, validate
from scglab.point_process import (PointSet, SpatialIndex, neighbor_ids,
                                  sample_ppp, with_forced_point)
from scglab.rng import TAG_EDS, TAG_LEGIT, TAG_ROLES, RandomStream


class RoleViolation(ValueError):
    pass


class NetworkRealization:
    """One sampled placement of legitimate nodes and eavesdroppers.

    Immutable after construction; spatial indexes are built lazily so cheap
    Monte Carlo trials that never query them pay nothing.
    """

    def __init__(self, params: ModelParams, window: Window,
                 legit: PointSet, eds: PointSet,
                 forced_origin: str | None = None):
        validate(params)
        self.params = params
        self.window = window
        self.legit = legit
        self.eds = eds
        self.forced_origin = forced_origin

    @property
    def n_legit(self) -> int:
        return len(self.legit)

    @cached_property
    def cell_size(self) -> float:
        p = self.params
        return p.eta * max(1.0, p.beta_l, p.beta_e)

    @cached_property
    def legit_index(self) -> SpatialIndex:
        return SpatialIndex(self.legit, self.cell_size)

    @cached_property
    def ed_index(self) -> SpatialIndex:
        return SpatialIndex(self.eds, self.cell_size)

    @cached_property
    def ed_dist_to_legit(self) -> np.ndarray:
        """Distance from each legitimate node to its nearest eavesdropper,
        capped at beta_e*eta (larger distances can never block a link)."""
        cap = self.params.beta_e * self.params.eta
        out = np.full(self.n_legit, np.inf)
        if len(self.eds) == 0 or cap <= 0:
            return out
        for i in range(self.n_legit):
            ids = neighbor_ids(self.ed_index, float(self.legit.xs[i]),
                               float(self.legit.ys[i]), cap)
            if ids.size:
                out[i] = np.hypot(self.eds.xs[ids] - self.legit.xs[i],
                                  self.eds.ys[ids] - self.legit.ys[i]).min()
        return out


def sample_realization(params: ModelParams, window: Window, stream: RandomStream,
                       forced_origin: str | None = None) -> NetworkRealization:
    """Draw both point processes. With forced_origin "tx" or "rx", a
    deterministic legitimate node is prepended at (0,0) as id 0 and its role
    is pinned in every slot (Palm conditioning)."""
    validate(params)
    if forced_origin not in (None, "tx", "rx"):
        raise ValueError(f"forced_origin must be None, 'tx' or 'rx', got {forced_origin!r}")
    legit = sample_ppp(params.lambda_l, window, stream.child(TAG_LEGIT).rng())
    if forced_origin is not None:
        legit = with_forced_point(legit, 0.0, 0.0)
    eds = sample_ppp(params.lambda_e, window, stream.child(TAG_EDS).rng())
    return NetworkRealization(params, window, legit, eds, forced_origin)


@dataclass(frozen=True)
class SlotRoles:
    """Half-duplex role split for one slot: tx_mask[i] is True when node i
    transmits; everyone else listens."""

    slot: int
    tx_mask: np.ndarray

    @property
    def tx_ids(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.tx_mask))

    @property
    def rx_ids(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(~self.tx_mask))


@dataclass(frozen=True)
class EdgeList:
    slot: int
    edges: tuple[tuple[int, int], ...]


def dump_edges_csv(edge_lists: list[EdgeList], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "tx_id", "rx_id"])
        for el in edge_lists:
            for tx, rx in el.edges:
                writer.writerow([el.slot, tx, rx])


def load_edges_csv(path: str) -> list[EdgeList]:
    by_slot: dict[int, list[tuple[int, int]]] = defaultdict(list)
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            by_slot[int(row["slot"])].append((int(row["tx_id"]),
                                              int(row["rx_id"])))
    return [EdgeList(slot, tuple(sorted(pairs)))
            for slot, pairs in sorted(by_slot.items())]


def draw_slot_roles(realization: NetworkRealization, slot: int,
                    stream: RandomStream) -> SlotRoles:
    """Sample the slot's ALOHA split: each node transmits with probability p,
    independently across nodes and slots, deterministically given (stream, slot).
    A forced origin keeps its pinned role."""
    rng = stream.child(TAG_ROLES, slot).rng()
    mask = rng.random(realization.n_legit) < realization.params.p
    if realization.forced_origin == "tx":
        mask[0] = True
    elif realization.forced_origin == "rx":
        mask[0] = False
    mask.flags.writeable = False
    return SlotRoles(slot, mask)


def secure_link(realization: NetworkRealization, roles: SlotRoles,
                x_id: int, y_id: int) -> bool:
    """Evaluate the three link conditions for transmitter x_id -> receiver y_id."""
    if not roles.tx_mask[x_id]:
        raise RoleViolation(f"node {x_id} is not transmitting in slot {roles.slot}")
    if roles.tx_mask[y_id]:
        raise RoleViolation(f"node {y_id} is not receiving in slot {roles.slot}")
    p = realization.params
    legit = realization.legit
    dist = float(np.hypot(legit.xs[x_id] - legit.xs[y_id],
                          legit.ys[x_id] - legit.ys[y_id]))
    if dist >= p.eta:
        return False
    # (C2): no transmitter other than x strictly inside B(y, beta_l*dist).
    guard = p.beta_l * dist
    if guard > 0:
        ids = neighbor_ids(realization.legit_index, float(legit.xs[y_id]),
                           float(legit.ys[y_id]), guard)
        for i in ids:
            if i != x_id and roles.tx_mask[i]:
                return False
    # (C3): no eavesdropper strictly inside B(x, beta_e*dist).
    return realization.ed_dist_to_legit[x_id] >= p.beta_e * dist


def slot_edge_set(realization: NetworkRealization, roles: SlotRoles) -> EdgeList:
    """All secure (tx, rx) pairs for the slot, enumerated through the
    eta-radius spatial query rather than all pairs."""
    p = realization.params
    legit = realization.legit
    edges: list[tuple[int, int]] = []
    for x_id in np.flatnonzero(roles.tx_mask):
        x_id = int(x_id)
        for y_id in neighbor_ids(realization.legit_index,
                                 float(legit.xs[x_id]), float(legit.ys[x_id]),
                                 p.eta):
            y_id = int(y_id)
            if roles.tx_mask[y_id]:
                continue
            if secure_link(realization, roles, x_id, y_id):
                edges.append((x_id, y_id))
    edges.sort()
    return EdgeList(roles.slot, tuple(edges))


def out_degree_at_origin(realization: NetworkRealization, roles: SlotRoles) -> int:
    """Number of receivers the forced origin transmitter securely reaches
    this slot."""
    if realization.forced_origin != "tx":
        raise RoleViolation("realization must carry a forced transmitter at the origin")
    p = realization.params
    xs, ys = realization.legit.xs, realization.legit.ys
    r = np.hypot(xs, ys)
    cand = (~roles.tx_mask) & (r < p.eta) & (np.arange(r.size) != 0)
    if not cand.any():
        return 0
    rc = r[cand]
    # (C3): the decoding disk is centered at the origin, so one min suffices.
    nearest_ed = realization.eds.distances_to(0.0, 0.0).min() \
        if len(realization.eds) else np.inf
    ok = p.beta_e * rc <= nearest_ed
    tx_others = roles.tx_mask.copy()
    tx_others[0] = False
    ti = np.flatnonzero(tx_others)
    if ti.size and p.beta_l > 0:
        d = np.hypot(xs[cand][:, None] - xs[ti][None, :],
                     ys[cand][:, None] - ys[ti][None, :])
        ok &= ~(d < p.beta_l * rc[:, None]).any(axis=1)
    return int(ok.sum())


def in_degree_at_origin(realization: NetworkRealization, roles: SlotRoles) -> int:
    """Number of transmitters the forced origin receiver securely hears
    this slot."""
    if realization.forced_origin != "rx":
        raise RoleViolation("realization must carry a forced receiver at the origin")
    p = realization.params
    xs, ys = realization.legit.xs, realization.legit.ys
    r = np.hypot(xs, ys)
    tx = roles.tx_mask.copy()
    tx[0] = False
    cand = tx & (r < p.eta)
    if not cand.any():
        return 0
    ci = np.flatnonzero(cand)
    rc = r[ci]
    ok = np.ones(ci.size, dtype=bool)
    # (C3): decoding disk around each candidate transmitter y.
    if len(realization.eds) and p.beta_e > 0:
        d = np.hypot(realization.eds.xs[None, :] - xs[ci][:, None],
                     realization.eds.ys[None, :] - ys[ci][:, None])
        ok &= ~(d < p.beta_e * rc[:, None]).any(axis=1)
    # (C2): interference disk around the origin receiver; the candidate itself
    # is exempt, every other transmitter counts.
    if p.beta_l > 0:
        tr = np.sort(r[tx])
        inside = np.searchsorted(tr, p.beta_l * rc, side="left")
        self_inside = rc < p.beta_l * rc
        ok &= (inside - self_inside.astype(int)) == 0
    return int(ok.sum())


def degree_window(params: ModelParams) -> Window:
    """Smallest window that makes the Palm degree trial exact: every disk any
    condition can query stays inside it."""
    half = params.eta * (1.0 + max(params.beta_l, params.beta_e))
    return Window.centered(half)


def degree_trial(params: ModelParams, direction: str, trial_stream: RandomStream) -> int:
    """One Palm Monte Carlo draw of the out- or in-degree at the origin."""
    forced = "tx" if direction == "out" else "rx"
    realization = sample_realization(params, degree_window(params), trial_stream,
                                     forced_origin=forced)
    roles = draw_slot_roles(realization, 0, trial_stream)
    if direction == "out":
        return out_degree_at_origin(realization, roles)
    return in_degree_at_origin(realization, roles)
