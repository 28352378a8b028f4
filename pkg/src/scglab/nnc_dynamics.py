"""Single-hop timing in the dynamic secure-connectivity graph: slots until
the origin connects to its nearest neighbor, and until it connects to anyone.

The nearest-neighbor clock treats the origin/neighbor pair as a scheduled
link: the origin attempts the transmission every slot, and the slot succeeds
once no other node inside the interference disk transmits and the decoding
disk is clear of eavesdroppers. Bystander roles are redrawn every slot. The
any-receiver clock additionally requires the origin to win its own ALOHA draw
and the receiver to be listening.

Eavesdroppers are either the realization's fixed set (ed_mode "static") or a
fresh Poisson draw every slot ("per_slot_iid", the law the closed-form mean
is derived under; the realization's static set is not consulted there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scglab.model import SimConfig, validate_config
from scglab.protocol import NetworkRealization
from scglab.rng import TAG_SLOTS, RandomStream

_BLOCK = 128


class NoNeighbor(ValueError):
    pass


@dataclass(frozen=True)
class CensoredSlots:
    """A slot count in 1..slot_cap; censored means the cap was hit first and
    the true value is only known to be larger."""

    value: int
    censored: bool

    @staticmethod
    def observed(value: int) -> "CensoredSlots":
        return CensoredSlots(value, False)

    @staticmethod
    def censored_at(cap: int) -> "CensoredSlots":
        return CensoredSlots(cap, True)


def nearest_neighbor(realization: NetworkRealization) -> int:
    """Id of the legitimate node nearest to the forced origin; equidistant
    ties go to the lowest id so reruns are bit-stable."""
    if realization.n_legit <= 1:
        raise NoNeighbor("realization holds only the origin")
    r = realization.legit.distances_to(0.0, 0.0)
    r[0] = np.inf
    return int(np.argmin(r))  # argmin returns the first (lowest-id) minimum


def _static_ed_clear(realization: NetworkRealization, radius: float) -> bool:
    if len(realization.eds) == 0 or radius <= 0:
        return True
    return float(realization.eds.distances_to(0.0, 0.0).min()) >= radius


def simulate_nnc_time(realization: NetworkRealization, config: SimConfig,
                      stream: RandomStream) -> CensoredSlots:
    """First slot (1-based) in which the origin's link to its nearest
    neighbor is secure; censored at config.slot_cap."""
    validate_config(config)
    p = realization.params
    z = nearest_neighbor(realization)
    legit = realization.legit
    zx, zy = float(legit.xs[z]), float(legit.ys[z])
    dist = math.hypot(zx, zy)
    ed_radius = p.beta_e * dist

    # Bystanders inside the interference disk around z; origin and z exempt.
    guard = p.beta_l * dist
    member_dist = legit.distances_to(zx, zy)
    members = (member_dist < guard)
    members[0] = members[z] = False
    m = int(members.sum())

    per_slot = stream.child(TAG_SLOTS).rng()
    if config.ed_mode == "static":
        if not _static_ed_clear(realization, ed_radius):
            return CensoredSlots.censored_at(config.slot_cap)
        ed_lam = None
    else:
        ed_lam = p.lambda_e * math.pi * ed_radius ** 2

    slot = 0
    while slot < config.slot_cap:
        block = min(_BLOCK, config.slot_cap - slot)
        if m:
            quiet = ~(per_slot.random((block, m)) < p.p).any(axis=1)
        else:
            quiet = np.ones(block, dtype=bool)
        if ed_lam is not None and ed_lam > 0:
            quiet &= per_slot.poisson(ed_lam, block) == 0
        hits = np.flatnonzero(quiet)
        if hits.size:
            return CensoredSlots.observed(slot + int(hits[0]) + 1)
        slot += block
    return CensoredSlots.censored_at(config.slot_cap)


def simulate_one_hop_time(realization: NetworkRealization, config: SimConfig,
                          stream: RandomStream) -> CensoredSlots:
    """First slot in which the origin securely connects to any receiver:
    the origin draws a transmit slot, some in-range node draws a listen slot,
    and that link's interference and eavesdropper disks are clear."""
    validate_config(config)
    p = realization.params
    legit = realization.legit
    r = legit.distances_to(0.0, 0.0)
    cand = (r < p.eta)
    cand[0] = False
    ci = np.flatnonzero(cand)
    if ci.size == 0:
        return CensoredSlots.censored_at(config.slot_cap)

    # Nodes whose transmissions can interfere with some candidate.
    rel = np.flatnonzero(r < (1.0 + p.beta_l) * p.eta)
    rel = rel[rel != 0]
    col = {int(j): k for k, j in enumerate(rel)}
    cand_cols = np.array([col[int(j)] for j in ci])
    incidence = np.zeros((ci.size, rel.size), dtype=bool)
    for row, j in enumerate(ci):
        guard = p.beta_l * r[j]
        if guard <= 0:
            continue
        d = np.hypot(legit.xs[rel] - legit.xs[j], legit.ys[rel] - legit.ys[j])
        inside = d < guard
        inside[cand_cols[row]] = False
        incidence[row] = inside

    ed_need = p.beta_e * r[ci]
    if config.ed_mode == "static":
        if len(realization.eds) and p.beta_e > 0:
            nearest = float(realization.eds.distances_to(0.0, 0.0).min())
        else:
            nearest = math.inf
        static_ok = ed_need <= nearest
        if not static_ok.any():
            return CensoredSlots.censored_at(config.slot_cap)
    else:
        static_ok = None

    per_slot = stream.child(TAG_SLOTS).rng()
    inc_f = incidence.astype(np.float64)
    slot = 0
    while slot < config.slot_cap:
        block = min(_BLOCK, config.slot_cap - slot)
        origin_tx = per_slot.random(block) < p.p
        tx = per_slot.random((block, rel.size)) < p.p
        clear = (tx.astype(np.float64) @ inc_f.T) == 0.0
        usable = clear & ~tx[:, cand_cols]
        if static_ok is not None:
            usable &= static_ok[None, :]
        else:
            # Fresh eavesdropper field each slot: the distance from the origin
            # to the nearest point of a new Poisson draw.
            if p.lambda_e > 0:
                u = per_slot.random(block)
                nearest = np.sqrt(-np.log(u) / (p.lambda_e * math.pi))
            else:
                nearest = np.full(block, np.inf)
            usable &= ed_need[None, :] <= nearest[:, None]
        success = origin_tx & usable.any(axis=1)
        hits = np.flatnonzero(success)
        if hits.size:
            return CensoredSlots.observed(slot + int(hits[0]) + 1)
        slot += block
    return CensoredSlots.censored_at(config.slot_cap)
