"""Energy-aware cluster-head election and cluster membership.

The election follows the DEEC recipe: every round the network-wide average
energy is estimated from the ideal linear drain (``average_energy``), each
candidate turns its residual energy into a CH probability
(``ch_probability``), and the rotating-epoch threshold decides who serves.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from model import Network, Node, total_initial_energy
from radio import RadioParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyEstimate:
    avg_energy: float  # E(0) = E_total / N
    lifetime_estimate: float  # R, rounds
    e_round: float  # J/round


@dataclass
class ClusterAssignment:
    ch_ids: list[int] = field(default_factory=list)
    membership: dict[int, int] = field(default_factory=dict)  # member id -> CH id

    @property
    def member_counts(self) -> dict[int, int]:
        counts = Counter(self.membership.values())
        return {ch: counts.get(ch, 0) for ch in self.ch_ids}

    def members_of(self, ch_id: int) -> list[int]:
        return [m for m, ch in self.membership.items() if ch == ch_id]


# -----------------------------
# Energy estimate
# -----------------------------
def estimate_round_budget(network: Network, radio: RadioParams) -> float:
    """Energy the whole network dissipates in one ideal round."""
    cfg = network.config
    n = cfg.node_count
    k = cfg.p_opt * n
    d_to_ch = cfg.field_side / math.sqrt(2 * math.pi * k)
    d_to_bs = math.fsum(node.bs_distance for node in network.nodes) / len(network.nodes)
    return cfg.packet_bits * (
        2 * n * radio.e_elec + n * radio.e_da + k * radio.eps_mp * d_to_bs**4 + n * radio.eps_fs * d_to_ch**2
    )


def energy_estimate(network: Network) -> EnergyEstimate:
    """E_round, R and E(0) for the network; computed once and cached on it."""
    if network.estimate is None:
        e_total = total_initial_energy(network)
        e_round = estimate_round_budget(network, network.radio)
        network.estimate = EnergyEstimate(
            avg_energy=e_total / network.config.node_count,
            lifetime_estimate=e_total / e_round,
            e_round=e_round,
        )
        logger.debug("E_round=%.6g J, R=%.1f rounds", e_round, network.estimate.lifetime_estimate)
    return network.estimate


def average_energy(r: int, e_total: float, n: int, lifetime: float) -> float:
    if lifetime <= 0:
        raise ValueError(f"lifetime estimate R must be > 0, got {lifetime}")
    if r < 0:
        raise ValueError(f"round index must be >= 0, got {r}")
    return max(0.0, (e_total / n) * (1.0 - r / lifetime))


def election_average(network: Network, r: int) -> float:
    """Ē(r) for the election; past R it falls back to the true alive mean."""
    est = energy_estimate(network)
    avg = average_energy(r, est.avg_energy * network.config.node_count, network.config.node_count, est.lifetime_estimate)
    if avg > 0:
        return avg
    alive = network.alive_nodes()
    if not alive:
        return 0.0
    return math.fsum(n.residual_energy for n in alive) / len(alive)


# -----------------------------
# Election
# -----------------------------
def ch_probability(node: Node, avg: float, n: int, sum_a: float, p_opt: float) -> float:
    if avg <= 0:
        raise ValueError("average energy must be > 0; skip election this round")
    p = p_opt * n * (1.0 + node.extra_fraction) * node.residual_energy / ((n + sum_a) * avg)
    return min(1.0, max(0.0, p))


def candidate_probabilities(candidates: Sequence[Node], avg: float, p_opt: float) -> dict[int, float]:
    """Per-node CH probabilities with N and the a_i sum taken over ``candidates``."""
    n = len(candidates)
    sum_a = math.fsum(c.extra_fraction for c in candidates)
    return {c.id: ch_probability(c, avg, n, sum_a, p_opt) for c in candidates}


def epoch_length(p: float) -> int:
    return max(1, round(1.0 / p))


def election_threshold(p: float, r: int) -> float:
    if p <= 0:
        return 0.0
    return min(1.0, p / (1.0 - p * (r % epoch_length(p))))


def is_eligible(node: Node, p: float, r: int) -> bool:
    """True unless the node already served as CH in its current epoch of round(1/p) rounds."""
    if p <= 0:
        return False
    return node.rounds_since_ch is None or node.rounds_since_ch > r % epoch_length(p)


def elect_cluster_heads(
    candidates: Sequence[Node],
    r: int,
    probabilities: Mapping[int, float],
    rng: np.random.Generator,
) -> set[int]:
    """Rotating-epoch election; eligible nodes draw in id order."""
    elected = set()
    for node in sorted(candidates, key=lambda c: c.id):
        if not node.alive:
            continue
        p = probabilities.get(node.id, 0.0)
        if not is_eligible(node, p, r):
            continue
        if rng.random() < election_threshold(p, r):
            elected.add(node.id)
            node.rounds_since_ch = 0
    return elected


def advance_eligibility(nodes: Iterable[Node]) -> None:
    """Age every CH window by one round; call once at round end."""
    for node in nodes:
        if node.alive and node.rounds_since_ch is not None:
            node.rounds_since_ch += 1


# -----------------------------
# Membership
# -----------------------------
def assign_clusters(nodes: Sequence[Node], ch_ids: Iterable[int]) -> ClusterAssignment:
    """Every alive non-CH node joins its nearest CH; ties go to the lower CH id."""
    heads = sorted(ch_ids)
    if not heads:
        return ClusterAssignment()
    by_id = {n.id: n for n in nodes}
    head_nodes = [by_id[h] for h in heads]
    head_set = set(heads)
    members = [n for n in nodes if n.alive and n.id not in head_set]
    if not members:
        return ClusterAssignment(ch_ids=heads)

    mpos = np.array([m.position for m in members])
    hpos = np.array([h.position for h in head_nodes])
    diff = mpos[:, None, :] - hpos[None, :, :]
    nearest = np.argmin(np.hypot(diff[..., 0], diff[..., 1]), axis=1)
    membership = {m.id: heads[j] for m, j in zip(members, nearest.tolist())}
    return ClusterAssignment(ch_ids=heads, membership=membership)
