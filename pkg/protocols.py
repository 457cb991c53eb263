"""Round engines for DEEC, SEP, H-DEEC and MH-DEEC, and the simulation loop.

Every engine builds the whole round topology from the start-of-round state
first, then plays the traffic through the radio model. Energy is charged via
``radio.charge`` only, and deaths are settled once at the end of the round.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from chain import (
    BS,
    ChainTopology,
    build_greedy_chain,
    build_multi_edge_chain,
    route_to_leader,
    select_leader_nearest,
    select_leader_weighted,
)
from clustering import (
    ClusterAssignment,
    advance_eligibility,
    assign_clusters,
    candidate_probabilities,
    elect_cluster_heads,
    election_average,
)
from errors import ConfigError
from metrics import MetricsRecord, MetricsSeries
from model import Network, NetworkConfig, Node, Role, SepParams
from radio import aggregation_energy, charge, rx_energy, tx_energy

logger = logging.getLogger(__name__)

DEEC = "deec"
SEP = "sep"
HDEEC = "hdeec"
MHDEEC = "mhdeec"

ENERGY_CATEGORIES = ("member_tx", "ch_rx", "ch_agg", "ch_tx", "beta_rx", "beta_agg", "beta_tx")


@dataclass
class RoundTopology:
    round_index: int
    beta_ids: list[int] = field(default_factory=list)
    cluster: ClusterAssignment = field(default_factory=ClusterAssignment)
    chain: Optional[ChainTopology] = None
    ch_uplink: dict[int, int] = field(default_factory=dict)  # CH id -> beta id


@dataclass(frozen=True)
class Transmission:
    src: int
    dst: int  # BS for the sink
    distance: float
    category: str


@dataclass
class RoundOutcome:
    topology: RoundTopology
    packets_delivered_to_bs: int = 0
    deaths: list[int] = field(default_factory=list)
    breakdown: dict[str, float] = field(default_factory=lambda: dict.fromkeys(ENERGY_CATEGORIES, 0.0))
    transmissions: list[Transmission] = field(default_factory=list)

    @property
    def energy_spent(self) -> float:
        return math.fsum(self.breakdown.values())

    @property
    def ch_count(self) -> int:
        return len(self.topology.cluster.ch_ids)


# -----------------------------
# Round plumbing
# -----------------------------
class _Ledger:
    """Charges one round's traffic and keeps the per-role breakdown."""

    def __init__(self, network: Network, outcome: RoundOutcome):
        self.network = network
        self.outcome = outcome
        self.bits = network.config.packet_bits
        self.radio = network.radio

    def _spend(self, node: Node, cost: float, category: str) -> None:
        self.outcome.breakdown[category] += charge(node, cost)

    def send(self, src: Node, dst: Optional[Node], tx_category: str, rx_category: str = "") -> None:
        """One L-bit packet from ``src`` to ``dst`` (None is the BS, which pays nothing)."""
        if dst is None:
            distance = src.distance_to(self.network.bs)
        else:
            distance = src.distance_to(dst)
        self._spend(src, tx_energy(self.bits, distance, self.radio), tx_category)
        if dst is not None:
            self._spend(dst, rx_energy(self.bits, self.radio), rx_category)
        self.outcome.transmissions.append(Transmission(src.id, BS if dst is None else dst.id, distance, tx_category))

    def aggregate(self, node: Node, signals: int, category: str) -> None:
        self._spend(node, aggregation_energy(self.bits, signals, self.radio), category)


def _by_id(network: Network) -> dict[int, Node]:
    return {n.id: n for n in network.nodes}


def _reset_roles(network: Network) -> None:
    for node in network.nodes:
        if node.alive:
            node.role = Role.NORMAL


def _elect(network: Network, candidates: Sequence[Node], probabilities=None) -> ClusterAssignment:
    r = network.round_index
    if not candidates:
        return ClusterAssignment()
    if probabilities is None:
        avg = election_average(network, r)
        if avg <= 0:
            return ClusterAssignment()
        probabilities = candidate_probabilities(candidates, avg, network.config.p_opt)
    ch_ids = elect_cluster_heads(candidates, r, probabilities, network.rng)
    return assign_clusters(candidates, ch_ids)


def _cluster_traffic(ledger: _Ledger, cluster: ClusterAssignment, nodes: dict[int, Node]) -> None:
    """Members report to their CH; each CH folds its own reading in with theirs."""
    for member_id, ch_id in sorted(cluster.membership.items()):
        ledger.send(nodes[member_id], nodes[ch_id], "member_tx", "ch_rx")
    for ch_id, count in cluster.member_counts.items():
        ledger.aggregate(nodes[ch_id], count + 1, "ch_agg")


def _settle_round(network: Network, outcome: RoundOutcome) -> RoundOutcome:
    r = network.round_index
    for node in network.nodes:
        if node.alive and node.residual_energy <= 0:
            node.alive = False
            node.role = Role.DEAD
            node.death_round = r + 1
            outcome.deaths.append(node.id)
    advance_eligibility(network.nodes)
    network.round_index += 1
    return outcome


def _direct_round(network: Network, probabilities_for=None) -> RoundOutcome:
    """Cluster round where every CH sends straight to the BS."""
    outcome = RoundOutcome(topology=RoundTopology(round_index=network.round_index))
    alive = network.alive_nodes()
    if not alive:
        return outcome
    _reset_roles(network)
    nodes = _by_id(network)
    probabilities = probabilities_for(network, alive) if probabilities_for else None
    cluster = _elect(network, alive, probabilities)
    outcome.topology.cluster = cluster
    for ch_id in cluster.ch_ids:
        nodes[ch_id].role = Role.CLUSTER_HEAD

    ledger = _Ledger(network, outcome)
    _cluster_traffic(ledger, cluster, nodes)
    for ch_id in cluster.ch_ids:
        ledger.send(nodes[ch_id], None, "ch_tx")
        outcome.packets_delivered_to_bs += 1
    return _settle_round(network, outcome)


# -----------------------------
# Baselines
# -----------------------------
def run_round_deec(network: Network) -> RoundOutcome:
    return _direct_round(network)


def sep_probabilities(candidates: Sequence[Node], sep: SepParams, p_opt: float) -> dict[int, float]:
    """Two-class weighted probabilities; a node is advanced when it carries extra energy."""
    a, m = sep.advanced_factor, sep.advanced_fraction
    p_nrm = p_opt / (1 + a * m)
    p_adv = p_opt * (1 + a) / (1 + a * m)
    return {c.id: p_adv if c.extra_fraction > 0 else p_nrm for c in candidates}


def run_round_sep(network: Network) -> RoundOutcome:
    """SEP round; expects two-level energies (see ``network_config_for``)."""
    return _direct_round(
        network,
        lambda net, alive: sep_probabilities(alive, net.config.sep_params, net.config.p_opt),
    )


# -----------------------------
# Hybrid (beta backbone) engines
# -----------------------------
def select_beta_nodes(alive: Sequence[Node], fraction: float = 0.10) -> list[int]:
    """The highest-energy ``max(1, floor(fraction * alive))`` nodes; ties go to the lower id."""
    if not alive:
        return []
    k = max(1, math.floor(fraction * len(alive)))
    ranked = sorted(alive, key=lambda n: (-n.residual_energy, n.id))
    return sorted(n.id for n in ranked[:k])


def _relay_over_chain(ledger: _Ledger, chain: ChainTopology, inbox: dict[int, int], nodes: dict[int, Node]) -> int:
    """Forward every held aggregate hop by hop to the leader; return aggregates delivered to the BS.

    ``inbox`` maps beta id -> number of CH aggregates it received directly.
    """
    next_hop = chain.next_hop
    depth = {}
    for member in chain.member_ids:
        hops, current = 0, member
        while current != chain.leader_id:
            current = next_hop[current]
            hops += 1
        depth[member] = hops

    signals = {m: inbox.get(m, 0) for m in chain.member_ids}
    carried = dict(signals)
    delivered = 0
    for member in sorted(chain.member_ids, key=lambda m: (-depth[m], m)):
        if carried[member] == 0:
            continue
        node = nodes[member]
        ledger.aggregate(node, signals[member], "beta_agg")
        hop = next_hop[member]
        if hop == BS:
            ledger.send(node, None, "beta_tx")
            delivered += carried[member]
        else:
            ledger.send(node, nodes[hop], "beta_tx", "beta_rx")
            signals[hop] += 1
            carried[hop] += carried[member]
    return delivered


def _hybrid_round(
    network: Network,
    build_chain: Callable[[Sequence[Node], tuple[float, float]], ChainTopology],
    pick_leader: Callable[[Network, Sequence[Node]], int],
) -> RoundOutcome:
    alive = network.alive_nodes()
    if len(alive) == 1:
        # No one is left to relay for; the survivor reports directly.
        return _direct_round(network)

    outcome = RoundOutcome(topology=RoundTopology(round_index=network.round_index))
    if not alive:
        return outcome
    _reset_roles(network)
    nodes = _by_id(network)
    topo = outcome.topology

    topo.beta_ids = select_beta_nodes(alive, network.config.beta_fraction)
    beta = [nodes[b] for b in topo.beta_ids]
    beta_set = set(topo.beta_ids)
    normal = [n for n in alive if n.id not in beta_set]

    topo.cluster = _elect(network, normal)
    chain = build_chain(beta, network.bs)
    chain.leader_id = pick_leader(network, beta)
    route_to_leader(chain)
    topo.chain = chain
    for ch_id in topo.cluster.ch_ids:
        topo.ch_uplink[ch_id] = min(beta, key=lambda b: (nodes[ch_id].distance_to(b), b.id)).id

    for b in beta:
        b.role = Role.BETA
    nodes[chain.leader_id].role = Role.BETA_LEADER
    for ch_id in topo.cluster.ch_ids:
        nodes[ch_id].role = Role.CLUSTER_HEAD

    ledger = _Ledger(network, outcome)
    _cluster_traffic(ledger, topo.cluster, nodes)
    inbox: dict[int, int] = {}
    for ch_id, beta_id in sorted(topo.ch_uplink.items()):
        ledger.send(nodes[ch_id], nodes[beta_id], "ch_tx", "beta_rx")
        inbox[beta_id] = inbox.get(beta_id, 0) + 1
    outcome.packets_delivered_to_bs = _relay_over_chain(ledger, chain, inbox, nodes)
    return _settle_round(network, outcome)


def run_round_hdeec(network: Network) -> RoundOutcome:
    """Greedy beta chain led by the beta node nearest the BS."""
    return _hybrid_round(network, build_greedy_chain, lambda net, beta: select_leader_nearest(beta, net.bs))


def run_round_mhdeec(network: Network) -> RoundOutcome:
    """Multi-edged beta tree led by the minimum combined-weight beta node."""
    return _hybrid_round(
        network,
        build_multi_edge_chain,
        lambda net, beta: select_leader_weighted(beta, net.bs, net.config.weight_w1, net.config.weight_w2),
    )


ENGINES: dict[str, Callable[[Network], RoundOutcome]] = {
    DEEC: run_round_deec,
    SEP: run_round_sep,
    HDEEC: run_round_hdeec,
    MHDEEC: run_round_mhdeec,
}
PROTOCOLS = tuple(ENGINES)


def network_config_for(protocol: str, config: NetworkConfig) -> NetworkConfig:
    """SEP needs its two energy classes; every other protocol runs the config as given."""
    if protocol == SEP:
        return config.with_two_level()
    return config


# -----------------------------
# Simulation loop
# -----------------------------
def run_simulation(
    network: Network,
    protocol: str,
    max_rounds: Optional[int] = None,
    observer: Optional[Callable[[RoundOutcome], None]] = None,
) -> MetricsSeries:
    """Run rounds until ``max_rounds`` or until every node is dead."""
    engine = ENGINES.get(protocol)
    if engine is None:
        raise ConfigError("protocol", f"unknown protocol {protocol!r}; expected one of {', '.join(PROTOCOLS)}")
    if max_rounds is None:
        max_rounds = network.config.max_rounds

    series = MetricsSeries()
    n = len(network.nodes)
    cumulative = 0
    first_death_logged = False
    for _ in range(max_rounds):
        if network.alive_count() == 0:
            break
        outcome = engine(network)
        if observer is not None:
            observer(outcome)
        cumulative += outcome.packets_delivered_to_bs
        alive = network.alive_count()
        series.append(
            MetricsRecord(
                round=network.round_index,
                alive=alive,
                cluster_heads=outcome.ch_count,
                packets_bs_round=outcome.packets_delivered_to_bs,
                packets_bs_cum=cumulative,
                energy_residual_total=network.residual_total(),
                energy_spent_round=outcome.energy_spent,
            )
        )
        logger.debug("%s r=%d alive=%d CHs=%d", protocol, network.round_index, alive, outcome.ch_count)
        if not first_death_logged and alive < n:
            logger.info("%s: first node died in round %d", protocol, network.round_index)
            first_death_logged = True
        if alive == 0:
            logger.info("%s: last node died in round %d", protocol, network.round_index)
            break
    return series
