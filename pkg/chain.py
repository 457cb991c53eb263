"""Beta-node backbone: chain construction, leader selection and next hops."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx

from errors import ProtocolError, TopologyError
from model import Node

GREEDY = "greedy"
MULTI_EDGE = "multi-edge"

# next_hop value of the leader
BS = -1


@dataclass
class ChainTopology:
    mode: str
    member_ids: list[int]
    edges: list[tuple[int, int]] = field(default_factory=list)
    leader_id: Optional[int] = None
    next_hop: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class LeaderWeight:
    energy_param: float  # E_p = E_init / E_res
    distance_param: float  # D_toBS = d^4 / d_avg^4
    d_to_bs: float
    d_avg: float
    weight: float


def _require_members(beta: Sequence[Node]) -> None:
    if not beta:
        raise TopologyError("empty beta set")


def _farthest_first(beta: Sequence[Node], bs: tuple[float, float]) -> list[Node]:
    return sorted(beta, key=lambda n: (-n.distance_to(bs), n.id))


def _nearest(origin: Node, pool: Sequence[Node]) -> Node:
    return min(pool, key=lambda n: (origin.distance_to(n), n.id))


# -----------------------------
# Construction
# -----------------------------
def build_greedy_chain(beta: Sequence[Node], bs: tuple[float, float]) -> ChainTopology:
    """Start at the member farthest from the BS and keep appending the nearest unchained one."""
    _require_members(beta)
    order = _farthest_first(beta, bs)
    chain = [order[0]]
    remaining = order[1:]
    edges = []
    while remaining:
        nxt = _nearest(chain[-1], remaining)
        edges.append((chain[-1].id, nxt.id))
        chain.append(nxt)
        remaining.remove(nxt)
    return ChainTopology(mode=GREEDY, member_ids=[n.id for n in chain], edges=edges)


def build_multi_edge_chain(beta: Sequence[Node], bs: tuple[float, float]) -> ChainTopology:
    """Farthest-first tree: each newcomer attaches to its nearest already-processed node.

    A node may collect several attachments, so the result branches but stays
    connected with |edges| = |members| - 1.
    """
    _require_members(beta)
    order = _farthest_first(beta, bs)
    edges = []
    for i in range(1, len(order)):
        anchor = _nearest(order[i], order[:i])
        edges.append((order[i].id, anchor.id))
    return ChainTopology(mode=MULTI_EDGE, member_ids=[n.id for n in order], edges=edges)


# -----------------------------
# Leader selection
# -----------------------------
def select_leader_nearest(beta: Sequence[Node], bs: tuple[float, float]) -> int:
    _require_members(beta)
    return min(beta, key=lambda n: (n.distance_to(bs), n.id)).id


def leader_weights(beta: Sequence[Node], bs: tuple[float, float], w1: float, w2: float) -> dict[int, LeaderWeight]:
    """Combined energy/distance weight of every beta node."""
    _require_members(beta)
    dist = {n.id: n.distance_to(bs) for n in beta}
    d_avg = math.fsum(dist.values()) / len(beta)
    weights = {}
    for n in beta:
        if n.residual_energy <= 0:
            raise ProtocolError(f"beta node {n.id} has no residual energy")
        e_p = n.initial_energy / n.residual_energy
        d_param = (dist[n.id] / d_avg) ** 4 if d_avg > 0 else 1.0
        weights[n.id] = LeaderWeight(
            energy_param=e_p,
            distance_param=d_param,
            d_to_bs=dist[n.id],
            d_avg=d_avg,
            weight=w1 * e_p + w2 * d_param,
        )
    return weights


def select_leader_weighted(beta: Sequence[Node], bs: tuple[float, float], w1: float, w2: float) -> int:
    weights = leader_weights(beta, bs, w1, w2)
    return min(weights, key=lambda i: (weights[i].weight, i))


# -----------------------------
# Routing
# -----------------------------
def backbone_graph(topology: ChainTopology) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(topology.member_ids)
    for u, v in topology.edges:
        if u not in graph or v not in graph:
            raise TopologyError(f"edge ({u}, {v}) leaves the member set")
        graph.add_edge(u, v)
    return graph


def route_to_leader(topology: ChainTopology) -> dict[int, int]:
    """Next hop of every member toward the leader; the leader hops to ``BS``."""
    if topology.leader_id is None or topology.leader_id not in topology.member_ids:
        raise TopologyError("topology has no valid leader")
    graph = backbone_graph(topology)
    if not nx.is_connected(graph):
        unreached = set(graph) - nx.node_connected_component(graph, topology.leader_id)
        raise TopologyError(f"members {sorted(unreached)} cannot reach leader {topology.leader_id}")

    paths = nx.shortest_path(graph, target=topology.leader_id)
    next_hop = {m: paths[m][1] for m in topology.member_ids if m != topology.leader_id}
    next_hop[topology.leader_id] = BS
    topology.next_hop = next_hop
    return next_hop
