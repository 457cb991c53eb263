import math

import numpy as np
import pytest

from chain import select_leader_weighted
from conftest import make_network, make_node
from errors import ConfigError
from metrics import summarize
from model import BS_POSITION, TWO_LEVEL, NetworkConfig, Role, SepParams, init_network
from protocols import (
    DEEC,
    ENGINES,
    HDEEC,
    MHDEEC,
    PROTOCOLS,
    SEP,
    network_config_for,
    run_round_deec,
    run_round_hdeec,
    run_round_mhdeec,
    run_round_sep,
    run_simulation,
    select_beta_nodes,
    sep_probabilities,
)
from radio import aggregation_energy, rx_energy, tx_energy

# Small batteries so deaths show up within a few hundred rounds.
SHORT_LIVED = NetworkConfig(node_count=50, base_energy=0.005, max_rounds=400)


def run_network(protocol, seed, config=SHORT_LIVED):
    return init_network(network_config_for(protocol, config), seed)


def forced_sep_network(nodes):
    # a huge advanced factor pushes p_adv past 1, so advanced nodes always win the draw
    return make_network(nodes, sep_params=SepParams(0.0, 100.0))


# -----------------------------
# Beta selection
# -----------------------------
def test_beta_count_is_ten_percent():
    rng = np.random.default_rng(1)
    alive = [make_node(i, 0, 0, e_res=float(e)) for i, e in enumerate(rng.uniform(0.1, 1.0, 100))]
    assert len(select_beta_nodes(alive)) == 10


def test_beta_count_never_zero():
    alive = [make_node(i, 0, 0) for i in range(5)]
    assert select_beta_nodes(alive) == [0]
    assert select_beta_nodes([]) == []


def test_beta_selection_matches_sort():
    rng = np.random.default_rng(4)
    for _ in range(50):
        size = int(rng.integers(1, 60))
        alive = [make_node(i, 0, 0, e_res=float(rng.choice([0.1, 0.2, 0.3]))) for i in range(size)]
        k = max(1, math.floor(0.1 * size))
        expected = sorted(n.id for n in sorted(alive, key=lambda n: (-n.residual_energy, n.id))[:k])
        assert select_beta_nodes(alive, 0.1) == expected


# -----------------------------
# SEP probabilities
# -----------------------------
def test_sep_without_advanced_nodes_is_p_opt():
    nodes = [make_node(i, 0, 0) for i in range(4)]
    probs = sep_probabilities(nodes, SepParams(0.1, 0.0), 0.1)
    assert all(p == pytest.approx(0.1) for p in probs.values())


def test_sep_advanced_weight_doubles():
    nodes = [make_node(0, 0, 0), make_node(1, 0, 0, e_init=1.0, a=1.0)]
    probs = sep_probabilities(nodes, SepParams(0.1, 1.0), 0.1)
    assert probs[0] == pytest.approx(0.1 / 1.1)
    assert probs[1] == pytest.approx(2 * probs[0])


def test_sep_uses_two_level_network():
    assert network_config_for(SEP, NetworkConfig()).heterogeneity.mode == TWO_LEVEL
    config = NetworkConfig()
    for protocol in (DEEC, HDEEC, MHDEEC):
        assert network_config_for(protocol, config) is config


# -----------------------------
# Single rounds
# -----------------------------
def test_round_without_cluster_heads_spends_nothing():
    nodes = [make_node(i, 10 * i, 10) for i in range(5)]
    for n in nodes:
        n.rounds_since_ch = 0  # all served this epoch
    network = make_network(nodes)
    outcome = run_round_deec(network)
    assert outcome.ch_count == 0
    assert outcome.packets_delivered_to_bs == 0
    assert outcome.energy_spent == 0.0
    assert network.round_index == 1
    assert all(n.rounds_since_ch == 1 for n in nodes)
    assert all(n.residual_energy == 0.5 for n in nodes)


def test_lone_cluster_head_aggregates_its_own_reading():
    head = make_node(0, 30, 50, a=1.0)
    dead = make_node(1, 10, 10, e_res=0.0)
    dead.alive = False
    network = forced_sep_network([head, dead])
    outcome = run_round_sep(network)

    radio = network.radio
    assert outcome.topology.cluster.ch_ids == [0]
    assert outcome.packets_delivered_to_bs == 1
    assert outcome.breakdown["ch_agg"] == pytest.approx(aggregation_energy(4000, 1, radio))
    assert outcome.breakdown["ch_tx"] == pytest.approx(tx_energy(4000, 100.0, radio))
    assert outcome.energy_spent == pytest.approx(5.6e-4, rel=1e-9)
    assert head.residual_energy == pytest.approx(head.initial_energy - 5.6e-4)


def test_member_reports_through_its_head():
    head = make_node(0, 30, 50, a=1.0)
    member = make_node(1, 30, 40)
    member.rounds_since_ch = 0
    network = forced_sep_network([head, member])
    outcome = run_round_sep(network)

    radio = network.radio
    assert outcome.topology.cluster.membership == {1: 0}
    assert head.role is Role.CLUSTER_HEAD
    expected = {
        "member_tx": tx_energy(4000, 10.0, radio),
        "ch_rx": rx_energy(4000, radio),
        "ch_agg": aggregation_energy(4000, 2, radio),
        "ch_tx": tx_energy(4000, 100.0, radio),
    }
    for category, cost in expected.items():
        assert outcome.breakdown[category] == pytest.approx(cost)
    assert outcome.packets_delivered_to_bs == 1
    assert member.residual_energy == pytest.approx(0.5 - expected["member_tx"])


def test_hybrid_with_one_survivor_reports_directly():
    survivor = make_node(0, 30, 50)
    dead = make_node(1, 10, 10, e_res=0.0)
    dead.alive = False
    network = make_network([survivor, dead])
    for engine in (run_round_hdeec, run_round_mhdeec):
        outcome = engine(network)
        assert outcome.topology.chain is None
        assert outcome.topology.beta_ids == []


@pytest.mark.parametrize("engine", [run_round_hdeec, run_round_mhdeec])
def test_last_survivor_round_keeps_accounts(engine):
    survivor = make_node(0, 30, 50, e_init=1e-4)
    dead = make_node(1, 10, 10, e_init=1e-4, e_res=0.0)
    dead.alive = False
    dead.role = Role.DEAD
    network = make_network([survivor, dead])
    for _ in range(200):
        before = network.residual_total()
        outcome = engine(network)
        assert outcome.packets_delivered_to_bs == outcome.ch_count
        assert before - network.residual_total() == pytest.approx(outcome.energy_spent, abs=1e-15)
        assert dead.role is Role.DEAD
        if outcome.deaths:
            break
    else:
        pytest.fail("survivor never served as head")

    # it heads its own cluster in the round it drains
    assert outcome.deaths == [0]
    assert outcome.packets_delivered_to_bs == 1
    assert outcome.energy_spent == pytest.approx(1e-4)
    assert survivor.death_round == network.round_index
    assert survivor.role is Role.DEAD
    assert len(run_simulation(network, HDEEC, max_rounds=10)) == 0


def test_death_is_settled_at_round_end():
    head = make_node(0, 30, 50, e_init=1.0, e_res=1e-4, a=1.0)
    member = make_node(1, 30, 40)
    member.rounds_since_ch = 0
    network = forced_sep_network([head, member])
    outcome = run_round_sep(network)
    assert outcome.deaths == [0]
    assert not head.alive
    assert head.residual_energy == 0.0
    assert head.death_round == 1
    # the head still received and forwarded this round
    assert outcome.packets_delivered_to_bs == 1


# -----------------------------
# Whole runs
# -----------------------------
@pytest.mark.parametrize("protocol", PROTOCOLS)
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_energy_is_conserved_and_series_monotone(protocol, seed):
    network = run_network(protocol, seed)
    start_total = network.residual_total()
    alive_before = {n.id for n in network.nodes}
    outcomes = []

    def watch(outcome):
        for tx in outcome.transmissions:
            assert tx.src in alive_before
            assert tx.dst < 0 or tx.dst in alive_before
        for node_id in outcome.deaths:
            node = network.nodes[node_id]
            assert node.residual_energy == 0.0
            assert node.death_round == network.round_index
        alive_before.intersection_update(n.id for n in network.alive_nodes())
        outcomes.append(outcome)

    series = run_simulation(network, protocol, observer=watch)
    assert [rec.round for rec in series] == list(range(1, len(series) + 1))

    spent = math.fsum(o.energy_spent for o in outcomes)
    assert start_total - network.residual_total() == pytest.approx(spent, rel=1e-9, abs=1e-12)

    previous_residual = start_total
    for prev, rec in zip([None, *series], series):
        assert previous_residual - rec.energy_residual_total == pytest.approx(rec.energy_spent_round, abs=1e-12)
        assert rec.packets_bs_round == rec.cluster_heads
        if prev is not None:
            assert rec.alive <= prev.alive
            assert rec.energy_residual_total <= prev.energy_residual_total
            assert rec.packets_bs_cum == prev.packets_bs_cum + rec.packets_bs_round
        previous_residual = rec.energy_residual_total
    assert all(n.residual_energy >= 0 for n in network.nodes)


@pytest.mark.parametrize("protocol", [HDEEC, MHDEEC])
def test_hybrid_topology_rules(protocol):
    network = run_network(protocol, 5, NetworkConfig(node_count=50, base_energy=0.005, max_rounds=200))
    positions = {n.id: n for n in network.nodes}
    seen_chain = False

    def watch(outcome):
        nonlocal seen_chain
        topo = outcome.topology
        if topo.chain is None:
            return
        seen_chain = True
        beta = set(topo.beta_ids)
        assert beta.isdisjoint(topo.cluster.ch_ids)
        assert beta.isdisjoint(topo.cluster.membership)
        assert topo.chain.leader_id in beta
        for tx in outcome.transmissions:
            if tx.category != "ch_tx":
                continue
            nearest = min(positions[tx.src].distance_to(positions[b]) for b in beta)
            assert tx.dst == topo.ch_uplink[tx.src]
            assert tx.distance == pytest.approx(nearest)

    run_simulation(network, protocol, observer=watch)
    assert seen_chain


def test_hdeec_leader_is_nearest_beta():
    network = run_network(HDEEC, 7, NetworkConfig())
    for _ in range(100):
        outcome = run_round_hdeec(network)
        if outcome.topology.chain is None:
            break
        beta = [network.nodes[b] for b in outcome.topology.beta_ids]
        best = min(beta, key=lambda n: (n.distance_to(BS_POSITION), n.id))
        assert outcome.topology.chain.leader_id == best.id


def test_mhdeec_leader_matches_start_of_round_weights():
    network = run_network(MHDEEC, 7, NetworkConfig())
    for _ in range(100):
        snapshot = {n.id: (n.initial_energy, n.residual_energy) for n in network.nodes}
        outcome = run_round_mhdeec(network)
        if outcome.topology.chain is None:
            break
        beta = [
            make_node(b, network.nodes[b].x, network.nodes[b].y, *snapshot[b])
            for b in outcome.topology.beta_ids
        ]
        assert outcome.topology.chain.leader_id == select_leader_weighted(beta, network.bs, 0.5, 0.5)


def test_single_beta_makes_hybrids_identical():
    # fewer than 20 nodes -> one beta node, so chain shape and leader rule cannot matter
    config = NetworkConfig(node_count=15, base_energy=0.005, max_rounds=300)
    h = run_simulation(init_network(config, 9), HDEEC)
    m = run_simulation(init_network(config, 9), MHDEEC)
    assert h.records == m.records


def test_same_seed_same_series():
    for protocol in PROTOCOLS:
        a = run_simulation(run_network(protocol, 11), protocol, max_rounds=150)
        b = run_simulation(run_network(protocol, 11), protocol, max_rounds=150)
        assert a.records == b.records


def test_zero_rounds_gives_empty_series():
    network = init_network(NetworkConfig(), seed=1)
    assert len(run_simulation(network, DEEC, max_rounds=0)) == 0
    assert network.round_index == 0


def test_run_stops_when_everyone_is_dead():
    config = NetworkConfig(node_count=20, base_energy=0.005, max_rounds=5000)
    network = init_network(config, seed=3)
    series = run_simulation(network, DEEC)
    assert len(series) < 5000
    assert series[-1].alive == 0
    assert max(n.death_round for n in network.nodes) == len(series)
    assert summarize(series, 20).lnd == len(series)
    assert all(n.role is Role.DEAD for n in network.nodes)


def test_dead_network_runs_no_rounds():
    nodes = [make_node(i, i, i, e_res=0.0) for i in range(3)]
    for n in nodes:
        n.alive = False
    assert len(run_simulation(make_network(nodes), DEEC, max_rounds=10)) == 0


def test_unknown_protocol_is_a_config_error():
    network = init_network(NetworkConfig(node_count=10), seed=0)
    with pytest.raises(ConfigError) as err:
        run_simulation(network, "leach")
    assert err.value.key == "protocol"


def test_engine_table_covers_protocols():
    assert set(ENGINES) == {DEEC, SEP, HDEEC, MHDEEC}


def test_hybrid_round_without_cluster_heads_idles():
    nodes = [make_node(i, 10 * i, 10 + i) for i in range(6)]
    for n in nodes:
        n.rounds_since_ch = 0
    network = make_network(nodes)
    outcome = run_round_hdeec(network)
    assert outcome.topology.beta_ids
    assert outcome.packets_delivered_to_bs == 0
    assert outcome.energy_spent == 0.0
    assert outcome.transmissions == []


def test_single_head_relays_through_single_beta():
    network = init_network(NetworkConfig(node_count=10), seed=2)
    for _ in range(200):
        outcome = run_round_hdeec(network)
        if outcome.ch_count == 1:
            break
    else:
        pytest.fail("no round elected exactly one head")

    (ch,) = outcome.topology.cluster.ch_ids
    (beta,) = outcome.topology.beta_ids
    uplinks = [(t.src, t.dst) for t in outcome.transmissions if t.category != "member_tx"]
    assert uplinks == [(ch, beta), (beta, -1)]
    assert outcome.packets_delivered_to_bs == 1


def test_sep_advanced_nodes_outlive_normal_ones():
    config = NetworkConfig(node_count=50, base_energy=0.005, max_rounds=20000).with_two_level()
    advanced, normal = [], []
    for seed in range(10):
        network = init_network(config, seed)
        run_simulation(network, SEP)
        for n in network.nodes:
            (advanced if n.extra_fraction > 0 else normal).append(n.death_round)
    assert None not in advanced and None not in normal
    assert np.mean(advanced) > np.mean(normal)
