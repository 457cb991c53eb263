import pytest

from conftest import make_node
from errors import ProtocolError
from radio import RadioParams, aggregation_energy, charge, rx_energy, tx_energy

PARAMS = RadioParams()


def test_tx_at_zero_distance_is_electronics_only():
    assert tx_energy(4000, 0.0, PARAMS) == pytest.approx(2.0e-5, rel=1e-12)


def test_tx_free_space_branch():
    assert tx_energy(4000, 50.0, PARAMS) == pytest.approx(1.2e-4, rel=1e-12)


def test_tx_multipath_from_threshold_on():
    d0 = PARAMS.d0
    expected = 4000 * PARAMS.e_elec + 4000 * PARAMS.eps_mp * d0**4
    assert tx_energy(4000, d0, PARAMS) == pytest.approx(expected, rel=1e-12)
    just_below = 4000 * PARAMS.e_elec + 4000 * PARAMS.eps_fs * (d0 - 1e-9) ** 2
    assert tx_energy(4000, d0 - 1e-9, PARAMS) == pytest.approx(just_below, rel=1e-12)


def test_tx_increases_with_distance_and_bits():
    distances = [0, 1, 10, 50, 69.9, 90, 150, 300]
    costs = [tx_energy(4000, d, PARAMS) for d in distances]
    assert costs == sorted(costs)
    assert len(set(costs)) == len(costs)
    assert tx_energy(8000, 30, PARAMS) > tx_energy(4000, 30, PARAMS)


def test_tx_never_below_rx():
    for d in (0, 5, 70, 100):
        assert tx_energy(4000, d, PARAMS) >= rx_energy(4000, PARAMS)


def test_tx_rejects_bad_arguments():
    with pytest.raises(ValueError):
        tx_energy(4000, -1.0, PARAMS)
    with pytest.raises(ValueError):
        tx_energy(0, 1.0, PARAMS)


def test_rx_energy():
    assert rx_energy(4000, PARAMS) == pytest.approx(2.0e-5, rel=1e-12)
    assert rx_energy(8000, PARAMS) == 2 * rx_energy(4000, PARAMS)
    with pytest.raises(ValueError):
        rx_energy(0, PARAMS)


def test_aggregation_energy():
    assert aggregation_energy(4000, 1, PARAMS) == pytest.approx(2.0e-5, rel=1e-12)
    assert aggregation_energy(4000, 7, PARAMS) == pytest.approx(7 * aggregation_energy(4000, 1, PARAMS))
    with pytest.raises(ValueError):
        aggregation_energy(4000, 0, PARAMS)


def test_charge_deducts():
    n = make_node(0, 0, 0, e_init=0.5)
    assert charge(n, 0.1) == 0.1
    assert n.residual_energy == pytest.approx(0.4)
    assert n.alive


def test_charge_clamps_and_reports_deducted():
    n = make_node(0, 0, 0, e_init=0.5, e_res=0.05)
    assert charge(n, 0.1) == 0.05
    assert n.residual_energy == 0.0
    # death is settled by the round engine
    assert n.alive


def test_charge_zero_is_identity():
    n = make_node(0, 0, 0, e_init=0.5, e_res=0.3)
    assert charge(n, 0.0) == 0.0
    assert n.residual_energy == 0.3


def test_charge_dead_node_is_a_bug():
    n = make_node(0, 0, 0)
    n.alive = False
    with pytest.raises(ProtocolError):
        charge(n, 0.1)
