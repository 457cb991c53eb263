import math

import numpy as np
import pytest

from model import BS_POSITION, Network, NetworkConfig, Node


def make_node(node_id, x, y, e_init=0.5, e_res=None, a=0.0, bs=BS_POSITION):
    return Node(
        id=node_id,
        x=float(x),
        y=float(y),
        initial_energy=e_init,
        residual_energy=e_init if e_res is None else e_res,
        extra_fraction=a,
        bs_distance=math.hypot(x - bs[0], y - bs[1]),
    )


def make_network(nodes, seed=0, **config):
    config.setdefault("node_count", max(2, len(nodes)))
    return Network(config=NetworkConfig(**config), nodes=nodes, rng=np.random.default_rng(seed))


@pytest.fixture
def node():
    return make_node


@pytest.fixture
def low_energy_config():
    """Default geometry with energies small enough that every protocol loses nodes within a few hundred rounds."""
    return NetworkConfig(base_energy=0.02, max_rounds=1500)
