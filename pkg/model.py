"""Domain types, network initialization and the seeded random streams."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional

import numpy as np

from errors import ConfigError
from radio import RadioParams

if TYPE_CHECKING:
    from clustering import EnergyEstimate

logger = logging.getLogger(__name__)

# -----------------------------
# Default scenario
# -----------------------------
NODE_COUNT = 100
FIELD_SIDE = 100.0  # meters
BS_POSITION = (30.0, 150.0)  # meters, outside the field
P_OPT = 0.1
PACKET_BITS = 4000
BASE_ENERGY = 0.5  # joules
BETA_FRACTION = 0.10
MAX_ROUNDS = 4000
A_MAX = 1.0
SEP_ADVANCED_FRACTION = 0.1
SEP_ADVANCED_FACTOR = 1.0
WEIGHT_W1 = 0.5
WEIGHT_W2 = 0.5

UNIFORM = "uniform"
TWO_LEVEL = "two-level"


# -----------------------------
# Configuration
# -----------------------------
@dataclass(frozen=True)
class HeterogeneityModel:
    """How the extra-energy fractions a_i are drawn at init."""

    mode: str = UNIFORM
    a_max: float = A_MAX

    def validate(self) -> None:
        if self.mode not in (UNIFORM, TWO_LEVEL):
            raise ConfigError("heterogeneity", f"heterogeneity must be '{UNIFORM}' or '{TWO_LEVEL}', got {self.mode!r}")
        if not self.a_max >= 0:
            raise ConfigError("a_max", "a_max must be >= 0")


@dataclass(frozen=True)
class SepParams:
    advanced_fraction: float = SEP_ADVANCED_FRACTION  # m
    advanced_factor: float = SEP_ADVANCED_FACTOR  # a

    def validate(self) -> None:
        if not 0 <= self.advanced_fraction <= 1:
            raise ConfigError("sep_m", "sep_m must be in [0,1]")
        if not self.advanced_factor >= 0:
            raise ConfigError("sep_a", "sep_a must be >= 0")


@dataclass(frozen=True)
class NetworkConfig:
    node_count: int = NODE_COUNT
    field_side: float = FIELD_SIDE
    bs_position: tuple[float, float] = BS_POSITION
    p_opt: float = P_OPT
    packet_bits: int = PACKET_BITS
    base_energy: float = BASE_ENERGY
    beta_fraction: float = BETA_FRACTION
    max_rounds: int = MAX_ROUNDS
    heterogeneity: HeterogeneityModel = field(default_factory=HeterogeneityModel)
    sep_params: SepParams = field(default_factory=SepParams)
    weight_w1: float = WEIGHT_W1
    weight_w2: float = WEIGHT_W2

    def validate(self) -> None:
        """Raise ConfigError naming the first violated invariant."""
        if self.node_count < 2:
            raise ConfigError("nodes", "nodes must be >= 2")
        if not self.field_side > 0:
            raise ConfigError("field", "field must be > 0")
        if len(self.bs_position) != 2 or not all(math.isfinite(c) for c in self.bs_position):
            raise ConfigError("bs", "bs must be two finite coordinates X,Y")
        if not 0 < self.p_opt < 1:
            raise ConfigError("p_opt", "p_opt must be in (0,1)")
        if self.packet_bits <= 0:
            raise ConfigError("packet_bits", "packet_bits must be > 0")
        if not self.base_energy > 0:
            raise ConfigError("e0", "e0 must be > 0")
        if not 0 < self.beta_fraction < 1:
            raise ConfigError("beta_fraction", "beta_fraction must be in (0,1)")
        if self.max_rounds < 0:
            raise ConfigError("rounds", "rounds must be >= 0")
        if not 0 <= self.weight_w1 <= 1:
            raise ConfigError("w1", "w1 must be in [0,1]")
        if not 0 <= self.weight_w2 <= 1:
            raise ConfigError("w2", "w2 must be in [0,1]")
        if not math.isclose(self.weight_w1 + self.weight_w2, 1.0, rel_tol=0, abs_tol=1e-9):
            raise ConfigError("w2", "w1 + w2 must equal 1")
        self.heterogeneity.validate()
        self.sep_params.validate()

    def with_two_level(self) -> NetworkConfig:
        """Same config with SEP-style two-level energies."""
        return dataclasses.replace(self, heterogeneity=dataclasses.replace(self.heterogeneity, mode=TWO_LEVEL))


# -----------------------------
# Nodes and the network
# -----------------------------
class Role(str, Enum):
    NORMAL = "normal"
    CLUSTER_HEAD = "cluster-head"
    BETA = "beta"
    BETA_LEADER = "beta-leader"
    DEAD = "dead"


@dataclass
class Node:
    id: int
    x: float
    y: float
    initial_energy: float
    residual_energy: float
    extra_fraction: float = 0.0
    bs_distance: float = 0.0
    alive: bool = True
    role: Role = Role.NORMAL
    # None until the node first serves as CH.
    rounds_since_ch: Optional[int] = None
    death_round: Optional[int] = None

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def distance_to(self, other: Node | tuple[float, float]) -> float:
        ox, oy = other.position if isinstance(other, Node) else other
        return math.hypot(self.x - ox, self.y - oy)


@dataclass
class Network:
    config: NetworkConfig
    nodes: list[Node]
    rng: np.random.Generator
    radio: RadioParams = field(default_factory=RadioParams)
    round_index: int = 0
    estimate: Optional[EnergyEstimate] = None

    @property
    def bs(self) -> tuple[float, float]:
        return self.config.bs_position

    def alive_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.alive]

    def alive_count(self) -> int:
        return sum(1 for n in self.nodes if n.alive)

    def residual_total(self) -> float:
        return math.fsum(n.residual_energy for n in self.nodes)


# -----------------------------
# Initialization
# -----------------------------
def _draw_extra_fractions(config: NetworkConfig, gen: np.random.Generator) -> np.ndarray:
    n = config.node_count
    het = config.heterogeneity
    if het.mode == UNIFORM:
        if het.a_max == 0:
            return np.zeros(n)
        return gen.uniform(0.0, het.a_max, size=n)
    sep = config.sep_params
    advanced = gen.permutation(n)[: int(round(sep.advanced_fraction * n))]
    a = np.zeros(n)
    a[advanced] = sep.advanced_factor
    return a


def init_network(
    config: NetworkConfig,
    seed: int,
    placement_seed: Optional[int] = None,
    radio: Optional[RadioParams] = None,
) -> Network:
    """Deploy N nodes uniformly over the square and draw their energies.

    The run seed spawns three PCG64 streams (placement, energy, election).
    Passing ``placement_seed`` pins the positions independently of ``seed``.
    """
    config.validate()
    radio = radio or RadioParams()
    radio.validate()
    if seed < 0:
        raise ConfigError("seeds", "seeds must be non-negative integers")

    place_ss, energy_ss, election_ss = np.random.SeedSequence(seed).spawn(3)
    if placement_seed is not None:
        if placement_seed < 0:
            raise ConfigError("placement_seed", "placement_seed must be a non-negative integer")
        place_ss = np.random.SeedSequence(placement_seed)

    side = config.field_side
    coords = np.random.Generator(np.random.PCG64(place_ss)).uniform(0.0, side, size=(config.node_count, 2))
    extras = _draw_extra_fractions(config, np.random.Generator(np.random.PCG64(energy_ss)))

    bx, by = config.bs_position
    nodes = []
    for i, ((x, y), a) in enumerate(zip(coords.tolist(), extras.tolist())):
        e_init = config.base_energy * (1.0 + a)
        nodes.append(
            Node(
                id=i,
                x=x,
                y=y,
                initial_energy=e_init,
                residual_energy=e_init,
                extra_fraction=a,
                bs_distance=math.hypot(x - bx, y - by),
            )
        )

    network = Network(config=config, nodes=nodes, rng=np.random.Generator(np.random.PCG64(election_ss)), radio=radio)
    logger.debug("initialized %d nodes, E_total=%.6f J (seed=%d)", len(nodes), total_initial_energy(network), seed)
    return network


def total_initial_energy(network: Network) -> float:
    return math.fsum(n.initial_energy for n in network.nodes)
