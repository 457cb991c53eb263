"""First-order radio energy model.

Every joule the simulator charges goes through this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from errors import ConfigError, ProtocolError

if TYPE_CHECKING:
    from model import Node

E_ELEC = 5e-9  # J/bit
EPS_FS = 10e-12  # J/bit/m^2
EPS_MP = 0.0013e-12  # J/bit/m^4
D0 = 70.0  # m; not sqrt(EPS_FS/EPS_MP), so tx_energy jumps at d0
E_DA = 5e-9  # J/bit/signal


@dataclass(frozen=True)
class RadioParams:
    e_elec: float = E_ELEC
    eps_fs: float = EPS_FS
    eps_mp: float = EPS_MP
    d0: float = D0
    e_da: float = E_DA

    def validate(self) -> None:
        for key, value in (
            ("e_elec", self.e_elec),
            ("eps_fs", self.eps_fs),
            ("eps_mp", self.eps_mp),
            ("d0", self.d0),
            ("e_da", self.e_da),
        ):
            if not value > 0:
                raise ConfigError(key, f"{key} must be > 0")


def tx_energy(bits: int, distance: float, params: RadioParams) -> float:
    """Energy to send ``bits`` over ``distance`` meters (fs below d0, mp from d0 on)."""
    if bits <= 0:
        raise ValueError(f"bits must be > 0, got {bits}")
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    if distance < params.d0:
        return bits * params.e_elec + bits * params.eps_fs * distance**2
    return bits * params.e_elec + bits * params.eps_mp * distance**4


def rx_energy(bits: int, params: RadioParams) -> float:
    if bits <= 0:
        raise ValueError(f"bits must be > 0, got {bits}")
    return bits * params.e_elec


def aggregation_energy(bits: int, signal_count: int, params: RadioParams) -> float:
    if bits <= 0:
        raise ValueError(f"bits must be > 0, got {bits}")
    if signal_count < 1:
        raise ValueError(f"signal_count must be >= 1, got {signal_count}")
    return bits * signal_count * params.e_da


def charge(node: Node, cost: float) -> float:
    """Deduct ``cost`` from the node, clamped at zero; return what was deducted.

    The node stays ``alive`` until the round engine settles deaths at round end.
    """
    if not node.alive:
        raise ProtocolError(f"charged dead node {node.id}")
    if cost < 0:
        raise ValueError(f"cost must be >= 0, got {cost}")
    if cost >= node.residual_energy:
        deducted = node.residual_energy
        node.residual_energy = 0.0
        return deducted
    node.residual_energy -= cost
    return cost
