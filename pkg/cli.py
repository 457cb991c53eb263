"""Command-line entry point: resolve a RunSpec, run every (protocol, seed), write CSVs and a summary.

Usage:
    python cli.py --protocol all --seed 1 --seed 2 --rounds 4000 --out results
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from errors import ConfigError
from metrics import SUMMARY_FIELDS, LifetimeSummary, aggregate_seeds, summarize
from model import (
    HeterogeneityModel,
    NetworkConfig,
    SepParams,
    init_network,
)
from protocols import PROTOCOLS, RoundOutcome, network_config_for, run_simulation
from radio import RadioParams

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.tsv"
NOT_REACHED = "not reached"


# -----------------------------
# Value parsers
# -----------------------------
def _int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(key, f"{key} must be an integer, got {raw!r}") from None


def _float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(key, f"{key} must be a number, got {raw!r}") from None


def _point(key: str, raw: str) -> tuple[float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ConfigError(key, f"{key} must be X,Y, got {raw!r}")
    return (_float(key, parts[0]), _float(key, parts[1]))


def _protocols(key: str, raw: str) -> list[str]:
    names = [p.strip().lower() for p in raw.split(",") if p.strip()]
    if names == ["all"]:
        return list(PROTOCOLS)
    if not names:
        raise ConfigError(key, f"{key} must name at least one protocol")
    for name in names:
        if name not in PROTOCOLS:
            raise ConfigError(key, f"unknown protocol {name!r}; expected one of {', '.join(PROTOCOLS)} or all")
    return list(dict.fromkeys(names))


def _seeds(key: str, raw: str) -> list[int]:
    seeds = [_int(key, s.strip()) for s in raw.split(",") if s.strip()]
    if not seeds:
        raise ConfigError(key, f"{key} must list at least one seed")
    if any(s < 0 for s in seeds):
        raise ConfigError(key, f"{key} must be non-negative integers")
    return list(dict.fromkeys(seeds))


def _optional_int(key: str, raw: str) -> Optional[int]:
    return None if raw.strip().lower() in ("", "none") else _int(key, raw)


def _text(key: str, raw: str) -> str:
    return raw.strip()


PARSERS: dict[str, Callable[[str, str], object]] = {
    "protocol": _protocols,
    "seeds": _seeds,
    "rounds": _int,
    "nodes": _int,
    "field": _float,
    "bs": _point,
    "p_opt": _float,
    "packet_bits": _int,
    "e0": _float,
    "beta_fraction": _float,
    "heterogeneity": _text,
    "a_max": _float,
    "sep_m": _float,
    "sep_a": _float,
    "w1": _float,
    "w2": _float,
    "e_elec": _float,
    "eps_fs": _float,
    "eps_mp": _float,
    "d0": _float,
    "e_da": _float,
    "placement_seed": _optional_int,
    "out": _text,
    "workers": _int,
}


def _defaults() -> dict[str, object]:
    net, het, sep, radio = NetworkConfig(), HeterogeneityModel(), SepParams(), RadioParams()
    return {
        "protocol": list(PROTOCOLS),
        "seeds": [1],
        "rounds": net.max_rounds,
        "nodes": net.node_count,
        "field": net.field_side,
        "bs": net.bs_position,
        "p_opt": net.p_opt,
        "packet_bits": net.packet_bits,
        "e0": net.base_energy,
        "beta_fraction": net.beta_fraction,
        "heterogeneity": het.mode,
        "a_max": het.a_max,
        "sep_m": sep.advanced_fraction,
        "sep_a": sep.advanced_factor,
        "w1": net.weight_w1,
        "w2": net.weight_w2,
        "e_elec": radio.e_elec,
        "eps_fs": radio.eps_fs,
        "eps_mp": radio.eps_mp,
        "d0": radio.d0,
        "e_da": radio.e_da,
        "placement_seed": None,
        "out": "results",
        "workers": 1,
    }


# -----------------------------
# RunSpec
# -----------------------------
@dataclass(frozen=True)
class RunSpec:
    protocols: list[str]
    seeds: list[int]
    max_rounds: int
    out_dir: Path
    network: NetworkConfig
    radio: RadioParams
    placement_seed: Optional[int] = None
    workers: int = 1
    dump_topology: bool = False
    resolved: dict[str, object] = field(default_factory=dict)

    @property
    def summary_path(self) -> Path:
        return self.out_dir / SUMMARY_FILE

    def csv_path(self, protocol: str, seed: int) -> Path:
        return self.out_dir / f"{protocol}_seed{seed}.csv"

    def topology_path(self, protocol: str, seed: int) -> Path:
        return self.out_dir / f"{protocol}_seed{seed}_topology.txt"


def read_config_text(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        pairs[key] = raw
    return pairs


def parse_config(text: Optional[str] = None, overrides: Optional[dict[str, str]] = None, dump_topology: bool = False) -> RunSpec:
    """Defaults < config file < flag overrides; every value validated against its key."""
    values = _defaults()
    for source in (read_config_text(text or ""), overrides or {}):
        for key, raw in source.items():
            parser = PARSERS.get(key)
            if parser is None:
                raise ConfigError(key, f"unknown key {key!r}")
            values[key] = parser(key, raw)

    if values["rounds"] < 0:
        raise ConfigError("rounds", "rounds must be >= 0")
    if values["workers"] < 1:
        raise ConfigError("workers", "workers must be >= 1")

    network = NetworkConfig(
        node_count=values["nodes"],
        field_side=values["field"],
        bs_position=values["bs"],
        p_opt=values["p_opt"],
        packet_bits=values["packet_bits"],
        base_energy=values["e0"],
        beta_fraction=values["beta_fraction"],
        max_rounds=values["rounds"],
        heterogeneity=HeterogeneityModel(mode=values["heterogeneity"], a_max=values["a_max"]),
        sep_params=SepParams(advanced_fraction=values["sep_m"], advanced_factor=values["sep_a"]),
        weight_w1=values["w1"],
        weight_w2=values["w2"],
    )
    network.validate()
    radio = RadioParams(
        e_elec=values["e_elec"],
        eps_fs=values["eps_fs"],
        eps_mp=values["eps_mp"],
        d0=values["d0"],
        e_da=values["e_da"],
    )
    radio.validate()
    if values["placement_seed"] is not None and values["placement_seed"] < 0:
        raise ConfigError("placement_seed", "placement_seed must be a non-negative integer")

    return RunSpec(
        protocols=values["protocol"],
        seeds=values["seeds"],
        max_rounds=values["rounds"],
        out_dir=Path(values["out"]),
        network=network,
        radio=radio,
        placement_seed=values["placement_seed"],
        workers=values["workers"],
        dump_topology=dump_topology,
        resolved=values,
    )


# -----------------------------
# Running
# -----------------------------
def _format_value(value: object) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


class _TopologyDump:
    """Writes every round's edges as ``u v`` lines under a ``# round r`` header."""

    def __init__(self, fh):
        self.fh = fh

    def __call__(self, outcome: RoundOutcome) -> None:
        topo = outcome.topology
        leader = topo.chain.leader_id if topo.chain else None
        self.fh.write(f"# round {topo.round_index + 1}" + (f" leader {leader}" if leader is not None else "") + "\n")
        for member, ch in sorted(topo.cluster.membership.items()):
            self.fh.write(f"{member} {ch}\n")
        for ch, beta in sorted(topo.ch_uplink.items()):
            self.fh.write(f"{ch} {beta}\n")
        if topo.chain:
            for u, v in topo.chain.edges:
                self.fh.write(f"{u} {v}\n")


def run_one(spec: RunSpec, protocol: str, seed: int) -> LifetimeSummary:
    """One isolated run: own network, own rng, own output files."""
    config = network_config_for(protocol, spec.network)
    network = init_network(config, seed, placement_seed=spec.placement_seed, radio=spec.radio)
    logger.info("running %s seed=%d for up to %d rounds", protocol, seed, spec.max_rounds)

    if spec.dump_topology:
        with spec.topology_path(protocol, seed).open("w", encoding="utf-8") as fh:
            series = run_simulation(network, protocol, spec.max_rounds, observer=_TopologyDump(fh))
    else:
        series = run_simulation(network, protocol, spec.max_rounds)
    series.to_csv(spec.csv_path(protocol, seed))

    if len(series) == 0:
        return LifetimeSummary(fnd=None, hnd=None, lnd=None, total_packets=0)
    return summarize(series, config.node_count)


def _summary_lines(spec: RunSpec, results: dict[tuple[str, int], LifetimeSummary]) -> list[str]:
    sentinel = spec.max_rounds + 1
    lines = [f"# {key} = {_format_value(value)}" for key, value in spec.resolved.items()]
    lines.append("\t".join(["protocol", "seed", *SUMMARY_FIELDS]))
    for protocol in spec.protocols:
        for seed in spec.seeds:
            row = results[(protocol, seed)].as_row()
            cells = [str(sentinel if row[f] is None else row[f]) for f in SUMMARY_FIELDS]
            lines.append("\t".join([protocol, str(seed), *cells]))

    lines.append("")
    lines.append("\t".join(["protocol", "stat", *SUMMARY_FIELDS]))
    for protocol in spec.protocols:
        stats = aggregate_seeds([results[(protocol, seed)] for seed in spec.seeds])
        for stat in ("mean", "min", "max", "excluded"):
            cells = []
            for f in SUMMARY_FIELDS:
                value = getattr(stats[f], stat)
                if value is None:
                    cells.append(NOT_REACHED)
                elif stat == "mean":
                    cells.append(f"{value:.2f}")
                else:
                    cells.append(str(value))
            lines.append("\t".join([protocol, stat, *cells]))
    return lines


def run_batch(spec: RunSpec) -> int:
    """Run every (protocol, seed) pair; 0 on success, 1 on an output error."""
    jobs = [(protocol, seed) for protocol in spec.protocols for seed in spec.seeds]
    try:
        spec.out_dir.mkdir(parents=True, exist_ok=True)
        if spec.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=spec.workers) as pool:
                summaries = list(pool.map(run_one, [spec] * len(jobs), *zip(*jobs)))
        else:
            summaries = [run_one(spec, protocol, seed) for protocol, seed in jobs]
        results = dict(zip(jobs, summaries))
        spec.summary_path.write_text("\n".join(_summary_lines(spec, results)) + "\n", encoding="utf-8")
    except OSError as exc:
        logger.error("cannot write outputs under %s: %s", spec.out_dir, exc)
        return 1

    for (protocol, seed), summary in results.items():
        logger.info("%s seed=%d fnd=%s lnd=%s packets=%d", protocol, seed, summary.fnd, summary.lnd, summary.total_packets)
    logger.info("wrote %d runs and %s", len(jobs), spec.summary_path)
    return 0


# -----------------------------
# Entry point
# -----------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description="Heterogeneous WSN simulator: DEEC, SEP, H-DEEC, MH-DEEC")
    p.add_argument("--protocol", help="deec, sep, hdeec, mhdeec, a comma list, or all (default: all)")
    p.add_argument("--seed", type=int, action="append", help="Run seed; repeat for several runs")
    p.add_argument("--rounds", type=int, help="Maximum rounds per run (default: 4000)")
    p.add_argument("--nodes", type=int, help="Number of sensor nodes (default: 100)")
    p.add_argument("--field", type=float, help="Side of the square field in meters (default: 100)")
    p.add_argument("--bs", help="Base station position X,Y in meters (default: 30,150)")
    p.add_argument("--config", type=Path, help="Config file of 'key = value' lines")
    p.add_argument("--out", help="Output directory (default: results)")
    p.add_argument("--placement-seed", type=int, help="Pin node positions to this seed across runs")
    p.add_argument("--workers", type=int, help="Processes to run in parallel (default: 1)")
    p.add_argument("--dump-topology", action="store_true", help="Write per-round edge lists next to each CSV")
    p.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return p


def _flag_overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides = {}
    for key, value in (
        ("protocol", args.protocol),
        ("rounds", args.rounds),
        ("nodes", args.nodes),
        ("field", args.field),
        ("bs", args.bs),
        ("out", args.out),
        ("placement_seed", args.placement_seed),
        ("workers", args.workers),
    ):
        if value is not None:
            overrides[key] = str(value)
    if args.seed:
        overrides["seeds"] = ",".join(str(s) for s in args.seed)
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else None
    except OSError as exc:
        logger.error("config: cannot read %s: %s", args.config, exc)
        return 2
    try:
        spec = parse_config(text, _flag_overrides(args), dump_topology=args.dump_topology)
    except ConfigError as exc:
        logger.error("%s: %s", exc.key, exc)
        return 2
    return run_batch(spec)


if __name__ == "__main__":
    raise SystemExit(main())
