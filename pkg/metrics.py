"""Per-round series and lifetime statistics (FND / HND / LND)."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterator, Optional, Sequence

import pandas as pd

CSV_COLUMNS = [
    "round",
    "alive",
    "cluster_heads",
    "packets_bs_round",
    "packets_bs_cum",
    "energy_residual_total",
    "energy_spent_round",
]

SUMMARY_FIELDS = ["fnd", "hnd", "lnd", "unstability", "total_packets"]


@dataclass(frozen=True)
class MetricsRecord:
    round: int
    alive: int
    cluster_heads: int
    packets_bs_round: int
    packets_bs_cum: int
    energy_residual_total: float
    energy_spent_round: float


@dataclass
class MetricsSeries:
    records: list[MetricsRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[MetricsRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> MetricsRecord:
        return self.records[i]

    def append(self, record: MetricsRecord) -> None:
        self.records.append(record)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.records], columns=CSV_COLUMNS)

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)


@dataclass(frozen=True)
class LifetimeSummary:
    fnd: Optional[int]
    hnd: Optional[int]
    lnd: Optional[int]
    total_packets: int

    @property
    def stability_period(self) -> Optional[int]:
        return self.fnd

    @property
    def unstability_period(self) -> Optional[int]:
        if self.fnd is None or self.lnd is None:
            return None
        return self.lnd - self.fnd

    def as_row(self) -> dict[str, Optional[int]]:
        return {
            "fnd": self.fnd,
            "hnd": self.hnd,
            "lnd": self.lnd,
            "unstability": self.unstability_period,
            "total_packets": self.total_packets,
        }


@dataclass(frozen=True)
class FieldStats:
    mean: Optional[float]
    min: Optional[int]
    max: Optional[int]
    excluded: int  # summaries where the value was not reached


def _first_round(series: Sequence[MetricsRecord], predicate) -> Optional[int]:
    return next((rec.round for rec in series if predicate(rec.alive)), None)


def summarize(series: Sequence[MetricsRecord], n: int) -> LifetimeSummary:
    """Lifetime milestones of one run; a milestone never reached is None."""
    if len(series) == 0:
        raise ValueError("cannot summarize an empty series")
    for expected, rec in enumerate(series, start=1):
        if rec.round != expected:
            raise ValueError(f"series rounds must be consecutive from 1; found {rec.round} at position {expected}")

    half = n // 2
    return LifetimeSummary(
        fnd=_first_round(series, lambda alive: alive < n),
        hnd=_first_round(series, lambda alive: alive <= half),
        lnd=_first_round(series, lambda alive: alive == 0),
        total_packets=series[-1].packets_bs_cum,
    )


def aggregate_seeds(summaries: Sequence[LifetimeSummary]) -> dict[str, FieldStats]:
    """Mean/min/max per field over seeds; unreached milestones are left out and counted."""
    if not summaries:
        raise ValueError("need at least one summary")
    df = pd.DataFrame([s.as_row() for s in summaries], columns=SUMMARY_FIELDS).astype("float64")
    stats = df.agg(["mean", "min", "max"])
    missing = df.isna().sum()

    out = {}
    for col in SUMMARY_FIELDS:
        if missing[col] == len(df):
            out[col] = FieldStats(mean=None, min=None, max=None, excluded=int(missing[col]))
            continue
        out[col] = FieldStats(
            mean=float(stats.at["mean", col]),
            min=int(stats.at["min", col]),
            max=int(stats.at["max", col]),
            excluded=int(missing[col]),
        )
    return out
