# dashboard.py: results viewer for simulator output
# ---------------------------------------------------
# Run:
#   streamlit run dashboard.py
# Reads the per-run CSVs and summary.tsv that cli.py writes into an output
# directory and plots alive nodes, packets at the BS and residual energy
# over rounds, averaged over seeds for each protocol.

import io
import re
from pathlib import Path

import altair as alt
import numpy as np
import pandas as pd
import streamlit as st

from metrics import CSV_COLUMNS

RUN_FILE = re.compile(r"^(?P<protocol>[a-z]+)_seed(?P<seed>\d+)\.csv$")

METRICS = {
    "Alive nodes": "alive",
    "Packets received at BS (cumulative)": "packets_bs_cum",
    "Residual energy (J)": "energy_residual_total",
    "Cluster heads per round": "cluster_heads",
}
# Once a run halts these columns keep their last value; the rest drop to 0.
CARRIED_COLUMNS = {"packets_bs_cum", "energy_residual_total", "alive"}


# ----------------- Utilities -----------------
def load_runs(directory) -> pd.DataFrame:
    """Long frame of every ``<protocol>_seed<n>.csv`` under ``directory``."""
    frames = []
    for path in sorted(Path(directory).glob("*.csv")):
        match = RUN_FILE.match(path.name)
        if not match:
            continue
        df = pd.read_csv(path)
        if list(df.columns) != CSV_COLUMNS:
            continue
        df.insert(0, "seed", int(match["seed"]))
        df.insert(0, "protocol", match["protocol"])
        frames.append(df)
    if not frames:
        return pd.DataFrame(columns=["protocol", "seed", *CSV_COLUMNS])
    return pd.concat(frames, ignore_index=True)


def mean_curves(runs: pd.DataFrame, column: str) -> pd.DataFrame:
    """Per-protocol mean of ``column`` per round; halted runs hold their final state."""
    if runs.empty:
        return pd.DataFrame(columns=["protocol", "round", column])
    last_round = int(runs["round"].max())
    rounds = pd.RangeIndex(1, last_round + 1, name="round")
    parts = []
    for (protocol, seed), grp in runs.groupby(["protocol", "seed"]):
        s = grp.set_index("round")[column].reindex(rounds)
        s = s.ffill() if column in CARRIED_COLUMNS else s.fillna(0)
        parts.append(pd.DataFrame({"protocol": protocol, "seed": seed, "round": rounds, column: s.values}))
    full = pd.concat(parts, ignore_index=True)
    return full.groupby(["protocol", "round"], as_index=False)[column].mean()


def y_domain(values, pad=5):
    """[min - pad, max + pad], robust to all-NaN or flat series."""
    arr = np.asarray(values, dtype=float)
    arr = arr[~np.isnan(arr)]
    if arr.size == 0:
        return [0, 1]
    return [float(arr.min()) - pad, float(arr.max()) + pad]


def load_summary(directory) -> pd.DataFrame:
    """Per-run table from summary.tsv (the block before the aggregate rows)."""
    path = Path(directory) / "summary.tsv"
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
    table = []
    for line in lines:
        if not line.strip():
            break
        table.append(line)
    return pd.read_csv(io.StringIO("\n".join(table)), sep="\t")


def protocol_chart(curves: pd.DataFrame, column: str, title: str):
    pad = 0.0 if column == "energy_residual_total" else 2
    ydomain = y_domain(curves[column].values, pad=pad)
    return (
        alt.Chart(curves)
        .mark_line(strokeWidth=2)
        .encode(
            x=alt.X("round:Q", title="Round"),
            y=alt.Y(f"{column}:Q", title=title, scale=alt.Scale(domain=ydomain)),
            color=alt.Color("protocol:N", scale=alt.Scale(scheme="tableau10")),
            tooltip=["protocol", "round", alt.Tooltip(f"{column}:Q", format=".3f")],
        )
        .properties(title=title, height=380)
        .interactive()
    )


# ----------------- App -----------------
def main():
    st.set_page_config(page_title="WSN Protocol Comparison", layout="wide")
    st.title("📡 WSN Protocol Comparison")

    with st.sidebar:
        st.header("Results")
        directory = st.text_input("Output directory", value="results")
        st.caption("The directory cli.py wrote with --out.")

    if not Path(directory).is_dir():
        st.error(f"No directory named {directory!r}. Run cli.py first.")
        st.stop()

    runs = load_runs(directory)
    if runs.empty:
        st.warning("No run CSVs found in this directory.")
        st.stop()

    protocols = sorted(runs["protocol"].unique())
    chosen = st.sidebar.multiselect("Protocols", protocols, default=protocols)
    label = st.radio("Metric", list(METRICS), horizontal=True)
    if not chosen:
        st.info("Select at least one protocol.")
        st.stop()

    column = METRICS[label]
    curves = mean_curves(runs[runs["protocol"].isin(chosen)], column)
    seeds = runs.groupby("protocol")["seed"].nunique()
    st.caption(" · ".join(f"{p}: {seeds[p]} seed(s)" for p in chosen))
    st.altair_chart(protocol_chart(curves, column, label), use_container_width=True)

    st.divider()
    if (Path(directory) / "summary.tsv").exists():
        st.subheader("Lifetime summary per run")
        summary = load_summary(directory)
        st.dataframe(summary[summary["protocol"].isin(chosen)], use_container_width=True, hide_index=True)
    else:
        st.caption("(summary.tsv not found)")

    st.download_button(
        label="⬇️ Download averaged curves (CSV)",
        data=curves.to_csv(index=False).encode("utf-8"),
        file_name=f"{column}_by_protocol.csv",
        mime="text/csv",
    )


if __name__ == "__main__":
    main()
