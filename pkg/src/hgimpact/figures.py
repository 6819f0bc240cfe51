"""Figure rendering for the report path.

Uses Figure objects directly (no pyplot state) so headless runs need no
backend configuration.  Mass axes are in kilograms to match the tables.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .scenario import RunRecord

_MEASURE_COLORS = {"APCD": "#4878d0", "PGE": "#ee854a", "SUS": "#6acc64"}


def _save(fig: Figure, path: Path) -> None:
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=150, bbox_inches="tight")


def _emission_by_province_measure(record: RunRecord) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {
        m.value: {p: 0.0 for p in record.provinces} for m in record.scenario.measures
    }
    for measure in record.inventory:
        for pid, mass in record.inventory[measure].items():
            prov = record.plant_meta[pid][0]
            out[measure.value][prov] = out[measure.value].get(prov, 0.0) + mass.total() / 1e3
    return out


def render_figures(record: RunRecord, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []

    # stacked bars: emission reduction by province, split by measure
    fig = Figure(figsize=(7, 4))
    ax = fig.add_subplot(111)
    provinces = list(record.provinces)
    x = np.arange(len(provinces))
    bottom = np.zeros(len(provinces))
    for measure, per_prov in sorted(_emission_by_province_measure(record).items()):
        vals = np.array([per_prov.get(p, 0.0) for p in provinces])
        ax.bar(x, vals, bottom=bottom, label=measure,
               color=_MEASURE_COLORS.get(measure, "#888888"))
        bottom += vals
    ax.set_xticks(x)
    ax.set_xticklabels(provinces, rotation=30, ha="right")
    ax.set_ylabel("avoided Hg emissions [kg]")
    ax.set_title(f"emission reductions by province ({record.scenario.scenario_id})")
    ax.legend(frameon=False)
    path = out / "emission_deltas.png"
    _save(fig, path)
    files.append(path)

    # deposition delta heat map
    fig = Figure(figsize=(6, 5))
    ax = fig.add_subplot(111)
    total = (
        record.gridded_deposition["hg0"]
        + record.gridded_deposition["hg2"]
        + record.gridded_deposition["hg2_from_hg0"]
        + record.gridded_deposition["hgp"]
    ) / 1e3
    im = ax.imshow(total, origin="lower", cmap="viridis")
    fig.colorbar(im, ax=ax, label="avoided deposition [kg/cell]")
    ax.set_xlabel("cell x")
    ax.set_ylabel("cell y")
    ax.set_title("avoided Hg deposition")
    path = out / "deposition_delta_map.png"
    _save(fig, path)
    files.append(path)

    # per-province health outcomes
    fig = Figure(figsize=(7, 4))
    ax1 = fig.add_subplot(121)
    ax2 = fig.add_subplot(122)
    deaths = [record.outcome.avoided_deaths.get(p, 0.0) for p in provinces]
    iq = [record.outcome.iq_total.get(p, 0.0) for p in provinces]
    ax1.barh(provinces, deaths, color="#d65f5f")
    ax1.set_xlabel("avoided deaths")
    ax2.barh(provinces, iq, color="#956cb4")
    ax2.set_xlabel("avoided IQ decrement [points]")
    ax2.set_yticklabels([])
    fig.suptitle("health benefits by receptor province")
    path = out / "health_benefits.png"
    _save(fig, path)
    files.append(path)

    # receptor x source matrix of avoided deaths
    fig = Figure(figsize=(5.5, 5))
    ax = fig.add_subplot(111)
    n = len(provinces)
    mat = np.zeros((n, n))
    index = {p: i for i, p in enumerate(provinces)}
    for (receptor, source, *_), (deaths_v, _) in record.attribution.entries.items():
        if receptor in index and source in index:
            mat[index[receptor], index[source]] += deaths_v
    im = ax.imshow(mat, cmap="RdBu_r", vmin=-abs(mat).max() or -1, vmax=abs(mat).max() or 1)
    fig.colorbar(im, ax=ax, label="avoided deaths")
    ax.set_xticks(range(n))
    ax.set_xticklabels(provinces, rotation=90)
    ax.set_yticks(range(n))
    ax.set_yticklabels(provinces)
    ax.set_xlabel("source province")
    ax.set_ylabel("receptor province")
    ax.set_title("source-receptor health benefits")
    path = out / "source_receptor.png"
    _save(fig, path)
    files.append(path)
    return files
