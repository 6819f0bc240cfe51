"""Report emission: per-province tables, gridded fields, and rendered figures.

Formats: ``csv`` (machine-readable, repr floats, lossless at the declared
unit), ``table`` (aligned text for humans), ``geojson`` (one polygon feature
per grid cell).  Mass columns are reported in kilograms; the run record keeps
grams internally.  Unless disabled, the csv/table paths also render matplotlib
figures next to the delimited output.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigError
from .scenario import RunRecord
from .species import SPECIES, SpeciatedMass

FORMATS = ("table", "csv", "geojson")

G_PER_KG = 1000.0


def _kg(grams: float) -> float:
    return grams / G_PER_KG


def _w(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n")


def _emission_rows(record: RunRecord):
    """(province, measure) -> SpeciatedMass, zero-filled over the full province list."""
    out: dict[tuple[str, str], SpeciatedMass] = {}
    for prov in record.provinces:
        for measure in sorted(record.scenario.measures, key=lambda m: m.value):
            out[(prov, measure.value)] = SpeciatedMass()
    for measure in sorted(record.inventory, key=lambda m: m.value):
        for pid in sorted(record.inventory[measure]):
            prov = record.plant_meta[pid][0]
            key = (prov, measure.value)
            out[key] = out.get(key, SpeciatedMass()) + record.inventory[measure][pid]
    return out


def write_csv_report(record: RunRecord, out: Path) -> list[Path]:
    files = []

    rows = ["province,measure,hg0[kg],hg2[kg],hgp[kg],thg[kg]"]
    emissions = _emission_rows(record)
    for (prov, measure), m in sorted(emissions.items()):
        rows.append(
            f"{prov},{measure},{_kg(m.hg0)!r},{_kg(m.hg2)!r},{_kg(m.hgp)!r},{_kg(m.total())!r}"
        )
    path = out / "emission_deltas.csv"
    _w(path, rows)
    files.append(path)

    rows = ["province,hg0[kg],hg2[kg],hgp[kg],thg[kg]"]
    for prov in list(record.provinces) + [
        p for p in sorted(record.deposition_by_province) if p not in record.provinces
    ]:
        m = record.deposition_by_province.get(prov, SpeciatedMass())
        rows.append(
            f"{prov},{_kg(m.hg0)!r},{_kg(m.hg2)!r},{_kg(m.hgp)!r},{_kg(m.total())!r}"
        )
    path = out / "deposition_deltas.csv"
    _w(path, rows)
    files.append(path)

    rows = ["province,delta_edi[ug/kg-bw/day]"]
    for prov in record.provinces:
        rows.append(f"{prov},{record.exposure.edi_delta.get(prov, 0.0)!r}")
    path = out / "edi_deltas.csv"
    _w(path, rows)
    files.append(path)

    rows = ["province,iq_per_foetus[points],iq_total[points],avoided_deaths[deaths/horizon]"]
    for prov in record.provinces:
        rows.append(
            f"{prov},{record.outcome.iq_per_foetus.get(prov, 0.0)!r},"
            f"{record.outcome.iq_total.get(prov, 0.0)!r},"
            f"{record.outcome.avoided_deaths.get(prov, 0.0)!r}"
        )
    rows.append(
        f"NATIONAL,{record.outcome.national_iq_per_foetus!r},"
        f"{record.outcome.total_iq!r},{record.outcome.total_deaths!r}"
    )
    path = out / "health_outcomes.csv"
    _w(path, rows)
    files.append(path)

    rows = [
        "receptor,source,measure,company,capacity_class,"
        "avoided_deaths[deaths/horizon],iq_total[points]"
    ]
    for receptor, source, measure, company, cls, deaths, iq in record.attribution.rows():
        rows.append(f"{receptor},{source},{measure},{company},{cls},{deaths!r},{iq!r}")
    path = out / "attribution.csv"
    _w(path, rows)
    files.append(path)

    rows = ["species,iy,ix,deposited[kg]"]
    by_species = {
        "hg0": record.gridded_deposition["hg0"],
        "hg2": record.gridded_deposition["hg2"] + record.gridded_deposition["hg2_from_hg0"],
        "hgp": record.gridded_deposition["hgp"],
    }
    for species in SPECIES:
        arr = by_species[species]
        for iy in range(record.grid.ny):
            for ix in range(record.grid.nx):
                rows.append(f"{species},{iy},{ix},{_kg(float(arr[iy, ix]))!r}")
    path = out / "deposition_grid.csv"
    _w(path, rows)
    files.append(path)
    return files


def write_table_report(record: RunRecord, out: Path) -> list[Path]:
    lines = [
        f"run {record.run_id} | scenario {record.scenario.scenario_id} | "
        f"measures {' '.join(m.value for m in record.scenario.measures)}",
        "",
        "emission deltas by province and measure (kg, positive = reduction)",
        f"{'province':<10} {'measure':<8} {'hg0':>12} {'hg2':>12} {'hgp':>12} {'thg':>12}",
    ]
    for (prov, measure), m in sorted(_emission_rows(record).items()):
        lines.append(
            f"{prov:<10} {measure:<8} {_kg(m.hg0):>12.6g} {_kg(m.hg2):>12.6g} "
            f"{_kg(m.hgp):>12.6g} {_kg(m.total()):>12.6g}"
        )
    lines += ["", "deposition deltas by province (kg)", f"{'province':<10} {'thg':>12}"]
    for prov in sorted(record.deposition_by_province):
        lines.append(f"{prov:<10} {_kg(record.deposition_by_province[prov].total()):>12.6g}")
    lines += [
        "",
        "health outcomes per province",
        f"{'province':<10} {'iq/foetus':>12} {'iq total':>12} {'deaths':>12}",
    ]
    for prov in record.provinces:
        lines.append(
            f"{prov:<10} {record.outcome.iq_per_foetus.get(prov, 0.0):>12.4g} "
            f"{record.outcome.iq_total.get(prov, 0.0):>12.4g} "
            f"{record.outcome.avoided_deaths.get(prov, 0.0):>12.4g}"
        )
    lines += [
        "",
        f"national: {record.outcome.national_iq_per_foetus:.6g} IQ points per foetus, "
        f"{record.outcome.total_iq:.6g} IQ points total, "
        f"{record.outcome.total_deaths:.6g} avoided deaths per horizon",
        "",
        "top cross-border receivers (avoided deaths received from other provinces)",
    ]
    for prov, val in record.ranking.top_receivers:
        lines.append(f"  {prov:<10} {val:>12.4g}")
    lines.append("top cross-border exporters (avoided deaths delivered to other provinces)")
    for prov, val in record.ranking.top_exporters:
        lines.append(f"  {prov:<10} {val:>12.4g}")
    lines.append("measure shares of national benefit (deaths, iq)")
    for measure, (d_share, iq_share) in sorted(record.ranking.measure_shares.items()):
        lines.append(f"  {measure:<8} {d_share:>8.4f} {iq_share:>8.4f}")
    path = out / "summary.txt"
    _w(path, lines)
    return [path]


def write_geojson_report(record: RunRecord, out: Path) -> list[Path]:
    """One feature per grid cell with deposition properties, nx*ny features."""
    grid = record.grid
    merged_hg2 = record.gridded_deposition["hg2"] + record.gridded_deposition["hg2_from_hg0"]
    features = []
    for iy in range(grid.ny):
        for ix in range(grid.nx):
            corners = [
                grid.cell_corner(ix, iy),
                grid.cell_corner(ix + 1, iy),
                grid.cell_corner(ix + 1, iy + 1),
                grid.cell_corner(ix, iy + 1),
                grid.cell_corner(ix, iy),
            ]
            features.append(
                {
                    "type": "Feature",
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[lon, lat] for lat, lon in corners]],
                    },
                    "properties": {
                        "ix": ix,
                        "iy": iy,
                        "region": grid.region_mask[iy * grid.nx + ix],
                        "hg0_kg": _kg(float(record.gridded_deposition["hg0"][iy, ix])),
                        "hg2_kg": _kg(float(merged_hg2[iy, ix])),
                        "hgp_kg": _kg(float(record.gridded_deposition["hgp"][iy, ix])),
                    },
                }
            )
    path = out / "deposition_grid.geojson"
    path.write_text(
        json.dumps({"type": "FeatureCollection", "features": features}, sort_keys=True)
        + "\n"
    )
    return [path]


def report(record: RunRecord, fmt: str, out_dir, figures: bool = True) -> list[Path]:
    """Write the report files for one run; returns the paths written."""
    if fmt not in FORMATS:
        raise ConfigError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        files = write_csv_report(record, out)
    elif fmt == "table":
        files = write_table_report(record, out)
    else:
        files = write_geojson_report(record, out)
    if figures and fmt != "geojson":
        from .figures import render_figures  # deferred: matplotlib is heavy

        files += render_figures(record, out / "figures")
    return files
