"""Synthetic demonstration bundle: 5 provinces, 12 plants, 10 food categories,
20x20 grid.

Every number here is made up.  The dataset is shaped to exercise the full
chain: all three retrofit measures, all four capacity classes, an oxidizing
retrofit that raises Hg2+ emissions while cutting the total, cross-border
transport, and a FOREIGN trade share.  Magnitudes are drawn from a seeded
generator and rounded so the files stay readable; the seed only affects data
generation, never the pipeline itself.
"""
from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np

from .ingest import HEADERS, MANIFEST, SCHEMAS
from .transport import KM_PER_DEG_LAT, KM_PER_DEG_LON_EQUATOR

PROVINCES = ("CENTRAL", "EAST", "NORTH", "SOUTH", "WEST")

CATEGORIES = (
    "beef",
    "freshwater_fish",
    "fruit",
    "maize",
    "marine_fish",
    "pork",
    "poultry",
    "rice",
    "vegetables",
    "wheat",
)

# combo -> (removal_eff, share_hg0, share_hg2, share_hgp); SCR+ESP trades a
# higher removal for a strongly oxidized outlet, the retrofit that can raise
# Hg2+ emissions while cutting the total
APCD_COMBOS = {
    "NONE": (0.00, 0.50, 0.46, 0.04),
    "ESP": (0.30, 0.58, 0.40, 0.02),
    "FF": (0.40, 0.70, 0.29, 0.01),
    "ESP+WFGD": (0.62, 0.78, 0.21, 0.01),
    "WFGD+FF": (0.70, 0.80, 0.19, 0.01),
    "SCR+ESP": (0.52, 0.25, 0.72, 0.03),
    "SCR+ESP+WFGD": (0.85, 0.82, 0.16, 0.02),
}

# id, province, company, MW, cell (ix, iy), apcd_t1, apcd_t2, ccr_t1, ccr_t2, status
_PLANTS = (
    ("PLT001", "EAST", "LOCAL", 135.0, (15, 4), "ESP", "ESP", 372.0, 372.0, "decommissioned"),
    ("PLT002", "EAST", "NORTHWIND", 660.0, (16, 8), "ESP", "ESP+WFGD", 318.0, 305.0, "active"),
    ("PLT003", "EAST", "EASTGRID", 1500.0, (14, 11), "ESP+WFGD", "SCR+ESP+WFGD", 330.0, 296.0, "active"),
    ("PLT004", "CENTRAL", "LOCAL", 60.0, (8, 8), "NONE", "NONE", 381.0, 381.0, "decommissioned"),
    ("PLT005", "CENTRAL", "STATEGEN", 350.0, (10, 10), "ESP", "SCR+ESP", 315.0, 315.0, "active"),
    ("PLT006", "CENTRAL", "SUNCOAL", 900.0, (11, 7), "ESP+WFGD", "ESP+WFGD", 312.0, 297.0, "active"),
    ("PLT007", "NORTH", "RIVERPOWER", 180.0, (9, 15), "ESP", "ESP", 365.0, 365.0, "decommissioned"),
    ("PLT008", "NORTH", "NORTHWIND", 1320.0, (14, 16), "ESP", "ESP+WFGD", 309.0, 309.0, "active"),
    ("PLT009", "WEST", "PRIVATE", 450.0, (3, 6), "ESP", "ESP", 340.0, 322.0, "active"),
    ("PLT010", "SOUTH", "LOCAL", 95.0, (9, 3), "ESP", "ESP", 377.0, 377.0, "decommissioned"),
    ("PLT011", "SOUTH", "CAPTIVE", 600.0, (11, 5), "FF", "WFGD+FF", 320.0, 320.0, "active"),
    ("PLT012", "WEST", "STATEGEN", 2000.0, (4, 14), "SCR+ESP+WFGD", "SCR+ESP+WFGD", 298.0, 290.0, "active"),
)

NX = NY = 20
CELL_KM = 50.0
ORIGIN_LAT = 25.0
ORIGIN_LON = 105.0


def _region_of(ix: int, iy: int) -> str:
    """Partition: 1-cell OUTSIDE ring, WEST band, then S/C/N/E blocks."""
    if ix in (0, NX - 1) or iy in (0, NY - 1):
        return "OUTSIDE"
    if ix <= 6:
        return "WEST"
    if iy >= 13:
        return "NORTH"
    if ix >= 13:
        return "EAST"
    if iy <= 6:
        return "SOUTH"
    return "CENTRAL"


def _wind_uv() -> tuple[np.ndarray, np.ndarray]:
    """Smooth prevailing westerlies with a gentle meridional component."""
    u = np.zeros((NY, NX))
    v = np.zeros((NY, NX))
    for iy in range(NY):
        for ix in range(NX):
            u[iy, ix] = round(3.0 + 0.8 * math.sin(2.0 * math.pi * iy / NY)
                              + 0.3 * math.cos(2.0 * math.pi * ix / NX), 4)
            v[iy, ix] = round(0.6 * math.sin(2.0 * math.pi * ix / NX) - 0.2, 4)
    return u, v


def _latlon_of_cell(ix: int, iy: int, jitter: tuple[float, float]) -> tuple[float, float]:
    """Center of the cell plus an in-cell jitter, in degrees."""
    km_lon = KM_PER_DEG_LON_EQUATOR * math.cos(math.radians(ORIGIN_LAT))
    lat = ORIGIN_LAT + (iy + 0.5 + jitter[1]) * CELL_KM / KM_PER_DEG_LAT
    lon = ORIGIN_LON + (ix + 0.5 + jitter[0]) * CELL_KM / km_lon
    return round(lat, 4), round(lon, 4)


def _csv(path: Path, name: str, rows: list[str]) -> None:
    lines = [f"# schema={SCHEMAS[name]}", HEADERS[name], *rows]
    path.write_text("\n".join(lines) + "\n")


def write_demo_bundle(out_dir, seed: int = 42) -> Path:
    """Materialize the bundle under ``out_dir/bundle`` and return that path."""
    rng = np.random.default_rng(seed)
    root = Path(out_dir) / "bundle"
    root.mkdir(parents=True, exist_ok=True)

    # provinces.csv
    rows = []
    province_params = {}
    for pid in PROVINCES:
        a = round(float(rng.uniform(0.15, 0.30)), 3)
        q = round(float(rng.uniform(0.10, 0.50)), 2)
        w = round(float(rng.uniform(0.20, 0.35)), 2)
        r = round(float(rng.uniform(0.95, 1.00)), 3)
        province_params[pid] = (a, q, w, r)
        rows.append(f"{pid},{a},{q},{w},{r}")
    _csv(root / "provinces.csv", "provinces.csv", rows)

    # apcd.csv
    rows = [
        f"{combo},{eta},{f0},{f2},{fp}"
        for combo, (eta, f0, f2, fp) in sorted(APCD_COMBOS.items())
    ]
    _csv(root / "apcd.csv", "apcd.csv", rows)

    # plants.csv
    rows = []
    for pid, prov, company, cap, cell, a1, a2, ccr1, ccr2, status in _PLANTS:
        coal_per_mw = float(rng.uniform(1100.0, 1500.0))
        coal_t1 = round(cap * coal_per_mw, 0)
        if status == "decommissioned":
            coal_t2 = 0.0
            power = 0.0
        else:
            coal_t2 = round(coal_t1 * float(rng.uniform(0.95, 1.15)), 0)
            power = round(coal_t2 * 1.0e6 / ccr2, -3)
        jitter = (float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-0.3, 0.3)))
        lat, lon = _latlon_of_cell(cell[0], cell[1], jitter)
        release = ""
        if pid in ("PLT003", "PLT008"):  # exercise the per-plant override
            release = str(round(float(rng.uniform(0.96, 0.99)), 3))
        rows.append(
            f"{pid},{prov},{company},{cap},{lat},{lon},{coal_t1:.0f},{coal_t2:.0f},"
            f"{power:.0f},{ccr1},{ccr2},{a1},{a2},{release},{status}"
        )
    _csv(root / "plants.csv", "plants.csv", rows)

    # grid.txt
    header = [
        f"# schema={SCHEMAS['grid.txt']}",
        f"nx {NX}",
        f"ny {NY}",
        f"cell_size_km {CELL_KM}",
        f"origin_lat {ORIGIN_LAT}",
        f"origin_lon {ORIGIN_LON}",
        "# region mask, row-major from the south-west corner",
    ]
    mask_rows = [
        " ".join(_region_of(ix, iy) for ix in range(NX)) for iy in range(NY)
    ]
    (root / "grid.txt").write_text("\n".join(header + mask_rows) + "\n")

    # wind.txt
    u, v = _wind_uv()
    lines = [
        f"# schema={SCHEMAS['wind.txt']}",
        f"nx {NX}",
        f"ny {NY}",
        f"cell_size_km {CELL_KM}",
        f"origin_lat {ORIGIN_LAT}",
        f"origin_lon {ORIGIN_LON}",
        "u",
    ]
    lines += [" ".join(repr(float(x)) for x in u[iy]) for iy in range(NY)]
    lines.append("v")
    lines += [" ".join(repr(float(x)) for x in v[iy]) for iy in range(NY)]
    (root / "wind.txt").write_text("\n".join(lines) + "\n")

    # transport.cfg
    (root / "transport.cfg").write_text(
        "\n".join(
            [
                f"# schema={SCHEMAS['transport.cfg']}",
                "# bulk rates for the single-layer surrogate kernel",
                "diffusivity_m2_s = 2000.0",
                "vd_hg0_per_s = 2.0e-7",
                "vd_hg2_per_s = 3.0e-5",
                "vd_hgp_per_s = 2.0e-5",
                "k_ox_per_s = 1.0e-7",
                "dt_s = 3600.0",
                "horizon_s = 5184000.0",
                "# ambient grams per edge cell; zero keeps scenario deltas clean",
                "boundary_inflow_hg0_g = 0.0",
                "boundary_inflow_hg2_g = 0.0",
                "boundary_inflow_hgp_g = 0.0",
            ]
        )
        + "\n"
    )

    # food concentrations, ug/kg
    conc_range = {
        "rice": (1.5, 4.0),
        "wheat": (0.5, 1.5),
        "maize": (0.4, 1.2),
        "vegetables": (0.2, 0.8),
        "fruit": (0.1, 0.5),
        "pork": (0.8, 2.0),
        "poultry": (0.6, 1.8),
        "beef": (0.5, 1.5),
        "freshwater_fish": (20.0, 60.0),
        "marine_fish": (30.0, 90.0),
    }
    rows = []
    for pid in PROVINCES:
        for cat in CATEGORIES:
            lo, hi = conc_range[cat]
            rows.append(f"{pid},{cat},{round(float(rng.uniform(lo, hi)), 3)}")
    _csv(root / "food_concentrations.csv", "food_concentrations.csv", rows)

    # baseline deposition, grams per simulated horizon; large enough that the
    # demo deltas stay a few percent of baseline (keeps log-linear mode near
    # its linearization point)
    rows = [
        f"{pid},{round(float(rng.uniform(1.0e6, 3.0e6)), 0):.0f}" for pid in PROVINCES
    ]
    _csv(root / "deposition_baseline.csv", "deposition_baseline.csv", rows)

    # trade shares; the local residual keeps every column summing to exactly 1
    rows = []
    for cat in CATEGORIES:
        foreign_range = (0.20, 0.35) if cat == "marine_fish" else (0.02, 0.08)
        for consumer in PROVINCES:
            foreign = round(float(rng.uniform(*foreign_range)), 6)
            others = [p for p in PROVINCES if p != consumer]
            raw = rng.uniform(0.05, 0.25, size=len(others))
            other_shares = [round(float(x), 6) for x in raw * (0.35 / raw.sum())]
            local = 1.0 - foreign - sum(other_shares)
            rows.append(f"{cat},{consumer},{consumer},{local!r}")
            for producer, share in zip(others, other_shares):
                rows.append(f"{cat},{producer},{consumer},{share!r}")
            rows.append(f"{cat},FOREIGN,{consumer},{foreign!r}")
    _csv(root / "trade_shares.csv", "trade_shares.csv", rows)

    # intake rates, kg/person/day
    intake_range = {
        "rice": (0.15, 0.35),
        "wheat": (0.10, 0.25),
        "maize": (0.02, 0.10),
        "vegetables": (0.20, 0.40),
        "fruit": (0.10, 0.30),
        "pork": (0.05, 0.15),
        "poultry": (0.02, 0.08),
        "beef": (0.01, 0.05),
        "freshwater_fish": (0.01, 0.06),
        "marine_fish": (0.005, 0.05),
    }
    rows = []
    for pid in PROVINCES:
        for cat in CATEGORIES:
            lo, hi = intake_range[cat]
            rows.append(f"{pid},{cat},{round(float(rng.uniform(lo, hi)), 4)}")
    _csv(root / "intake_rates.csv", "intake_rates.csv", rows)

    # population.csv
    rows = []
    for pid in PROVINCES:
        pop = round(float(rng.uniform(2.0e7, 9.0e7)), -4)
        births = round(pop * float(rng.uniform(0.008, 0.013)), -2)
        mortality = round(pop * float(rng.uniform(5.0e-4, 1.2e-3)), -1)
        bw = round(float(rng.uniform(58.0, 66.0)), 1)
        hair = round(float(rng.uniform(0.3, 0.8)), 3)
        rows.append(f"{pid},{bw},{pop:.0f},{births:.0f},{mortality:.0f},{hair}")
    _csv(root / "population.csv", "population.csv", rows)

    # dose_response.cfg; illustrative coefficients, not endorsed estimates
    (root / "dose_response.cfg").write_text(
        "\n".join(
            [
                f"# schema={SCHEMAS['dose_response.cfg']}",
                "# hair Hg per unit daily intake, (ug/g) per (ug/kg-bw/day)",
                "hair_per_intake = 10.0",
                "# foetal IQ points per ug/g maternal hair Hg",
                "iq_points_per_hair = 0.18",
                "# fatal heart attack risk fraction per ug/g hair; linear or log-linear",
                "cvd_form = linear",
                "cvd_beta_per_hair = 0.066",
            ]
        )
        + "\n"
    )

    # bundle.cfg
    (root / "bundle.cfg").write_text(
        "\n".join(
            [
                f"# schema={SCHEMAS['bundle.cfg']}",
                "epoch_t1 = 2010",
                "epoch_t2 = 2014",
                f"description = synthetic demonstration bundle (seed {seed}); all values invented",
            ]
        )
        + "\n"
    )

    write_manifest(root)
    _write_scenarios(Path(out_dir) / "scenarios")
    return root


def write_manifest(root: Path) -> None:
    """(Re)compute the checksum manifest over every data file in the bundle."""
    entries = []
    for name in sorted(p.name for p in root.iterdir() if p.is_file() and p.name != MANIFEST):
        digest = hashlib.sha256((root / name).read_bytes()).hexdigest()
        entries.append(f"{digest}  {name}")
    (root / MANIFEST).write_text("\n".join(entries) + "\n")


def _write_scenarios(scen_dir: Path) -> None:
    scen_dir.mkdir(parents=True, exist_ok=True)
    common = ["epoch_t1: 2010", "epoch_t2: 2014", ""]
    (scen_dir / "all_measures.txt").write_text(
        "\n".join(
            [
                "scenario: demo-all",
                "measures: SUS APCD PGE",
                *common,
            ]
        )
    )
    for measure in ("SUS", "APCD", "PGE"):
        (scen_dir / f"{measure.lower()}_only.txt").write_text(
            "\n".join(
                [
                    f"scenario: demo-{measure.lower()}",
                    f"measures: {measure}",
                    *common,
                ]
            )
        )
