"""Validated ingestion of a data bundle directory.

A bundle is a directory of plain-text files listed in ``manifest.txt`` with
sha256 checksums.  CSV tables start with a schema line and carry their units
in the column headers; ingestion is total: every malformed input becomes a
structured violation with file and line, never a crash, and validation does
not stop at the first problem.
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import PipelineError
from .exposure import FOREIGN, FoodBaseline, IntakeProfile, TradeShares, TRADE_SHARE_TOL
from .health import CVD_FORMS, DoseResponse
from .inventory import ApcdConfig, Plant, ProvinceParams, Status
from .species import HG0, HG2, HGP
from .transport import GridSpec, TransportParams, OUTSIDE

SPECIATION_TOL = 1e-12

MANIFEST = "manifest.txt"

SCHEMAS = {
    "bundle.cfg": "hgimpact/bundle/v1",
    "provinces.csv": "hgimpact/provinces/v1",
    "apcd.csv": "hgimpact/apcd/v1",
    "plants.csv": "hgimpact/plants/v1",
    "grid.txt": "hgimpact/grid/v1",
    "wind.txt": "hgimpact/wind/v1",
    "transport.cfg": "hgimpact/transport/v1",
    "food_concentrations.csv": "hgimpact/food/v1",
    "deposition_baseline.csv": "hgimpact/deposition-baseline/v1",
    "trade_shares.csv": "hgimpact/trade/v1",
    "intake_rates.csv": "hgimpact/intake/v1",
    "population.csv": "hgimpact/population/v1",
    "dose_response.cfg": "hgimpact/dose-response/v1",
}

HEADERS = {
    "provinces.csv": "province_id,coal_hg[g/t],washed_fraction[1],washing_removal[1],release_ratio_default[1]",
    "apcd.csv": "combo,removal_eff[1],share_hg0[1],share_hg2[1],share_hgp[1]",
    "plants.csv": (
        "plant_id,province_id,company,capacity[MW],lat[deg],lon[deg],coal_t1[t],coal_t2[t],"
        "power_t2[kWh],ccr_t1[g/kWh],ccr_t2[g/kWh],apcd_t1,apcd_t2,release_ratio[1],status"
    ),
    "food_concentrations.csv": "province_id,category,mehg[ug/kg]",
    "deposition_baseline.csv": "province_id,base_deposition[g]",
    "trade_shares.csv": "category,producer,consumer,share[1]",
    "intake_rates.csv": "province_id,category,intake[kg/day]",
    "population.csv": (
        "province_id,body_weight[kg],population[person],births[person/yr],"
        "heart_mortality[deaths/yr],baseline_hair[ug/g]"
    ),
}

TRANSPORT_KEYS = (
    "diffusivity_m2_s",
    "vd_hg0_per_s",
    "vd_hg2_per_s",
    "vd_hgp_per_s",
    "k_ox_per_s",
    "dt_s",
    "horizon_s",
    "boundary_inflow_hg0_g",
    "boundary_inflow_hg2_g",
    "boundary_inflow_hgp_g",
)

DOSE_RESPONSE_KEYS = (
    "hair_per_intake",
    "iq_points_per_hair",
    "cvd_form",
    "cvd_beta_per_hair",
)

BUNDLE_KEYS = ("epoch_t1", "epoch_t2", "description")


@dataclass(frozen=True)
class Violation:
    file: str
    line: int | None
    message: str

    def __str__(self) -> str:
        where = f"{self.file}:{self.line}" if self.line is not None else self.file
        return f"{where}: {self.message}"


class BundleValidationError(PipelineError):
    """Raised when a bundle fails validation; carries the full violation list."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        summary = "; ".join(str(v) for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(f"{len(violations)} validation violation(s): {summary}{more}")


@dataclass
class DataBundle:
    """A fully validated input set, ready for the scenario engine."""

    root: Path
    checksums: dict[str, str]
    epoch_t1: str
    epoch_t2: str
    description: str
    provinces: dict[str, ProvinceParams]
    apcd: dict[str, ApcdConfig]
    plants: dict[str, Plant]
    grid: GridSpec
    transport: TransportParams
    food: FoodBaseline
    trade: TradeShares
    intake: IntakeProfile
    dose_response: DoseResponse
    params_snapshot: dict = dc_field(default_factory=dict)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Collector:
    def __init__(self):
        self.violations: list[Violation] = []

    def add(self, file: str, line: int | None, message: str) -> None:
        self.violations.append(Violation(file, line, message))


def _read_lines(root: Path, name: str, coll: _Collector) -> list[str] | None:
    path = root / name
    if not path.is_file():
        coll.add(name, None, "file missing")
        return None
    try:
        return path.read_text().splitlines()
    except UnicodeDecodeError:
        coll.add(name, None, "file is not valid text")
        return None


def _check_schema(name: str, lines: list[str], coll: _Collector) -> bool:
    expected = f"# schema={SCHEMAS[name]}"
    if not lines or lines[0].strip() != expected:
        coll.add(name, 1, f"missing or wrong schema line; expected {expected!r}")
        return False
    return True


def _read_csv(root: Path, name: str, coll: _Collector) -> list[tuple[int, dict[str, str]]]:
    """Rows as (line_number, column dict); unit-bearing headers must match exactly."""
    lines = _read_lines(root, name, coll)
    if lines is None:
        return []
    if not _check_schema(name, lines, coll):
        return []
    if len(lines) < 2 or lines[1].strip() != HEADERS[name]:
        coll.add(name, 2, f"header/unit mismatch; expected {HEADERS[name]!r}")
        return []
    columns = HEADERS[name].split(",")
    rows: list[tuple[int, dict[str, str]]] = []
    for lineno, raw in enumerate(lines[2:], start=3):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != len(columns):
            coll.add(name, lineno, f"expected {len(columns)} fields, found {len(parts)}")
            continue
        rows.append((lineno, dict(zip(columns, parts))))
    return rows


def _read_cfg(root: Path, name: str, keys: tuple[str, ...], coll: _Collector) -> dict[str, str]:
    """key = value format with comments; all keys required, none unknown."""
    lines = _read_lines(root, name, coll)
    if lines is None:
        return {}
    if not _check_schema(name, lines, coll):
        return {}
    out: dict[str, str] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            coll.add(name, lineno, f"expected 'key = value', got {stripped!r}")
            continue
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in keys:
            coll.add(name, lineno, f"unknown key {key!r}")
            continue
        if key in out:
            coll.add(name, lineno, f"duplicate key {key!r}")
            continue
        out[key] = value
    for key in keys:
        if key not in out:
            coll.add(name, None, f"missing key {key!r}")
    return out


def _float(
    value: str,
    name: str,
    lineno: int | None,
    label: str,
    coll: _Collector,
    lo: float | None = None,
    hi: float | None = None,
) -> float | None:
    try:
        x = float(value)
    except ValueError:
        coll.add(name, lineno, f"{label}: {value!r} is not a number")
        return None
    if not math.isfinite(x):
        coll.add(name, lineno, f"{label}: value must be finite")
        return None
    if lo is not None and x < lo:
        coll.add(name, lineno, f"{label}: {x:g} below minimum {lo:g}")
        return None
    if hi is not None and x > hi:
        coll.add(name, lineno, f"{label}: {x:g} above maximum {hi:g}")
        return None
    return x


def _parse_gridded(root: Path, name: str, coll: _Collector):
    """Shared header parser for grid.txt and wind.txt; returns (header, body, start_line)."""
    lines = _read_lines(root, name, coll)
    if lines is None or not _check_schema(name, lines, coll):
        return None
    header: dict[str, float] = {}
    body_start = None
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped:
            continue
        parts = stripped.split()
        if parts[0] in ("nx", "ny", "cell_size_km", "origin_lat", "origin_lon"):
            val = _float(parts[1], name, lineno, parts[0], coll) if len(parts) == 2 else None
            if len(parts) != 2:
                coll.add(name, lineno, f"malformed header line {stripped!r}")
            elif val is not None:
                header[parts[0]] = val
        else:
            body_start = lineno
            break
    for key in ("nx", "ny", "cell_size_km", "origin_lat", "origin_lon"):
        if key not in header:
            coll.add(name, None, f"missing grid header {key!r}")
            return None
    nx, ny = int(header["nx"]), int(header["ny"])
    if nx < 1 or ny < 1 or nx != header["nx"] or ny != header["ny"]:
        coll.add(name, None, "nx and ny must be positive integers")
        return None
    if body_start is None:
        coll.add(name, None, "missing gridded body")
        return None
    return header, lines, body_start


def _parse_grid(root: Path, coll: _Collector) -> GridSpec | None:
    parsed = _parse_gridded(root, "grid.txt", coll)
    if parsed is None:
        return None
    header, lines, body_start = parsed
    nx, ny = int(header["nx"]), int(header["ny"])
    rows: list[list[str]] = []
    for lineno in range(body_start, len(lines) + 1):
        if lineno - 1 >= len(lines):
            break
        stripped = lines[lineno - 1].strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != nx:
            coll.add("grid.txt", lineno, f"expected {nx} region tokens, found {len(tokens)}")
            return None
        rows.append(tokens)
    if len(rows) != ny:
        coll.add("grid.txt", None, f"expected {ny} mask rows, found {len(rows)}")
        return None
    mask = tuple(tok for row in rows for tok in row)
    try:
        return GridSpec(
            nx=nx,
            ny=ny,
            cell_size_km=header["cell_size_km"],
            origin_lat=header["origin_lat"],
            origin_lon=header["origin_lon"],
            region_mask=mask,
        )
    except ValueError as exc:
        coll.add("grid.txt", None, str(exc))
        return None


def _parse_wind(root: Path, grid: GridSpec | None, coll: _Collector):
    parsed = _parse_gridded(root, "wind.txt", coll)
    if parsed is None:
        return None
    header, lines, body_start = parsed
    nx, ny = int(header["nx"]), int(header["ny"])
    if grid is not None and (nx, ny, header["cell_size_km"], header["origin_lat"], header["origin_lon"]) != (
        grid.nx,
        grid.ny,
        grid.cell_size_km,
        grid.origin_lat,
        grid.origin_lon,
    ):
        coll.add("wind.txt", None, "grid header does not match grid.txt")
        return None
    blocks: dict[str, list[list[float]]] = {}
    current: str | None = None
    for lineno in range(body_start, len(lines) + 1):
        if lineno - 1 >= len(lines):
            break
        stripped = lines[lineno - 1].strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped in ("u", "v"):
            current = stripped
            blocks.setdefault(current, [])
            continue
        if current is None:
            coll.add("wind.txt", lineno, "values before a 'u' or 'v' block label")
            return None
        tokens = stripped.split()
        if len(tokens) != nx:
            coll.add("wind.txt", lineno, f"expected {nx} values, found {len(tokens)}")
            return None
        row: list[float] = []
        for tok in tokens:
            val = _float(tok, "wind.txt", lineno, "wind", coll)
            if val is None:
                return None
            row.append(val)
        blocks[current].append(row)
    for label in ("u", "v"):
        if label not in blocks or len(blocks[label]) != ny:
            coll.add("wind.txt", None, f"block {label!r} must have exactly {ny} rows")
            return None
    return np.array(blocks["u"]), np.array(blocks["v"])


def _validate_manifest(root: Path, coll: _Collector) -> dict[str, str]:
    checksums: dict[str, str] = {}
    path = root / MANIFEST
    if not path.is_file():
        coll.add(MANIFEST, None, "manifest missing")
        return checksums
    listed: set[str] = set()
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            coll.add(MANIFEST, lineno, f"expected '<sha256>  <file>', got {stripped!r}")
            continue
        digest, name = parts
        listed.add(name)
        target = root / name
        if not target.is_file():
            coll.add(MANIFEST, lineno, f"listed file {name!r} missing from bundle")
            continue
        actual = _sha256(target)
        checksums[name] = actual
        if actual != digest:
            coll.add(name, None, "checksum does not match the manifest")
    for name in sorted(SCHEMAS):
        if name not in listed:
            coll.add(MANIFEST, None, f"required file {name!r} not listed")
    for entry in sorted(os.listdir(root)):
        if entry == MANIFEST or not (root / entry).is_file():
            continue
        if entry not in listed:
            coll.add(MANIFEST, None, f"file {entry!r} present but not listed")
    return checksums


def ingest(path) -> DataBundle:
    """Parse and fully validate a bundle directory.

    Raises BundleValidationError with the complete violation list on any
    problem; partial failures never abort the remaining checks.
    """
    root = Path(path)
    coll = _Collector()
    if not root.is_dir():
        coll.add(str(path), None, "bundle directory does not exist")
        raise BundleValidationError(coll.violations)

    checksums = _validate_manifest(root, coll)

    bundle_cfg = _read_cfg(root, "bundle.cfg", BUNDLE_KEYS, coll)
    epoch_t1 = bundle_cfg.get("epoch_t1", "")
    epoch_t2 = bundle_cfg.get("epoch_t2", "")
    if epoch_t1 and epoch_t2 and not _epoch_precedes(epoch_t1, epoch_t2):
        coll.add("bundle.cfg", None, f"epoch_t1 {epoch_t1!r} must strictly precede epoch_t2 {epoch_t2!r}")

    # --- provinces ---
    provinces: dict[str, ProvinceParams] = {}
    for lineno, row in _read_csv(root, "provinces.csv", coll):
        pid = row["province_id"]
        if pid in provinces:
            coll.add("provinces.csv", lineno, f"duplicate province {pid!r}")
            continue
        a = _float(row["coal_hg[g/t]"], "provinces.csv", lineno, "coal_hg", coll, lo=0.0)
        q = _float(row["washed_fraction[1]"], "provinces.csv", lineno, "washed_fraction", coll, 0.0, 1.0)
        w = _float(row["washing_removal[1]"], "provinces.csv", lineno, "washing_removal", coll, 0.0, 1.0)
        r = _float(row["release_ratio_default[1]"], "provinces.csv", lineno, "release_ratio_default", coll, 0.0, 1.0)
        if None not in (a, q, w, r):
            provinces[pid] = ProvinceParams(pid, a, q, w, r)

    # --- APCD combos ---
    apcd: dict[str, ApcdConfig] = {}
    for lineno, row in _read_csv(root, "apcd.csv", coll):
        combo = row["combo"]
        if combo in apcd:
            coll.add("apcd.csv", lineno, f"duplicate combo {combo!r}")
            continue
        eta = _float(row["removal_eff[1]"], "apcd.csv", lineno, "removal_eff", coll, 0.0, 1.0)
        shares = [
            _float(row[c], "apcd.csv", lineno, c, coll, lo=0.0)
            for c in ("share_hg0[1]", "share_hg2[1]", "share_hgp[1]")
        ]
        if eta is None or any(s is None for s in shares):
            continue
        if abs(sum(shares) - 1.0) > SPECIATION_TOL:
            coll.add(
                "apcd.csv",
                lineno,
                f"combo {combo!r}: speciation shares sum to {sum(shares)!r}, not 1",
            )
            continue
        apcd[combo] = ApcdConfig(combo, eta, (shares[0], shares[1], shares[2]))

    # --- plants ---
    plants: dict[str, Plant] = {}
    for lineno, row in _read_csv(root, "plants.csv", coll):
        pid = row["plant_id"]
        if pid in plants:
            coll.add("plants.csv", lineno, f"duplicate plant_id {pid!r}")
            continue
        if row["province_id"] not in provinces:
            coll.add("plants.csv", lineno, f"plant {pid!r}: unknown province {row['province_id']!r}")
            continue
        bad = False
        combos: list[ApcdConfig] = []
        for col in ("apcd_t1", "apcd_t2"):
            if row[col] not in apcd:
                coll.add("plants.csv", lineno, f"plant {pid!r}: unknown APCD combo {row[col]!r}")
                bad = True
            else:
                combos.append(apcd[row[col]])
        try:
            status = Status(row["status"])
        except ValueError:
            coll.add("plants.csv", lineno, f"plant {pid!r}: unknown status {row['status']!r}")
            bad = True
        cap = _float(row["capacity[MW]"], "plants.csv", lineno, "capacity", coll)
        if cap is not None and cap <= 0.0:
            coll.add("plants.csv", lineno, f"plant {pid!r}: capacity must be positive")
            bad = True
        lat = _float(row["lat[deg]"], "plants.csv", lineno, "lat", coll, -90.0, 90.0)
        lon = _float(row["lon[deg]"], "plants.csv", lineno, "lon", coll, -180.0, 360.0)
        coal1 = _float(row["coal_t1[t]"], "plants.csv", lineno, "coal_t1", coll, lo=0.0)
        coal2 = _float(row["coal_t2[t]"], "plants.csv", lineno, "coal_t2", coll, lo=0.0)
        power = _float(row["power_t2[kWh]"], "plants.csv", lineno, "power_t2", coll, lo=0.0)
        ccr1 = _float(row["ccr_t1[g/kWh]"], "plants.csv", lineno, "ccr_t1", coll)
        ccr2 = _float(row["ccr_t2[g/kWh]"], "plants.csv", lineno, "ccr_t2", coll)
        for label, ccr in (("ccr_t1", ccr1), ("ccr_t2", ccr2)):
            if ccr is not None and ccr <= 0.0:
                coll.add("plants.csv", lineno, f"plant {pid!r}: {label} must be positive")
                bad = True
        release: float | None = None
        if row["release_ratio[1]"]:
            release = _float(row["release_ratio[1]"], "plants.csv", lineno, "release_ratio", coll, 0.0, 1.0)
            if release is None:
                bad = True
        if bad or None in (cap, lat, lon, coal1, coal2, power, ccr1, ccr2) or len(combos) != 2:
            continue
        plants[pid] = Plant(
            plant_id=pid,
            province_id=row["province_id"],
            company=row["company"],
            capacity_mw=cap,
            lat=lat,
            lon=lon,
            coal_t1_tons=coal1,
            coal_t2_tons=coal2,
            power_t2_kwh=power,
            ccr_t1_g_per_kwh=ccr1,
            ccr_t2_g_per_kwh=ccr2,
            apcd_t1=combos[0],
            apcd_t2=combos[1],
            status=status,
            release_ratio=release,
        )

    # --- grid and wind ---
    grid = _parse_grid(root, coll)
    wind = _parse_wind(root, grid, coll)
    if grid is not None:
        unknown = sorted({r for r in grid.region_mask if r != OUTSIDE and r not in provinces})
        for region in unknown:
            coll.add("grid.txt", None, f"mask references unknown province {region!r}")
        for pid in sorted(plants):
            plant = plants[pid]
            if grid.cell_of(plant.lat, plant.lon) is None:
                coll.add(
                    "plants.csv",
                    None,
                    f"plant {pid!r} at ({plant.lat:.4f}, {plant.lon:.4f}) lies outside the grid",
                )

    # --- transport params ---
    transport: TransportParams | None = None
    tcfg = _read_cfg(root, "transport.cfg", TRANSPORT_KEYS, coll)
    if tcfg and len(tcfg) == len(TRANSPORT_KEYS) and wind is not None:
        transport = _build_transport(tcfg, wind[0], wind[1], "transport.cfg", coll)

    # --- food baseline ---
    concentrations: dict[tuple[str, str], float] = {}
    categories: set[str] = set()
    for lineno, row in _read_csv(root, "food_concentrations.csv", coll):
        key = (row["province_id"], row["category"])
        if key in concentrations:
            coll.add("food_concentrations.csv", lineno, f"duplicate entry {key}")
            continue
        if provinces and row["province_id"] not in provinces:
            coll.add("food_concentrations.csv", lineno, f"unknown province {row['province_id']!r}")
            continue
        conc = _float(row["mehg[ug/kg]"], "food_concentrations.csv", lineno, "mehg", coll, lo=0.0)
        if conc is None:
            continue
        concentrations[key] = conc
        categories.add(row["category"])

    base_dep: dict[str, float] = {}
    for lineno, row in _read_csv(root, "deposition_baseline.csv", coll):
        pid = row["province_id"]
        if pid in base_dep:
            coll.add("deposition_baseline.csv", lineno, f"duplicate province {pid!r}")
            continue
        if provinces and pid not in provinces:
            coll.add("deposition_baseline.csv", lineno, f"unknown province {pid!r}")
            continue
        val = _float(row["base_deposition[g]"], "deposition_baseline.csv", lineno, "base_deposition", coll, lo=0.0)
        if val is not None:
            base_dep[pid] = val

    sorted_categories = tuple(sorted(categories))
    sorted_provinces = tuple(sorted(provinces))
    for pid in sorted_provinces:
        if pid not in base_dep:
            coll.add("deposition_baseline.csv", None, f"province {pid!r} missing")
        elif base_dep[pid] <= 0.0 and any(
            concentrations.get((pid, c), 0.0) > 0.0 for c in sorted_categories
        ):
            coll.add(
                "deposition_baseline.csv",
                None,
                f"province {pid!r}: zero baseline deposition with nonzero food concentrations",
            )
        for cat in sorted_categories:
            if (pid, cat) not in concentrations:
                coll.add(
                    "food_concentrations.csv", None, f"missing entry for ({pid!r}, {cat!r})"
                )

    # --- trade shares ---
    shares: dict[tuple[str, str, str], float] = {}
    for lineno, row in _read_csv(root, "trade_shares.csv", coll):
        cat, producer, consumer = row["category"], row["producer"], row["consumer"]
        key = (cat, producer, consumer)
        if key in shares:
            coll.add("trade_shares.csv", lineno, f"duplicate entry {key}")
            continue
        if sorted_categories and cat not in sorted_categories:
            coll.add("trade_shares.csv", lineno, f"unknown category {cat!r}")
            continue
        if provinces and producer != FOREIGN and producer not in provinces:
            coll.add("trade_shares.csv", lineno, f"unknown producer {producer!r}")
            continue
        if provinces and consumer not in provinces:
            coll.add("trade_shares.csv", lineno, f"unknown consumer {consumer!r}")
            continue
        share = _float(row["share[1]"], "trade_shares.csv", lineno, "share", coll, lo=0.0)
        if share is not None:
            shares[key] = share
    producers = tuple(sorted({p for (_, p, _) in shares}))
    for consumer in sorted_provinces:
        for cat in sorted_categories:
            total = sum(shares.get((cat, p, consumer), 0.0) for p in producers)
            if abs(total - 1.0) > TRADE_SHARE_TOL:
                coll.add(
                    "trade_shares.csv",
                    None,
                    f"shares for consumer {consumer!r}, category {cat!r} sum to {total!r}, not 1",
                )

    # --- intake and demographics ---
    intake_rates: dict[tuple[str, str], float] = {}
    for lineno, row in _read_csv(root, "intake_rates.csv", coll):
        key = (row["province_id"], row["category"])
        if key in intake_rates:
            coll.add("intake_rates.csv", lineno, f"duplicate entry {key}")
            continue
        if provinces and row["province_id"] not in provinces:
            coll.add("intake_rates.csv", lineno, f"unknown province {row['province_id']!r}")
            continue
        if sorted_categories and row["category"] not in sorted_categories:
            coll.add("intake_rates.csv", lineno, f"unknown category {row['category']!r}")
            continue
        rate = _float(row["intake[kg/day]"], "intake_rates.csv", lineno, "intake", coll, lo=0.0)
        if rate is not None:
            intake_rates[key] = rate
    for pid in sorted_provinces:
        for cat in sorted_categories:
            if (pid, cat) not in intake_rates:
                coll.add("intake_rates.csv", None, f"missing entry for ({pid!r}, {cat!r})")

    body_weight: dict[str, float] = {}
    population: dict[str, float] = {}
    births: dict[str, float] = {}
    mortality: dict[str, float] = {}
    hair: dict[str, float] = {}
    for lineno, row in _read_csv(root, "population.csv", coll):
        pid = row["province_id"]
        if pid in body_weight:
            coll.add("population.csv", lineno, f"duplicate province {pid!r}")
            continue
        if provinces and pid not in provinces:
            coll.add("population.csv", lineno, f"unknown province {pid!r}")
            continue
        bw = _float(row["body_weight[kg]"], "population.csv", lineno, "body_weight", coll, lo=1e-9)
        pop = _float(row["population[person]"], "population.csv", lineno, "population", coll, lo=0.0)
        brt = _float(row["births[person/yr]"], "population.csv", lineno, "births", coll, lo=0.0)
        mort = _float(row["heart_mortality[deaths/yr]"], "population.csv", lineno, "heart_mortality", coll, lo=0.0)
        hr = _float(row["baseline_hair[ug/g]"], "population.csv", lineno, "baseline_hair", coll, lo=0.0)
        if None in (bw, pop, brt, mort, hr):
            continue
        body_weight[pid] = bw
        population[pid] = pop
        births[pid] = brt
        mortality[pid] = mort
        hair[pid] = hr
    for pid in sorted_provinces:
        if pid not in body_weight:
            coll.add("population.csv", None, f"province {pid!r} missing")

    # --- dose response ---
    dr: DoseResponse | None = None
    dcfg = _read_cfg(root, "dose_response.cfg", DOSE_RESPONSE_KEYS, coll)
    if dcfg and len(dcfg) == len(DOSE_RESPONSE_KEYS):
        k = _float(dcfg["hair_per_intake"], "dose_response.cfg", None, "hair_per_intake", coll, lo=0.0)
        gamma = _float(dcfg["iq_points_per_hair"], "dose_response.cfg", None, "iq_points_per_hair", coll, lo=0.0)
        beta = _float(dcfg["cvd_beta_per_hair"], "dose_response.cfg", None, "cvd_beta_per_hair", coll, lo=0.0)
        form = dcfg["cvd_form"]
        if form not in CVD_FORMS:
            coll.add("dose_response.cfg", None, f"unknown cvd_form {form!r}; expected one of {CVD_FORMS}")
        elif None not in (k, gamma, beta):
            dr = DoseResponse(
                hair_per_intake=k,
                iq_points_per_hair=gamma,
                cvd_form=form,
                cvd_beta_per_hair=beta,
                baseline_mortality=mortality,
                baseline_hair=hair,
            )

    if coll.violations:
        coll.violations.sort(key=lambda v: (v.file, v.line if v.line is not None else 0, v.message))
        raise BundleValidationError(coll.violations)

    assert grid is not None and transport is not None and dr is not None
    return DataBundle(
        root=root,
        checksums=checksums,
        epoch_t1=epoch_t1,
        epoch_t2=epoch_t2,
        description=bundle_cfg.get("description", ""),
        provinces=dict(sorted(provinces.items())),
        apcd=dict(sorted(apcd.items())),
        plants=dict(sorted(plants.items())),
        grid=grid,
        transport=transport,
        food=FoodBaseline(
            concentrations=concentrations,
            base_deposition_g=base_dep,
            provinces=sorted_provinces,
            categories=sorted_categories,
        ),
        trade=TradeShares(
            shares=shares,
            categories=sorted_categories,
            producers=producers,
            consumers=sorted_provinces,
        ),
        intake=IntakeProfile(
            intake_kg_day=intake_rates,
            body_weight_kg=body_weight,
            population=population,
            births_per_yr=births,
        ),
        dose_response=dr,
        params_snapshot={"transport": dict(tcfg), "dose_response": dict(dcfg), "bundle": dict(bundle_cfg)},
    )


def validate_bundle(path) -> list[Violation]:
    """Run ingestion for its checks only; empty list means the bundle is valid."""
    try:
        ingest(path)
    except BundleValidationError as exc:
        return exc.violations
    return []


def _build_transport(
    cfg: dict[str, str],
    wind_u: np.ndarray,
    wind_v: np.ndarray,
    filename: str,
    coll: _Collector,
) -> TransportParams | None:
    vals: dict[str, float] = {}
    for key in TRANSPORT_KEYS:
        lo = 1e-9 if key in ("dt_s", "horizon_s") else 0.0
        v = _float(cfg[key], filename, None, key, coll, lo=lo)
        if v is None:
            return None
        vals[key] = v
    return TransportParams(
        wind_u=wind_u,
        wind_v=wind_v,
        diffusivity_m2_s=vals["diffusivity_m2_s"],
        vd_per_s={HG0: vals["vd_hg0_per_s"], HG2: vals["vd_hg2_per_s"], HGP: vals["vd_hgp_per_s"]},
        k_ox_per_s=vals["k_ox_per_s"],
        dt_s=vals["dt_s"],
        horizon_s=vals["horizon_s"],
        boundary_inflow_g={
            HG0: vals["boundary_inflow_hg0_g"],
            HG2: vals["boundary_inflow_hg2_g"],
            HGP: vals["boundary_inflow_hgp_g"],
        },
    )


def read_transport_params(path, wind_u: np.ndarray, wind_v: np.ndarray) -> TransportParams:
    """Parse a standalone transport parameter file against existing wind fields.

    Raises BundleValidationError with the violation list on any problem.
    """
    p = Path(path)
    coll = _Collector()
    cfg = _read_cfg(p.parent, p.name, TRANSPORT_KEYS, coll)
    params = None
    if cfg and len(cfg) == len(TRANSPORT_KEYS):
        params = _build_transport(cfg, wind_u, wind_v, p.name, coll)
    if coll.violations or params is None:
        raise BundleValidationError(coll.violations)
    return params


def _epoch_precedes(t1: str, t2: str) -> bool:
    try:
        return int(t1) < int(t2)
    except ValueError:
        return t1 < t2
