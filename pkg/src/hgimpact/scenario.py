"""Scenario definition, pipeline orchestration, and run persistence.

A run executes inventory -> rasterize -> source-receptor apply -> province
aggregation -> food -> trade -> intake -> endpoints -> attribution, persists
every stage, and is deterministic: the same bundle and scenario produce
byte-identical output directories.  Run directories are content-addressed by
the bundle checksums plus the scenario and parameter snapshot.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, StageError
from .exposure import ExposureState, exposure_chain
from .health import (
    AttributionTensor,
    HealthOutcome,
    RankReport,
    attribute,
    group_inventory,
    health_outcome,
    rank_report,
)
from .ingest import DataBundle
from .inventory import Measure, build_inventory, capacity_class
from .species import SPECIES, SpeciatedMass
from .transport import (
    GridSpec,
    OUTSIDE,
    POOLS,
    aggregate_to_provinces,
    build_srm,
    rasterize_emissions,
)

_RECORD_SCHEMA = "hgimpact/record/v1"


@dataclass(frozen=True)
class Scenario:
    """Which measures apply to which plants, between which epochs."""

    scenario_id: str
    measures: tuple[Measure, ...]
    epoch_t1: str
    epoch_t2: str
    provinces: tuple[str, ...] | None = None
    companies: tuple[str, ...] | None = None
    capacity_classes: tuple[str, ...] | None = None
    plant_ids: tuple[str, ...] | None = None
    notes: str = ""

    def canonical(self) -> str:
        """Stable serialization used for content addressing and persistence."""
        parts = [
            f"scenario: {self.scenario_id}",
            "measures: " + " ".join(m.value for m in self.measures),
            f"epoch_t1: {self.epoch_t1}",
            f"epoch_t2: {self.epoch_t2}",
        ]
        for label, values in (
            ("filter_province", self.provinces),
            ("filter_company", self.companies),
            ("filter_capacity_class", self.capacity_classes),
            ("filter_plant", self.plant_ids),
        ):
            if values is not None:
                parts.append(f"{label}: " + " ".join(values))
        if self.notes:
            parts.append(f"notes: {self.notes}")
        return "\n".join(parts) + "\n"


_FILTER_KEYS = {
    "filter_province": "provinces",
    "filter_company": "companies",
    "filter_capacity_class": "capacity_classes",
    "filter_plant": "plant_ids",
}


def _epoch_precedes(t1: str, t2: str) -> bool:
    try:
        return int(t1) < int(t2)
    except ValueError:
        return t1 < t2


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse the declarative ``key: value`` scenario format.

    Filter clauses are repeatable and accumulate; values on one line are
    whitespace-separated.
    """
    fields: dict[str, object] = {"notes": ""}
    filters: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key: value', got {stripped!r}")
        key, _, value = stripped.partition(":")
        key, value = key.strip(), value.strip()
        if key == "scenario":
            fields["scenario_id"] = value
        elif key == "measures":
            try:
                fields["measures"] = tuple(Measure(tok) for tok in value.split())
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from exc
        elif key in ("epoch_t1", "epoch_t2"):
            fields[key] = value
        elif key == "notes":
            fields["notes"] = value
        elif key in _FILTER_KEYS:
            filters.setdefault(_FILTER_KEYS[key], []).extend(value.split())
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    for required in ("scenario_id", "measures", "epoch_t1", "epoch_t2"):
        if required not in fields:
            raise ConfigError(f"{source}: missing required key for {required!r}")
    if not fields["measures"]:
        raise ConfigError(f"{source}: measure set must not be empty")
    if not _epoch_precedes(fields["epoch_t1"], fields["epoch_t2"]):
        raise ConfigError(
            f"{source}: epoch_t1 {fields['epoch_t1']!r} must strictly precede "
            f"epoch_t2 {fields['epoch_t2']!r}"
        )
    return Scenario(
        scenario_id=fields["scenario_id"],
        measures=fields["measures"],
        epoch_t1=fields["epoch_t1"],
        epoch_t2=fields["epoch_t2"],
        notes=fields["notes"],
        **{k: tuple(v) for k, v in filters.items()},
    )


def parse_scenario_file(path) -> Scenario:
    return parse_scenario(Path(path).read_text(), source=str(path))


def select_plants(scenario: Scenario, plants: dict) -> dict:
    """Apply the scenario filter; criteria AND together, values within OR."""
    out = {}
    for pid in sorted(plants):
        plant = plants[pid]
        if scenario.provinces is not None and plant.province_id not in scenario.provinces:
            continue
        if scenario.companies is not None and plant.company not in scenario.companies:
            continue
        if (
            scenario.capacity_classes is not None
            and capacity_class(plant.capacity_mw) not in scenario.capacity_classes
        ):
            continue
        if scenario.plant_ids is not None and pid not in scenario.plant_ids:
            continue
        out[pid] = plant
    return out


@dataclass
class RunRecord:
    """Every stage output of one scenario execution, immutable once produced."""

    run_id: str
    scenario: Scenario
    bundle_checksums: dict[str, str]
    params_snapshot: dict
    grid: GridSpec
    provinces: tuple[str, ...]
    inventory: dict[Measure, dict[str, SpeciatedMass]]
    plant_meta: dict[str, tuple[str, str, str]]  # plant -> (province, company, class)
    gridded_deposition: dict[str, np.ndarray]  # pool -> (ny, nx) grams
    deposition_by_province: dict[str, SpeciatedMass]
    transport_ledger: dict[str, dict[str, float]]
    exposure: ExposureState
    outcome: HealthOutcome
    attribution: AttributionTensor
    ranking: RankReport | None = field(repr=False, default=None)


def _stage(name: str):
    """Decorator-free stage guard: re-raise anything as StageError(name)."""
    class _Guard:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, StageError):
                raise StageError(name, exc) from exc
            return False

    return _Guard()


def _run_id(bundle: DataBundle, scenario: Scenario) -> str:
    h = hashlib.sha256()
    for name in sorted(bundle.checksums):
        h.update(f"{name}:{bundle.checksums[name]}\n".encode())
    h.update(scenario.canonical().encode())
    h.update(json.dumps(bundle.params_snapshot, sort_keys=True).encode())
    return h.hexdigest()[:16]


def run(scenario: Scenario, bundle: DataBundle) -> RunRecord:
    """Execute the full chain for one scenario over a validated bundle."""
    if (scenario.epoch_t1, scenario.epoch_t2) != (bundle.epoch_t1, bundle.epoch_t2):
        raise ConfigError(
            f"scenario epochs ({scenario.epoch_t1}, {scenario.epoch_t2}) do not match "
            f"bundle epochs ({bundle.epoch_t1}, {bundle.epoch_t2})"
        )
    grid = bundle.grid
    selected = select_plants(scenario, bundle.plants)

    with _stage("inventory"):
        inventory: dict[Measure, dict[str, SpeciatedMass]] = {}
        for measure in sorted(scenario.measures, key=lambda m: m.value):
            inventory[measure] = build_inventory(
                [selected[p] for p in sorted(selected)], bundle.provinces, measure
            )

    merged: dict[str, SpeciatedMass] = {}
    for measure in sorted(inventory, key=lambda m: m.value):
        for pid in sorted(inventory[measure]):
            merged[pid] = merged.get(pid, SpeciatedMass()) + inventory[measure][pid]

    with _stage("rasterize"):
        fields = rasterize_emissions(merged, bundle.plants, grid)

    with _stage("source-receptor"):
        sources = sorted(
            {
                grid.flat(*grid.cell_of(bundle.plants[pid].lat, bundle.plants[pid].lon))
                for pid in merged
            }
        )
        srm = build_srm(bundle.transport, grid, sources)

    with _stage("transport"):
        dep = srm.apply(fields, grid)

    with _stage("aggregate"):
        by_province = aggregate_to_provinces(dep, grid)
        thg_delta = {p: m.total() for p, m in by_province.items() if p != OUTSIDE}

    with _stage("exposure"):
        state = exposure_chain(thg_delta, bundle.food, bundle.trade, bundle.intake)

    with _stage("endpoints"):
        outcome = health_outcome(state.edi_delta, bundle.dose_response, bundle.intake)

    with _stage("attribution"):
        groups = group_inventory(inventory, bundle.plants)
        tensor = attribute(
            srm,
            groups,
            inventory,
            bundle.plants,
            grid,
            bundle.food,
            bundle.trade,
            bundle.intake,
            bundle.dose_response,
        )
        ranking = rank_report(tensor)

    ledger = {
        "exported": dict(dep.exported),
        "airborne_residual": dict(dep.airborne_residual),
        "inflow": dict(dep.inflow),
        "emitted": dict(dep.emitted),
        "oxidized_transfer": {"hg0": dep.oxidized_transfer},
    }
    plant_meta = {
        pid: (
            bundle.plants[pid].province_id,
            bundle.plants[pid].company,
            capacity_class(bundle.plants[pid].capacity_mw),
        )
        for pid in sorted(merged)
    }
    return RunRecord(
        run_id=_run_id(bundle, scenario),
        scenario=scenario,
        bundle_checksums=dict(sorted(bundle.checksums.items())),
        params_snapshot=bundle.params_snapshot,
        grid=grid,
        provinces=bundle.food.provinces,
        inventory=inventory,
        plant_meta=plant_meta,
        gridded_deposition=dep.deposited,
        deposition_by_province=by_province,
        transport_ledger=ledger,
        exposure=state,
        outcome=outcome,
        attribution=tensor,
        ranking=ranking,
    )


# --- persistence ----------------------------------------------------------------


def _w(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n")


def save_record(record: RunRecord, out_root) -> Path:
    """Persist under ``out_root/<run_id>/``; rewriting is byte-identical."""
    out = Path(out_root) / record.run_id
    out.mkdir(parents=True, exist_ok=True)

    meta = {
        "schema": _RECORD_SCHEMA,
        "run_id": record.run_id,
        "scenario": record.scenario.canonical(),
        "bundle_checksums": record.bundle_checksums,
        "params_snapshot": record.params_snapshot,
        "grid": {
            "nx": record.grid.nx,
            "ny": record.grid.ny,
            "cell_size_km": record.grid.cell_size_km,
            "origin_lat": record.grid.origin_lat,
            "origin_lon": record.grid.origin_lon,
            "region_mask": list(record.grid.region_mask),
        },
        "provinces": list(record.provinces),
        "plant_meta": {p: list(v) for p, v in sorted(record.plant_meta.items())},
        "transport_ledger": record.transport_ledger,
        "attribution_mode": record.attribution.mode,
        "deaths_residual": dict(sorted(record.attribution.deaths_residual.items())),
        "national": {
            "iq_per_foetus": record.outcome.national_iq_per_foetus,
            "iq_total": record.outcome.total_iq,
            "avoided_deaths": record.outcome.total_deaths,
        },
        "ranking": {
            "top_receivers": record.ranking.top_receivers,
            "top_exporters": record.ranking.top_exporters,
            "measure_shares": record.ranking.measure_shares,
        },
    }
    (out / "record.json").write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")

    rows = ["measure,plant_id,hg0[g],hg2[g],hgp[g]"]
    for measure in sorted(record.inventory, key=lambda m: m.value):
        for pid in sorted(record.inventory[measure]):
            m = record.inventory[measure][pid]
            rows.append(f"{measure.value},{pid},{m.hg0!r},{m.hg2!r},{m.hgp!r}")
    _w(out / "inventory.csv", rows)

    rows = ["province,hg0[g],hg2[g],hgp[g]"]
    for prov in sorted(record.deposition_by_province):
        m = record.deposition_by_province[prov]
        rows.append(f"{prov},{m.hg0!r},{m.hg2!r},{m.hgp!r}")
    _w(out / "deposition_provinces.csv", rows)

    rows = ["pool,iy,ix,deposited[g]"]
    for pool in POOLS:
        arr = record.gridded_deposition[pool]
        for iy in range(record.grid.ny):
            for ix in range(record.grid.nx):
                rows.append(f"{pool},{iy},{ix},{float(arr[iy, ix])!r}")
    _w(out / "deposition_grid.csv", rows)

    rows = ["province,category,producer_delta[ug/kg],consumed_delta[ug/kg]"]
    for key in sorted(record.exposure.consumed_delta):
        prov, cat = key
        rows.append(
            f"{prov},{cat},{record.exposure.producer_delta.get(key, 0.0)!r},"
            f"{record.exposure.consumed_delta[key]!r}"
        )
    _w(out / "food_deltas.csv", rows)

    rows = ["province,delta_edi[ug/kg-bw/day]"]
    for prov in sorted(record.exposure.edi_delta):
        rows.append(f"{prov},{record.exposure.edi_delta[prov]!r}")
    _w(out / "edi.csv", rows)

    rows = ["province,iq_per_foetus[points],iq_total[points],avoided_deaths[deaths/horizon]"]
    for prov in sorted(record.outcome.iq_per_foetus):
        rows.append(
            f"{prov},{record.outcome.iq_per_foetus[prov]!r},"
            f"{record.outcome.iq_total[prov]!r},{record.outcome.avoided_deaths[prov]!r}"
        )
    _w(out / "outcomes.csv", rows)

    rows = [
        "receptor,source,measure,company,capacity_class,"
        "avoided_deaths[deaths/horizon],iq_total[points]"
    ]
    for receptor, source, measure, company, cls, deaths, iq in record.attribution.rows():
        rows.append(f"{receptor},{source},{measure},{company},{cls},{deaths!r},{iq!r}")
    _w(out / "attribution.csv", rows)
    return out


def _read_table(path: Path) -> list[list[str]]:
    lines = path.read_text().splitlines()
    return [line.split(",") for line in lines[1:] if line]


def load_record(run_dir) -> RunRecord:
    """Rehydrate a persisted record; inverse of save_record."""
    out = Path(run_dir)
    meta = json.loads((out / "record.json").read_text())
    if meta.get("schema") != _RECORD_SCHEMA:
        raise ConfigError(f"{run_dir}: not a run record directory")
    scenario = parse_scenario(meta["scenario"], source=f"{run_dir}/record.json")
    grid = GridSpec(
        nx=meta["grid"]["nx"],
        ny=meta["grid"]["ny"],
        cell_size_km=meta["grid"]["cell_size_km"],
        origin_lat=meta["grid"]["origin_lat"],
        origin_lon=meta["grid"]["origin_lon"],
        region_mask=tuple(meta["grid"]["region_mask"]),
    )

    inventory: dict[Measure, dict[str, SpeciatedMass]] = {m: {} for m in scenario.measures}
    for measure_s, pid, hg0, hg2, hgp in _read_table(out / "inventory.csv"):
        inventory.setdefault(Measure(measure_s), {})[pid] = SpeciatedMass(
            float(hg0), float(hg2), float(hgp)
        )

    deposition = {}
    for prov, hg0, hg2, hgp in _read_table(out / "deposition_provinces.csv"):
        deposition[prov] = SpeciatedMass(float(hg0), float(hg2), float(hgp))

    gridded = {pool: np.zeros((grid.ny, grid.nx)) for pool in POOLS}
    for pool, iy, ix, val in _read_table(out / "deposition_grid.csv"):
        gridded[pool][int(iy), int(ix)] = float(val)

    producer, consumed = {}, {}
    for prov, cat, p_delta, c_delta in _read_table(out / "food_deltas.csv"):
        producer[(prov, cat)] = float(p_delta)
        consumed[(prov, cat)] = float(c_delta)
    edi_delta = {prov: float(v) for prov, v in _read_table(out / "edi.csv")}
    state = ExposureState(producer_delta=producer, consumed_delta=consumed, edi_delta=edi_delta)

    iq_pf, iq_tot, deaths = {}, {}, {}
    for prov, pf, tot, d in _read_table(out / "outcomes.csv"):
        iq_pf[prov] = float(pf)
        iq_tot[prov] = float(tot)
        deaths[prov] = float(d)
    outcome = HealthOutcome(
        iq_per_foetus=iq_pf,
        iq_total=iq_tot,
        avoided_deaths=deaths,
        national_iq_per_foetus=meta["national"]["iq_per_foetus"],
        total_iq=meta["national"]["iq_total"],
        total_deaths=meta["national"]["avoided_deaths"],
    )

    entries = {}
    for receptor, source, measure, company, cls, d, iq in _read_table(out / "attribution.csv"):
        entries[(receptor, source, measure, company, cls)] = (float(d), float(iq))
    tensor = AttributionTensor(
        mode=meta["attribution_mode"],
        receptors=tuple(meta["provinces"]),
        entries=entries,
        deaths_residual={p: float(v) for p, v in meta["deaths_residual"].items()},
    )
    ranking = RankReport(
        top_receivers=[(p, float(v)) for p, v in meta["ranking"]["top_receivers"]],
        top_exporters=[(p, float(v)) for p, v in meta["ranking"]["top_exporters"]],
        measure_shares={
            m: (float(a), float(b)) for m, (a, b) in meta["ranking"]["measure_shares"].items()
        },
    )
    return RunRecord(
        run_id=meta["run_id"],
        scenario=scenario,
        bundle_checksums=meta["bundle_checksums"],
        params_snapshot=meta["params_snapshot"],
        grid=grid,
        provinces=tuple(meta["provinces"]),
        inventory=inventory,
        plant_meta={p: tuple(v) for p, v in meta["plant_meta"].items()},
        gridded_deposition=gridded,
        deposition_by_province=deposition,
        transport_ledger=meta["transport_ledger"],
        exposure=state,
        outcome=outcome,
        attribution=tensor,
        ranking=ranking,
    )


# --- structured diff -------------------------------------------------------------


@dataclass
class RunDiff:
    """Numeric differences between two runs, keyed by stage."""

    entries: dict[str, list[tuple[str, float, float]]]

    def is_empty(self) -> bool:
        return not any(self.entries.values())

    def stages(self) -> list[str]:
        return sorted(k for k, v in self.entries.items() if v)


def _diff_maps(a: dict, b: dict, rtol: float) -> list[tuple[str, float, float]]:
    out = []
    for key in sorted(set(a) | set(b), key=str):
        va = float(a.get(key, 0.0))
        vb = float(b.get(key, 0.0))
        if va == vb:
            continue
        if abs(va - vb) > rtol * max(abs(va), abs(vb)):
            out.append((str(key), va, vb))
    return out


def compare(a: RunRecord, b: RunRecord, rtol: float = 0.0) -> RunDiff:
    """Stage-by-stage numeric diff; identical runs diff to empty.

    Scenario ids are metadata and excluded: records with swapped ids but the
    same content compare equal.  Records from different bundles do not compare.
    """
    if a.bundle_checksums != b.bundle_checksums:
        raise ConfigError("records come from different bundles; diff is not meaningful")
    entries: dict[str, list[tuple[str, float, float]]] = {}
    inv_a = {
        (m.value, p): v.as_dict()
        for m, inv in a.inventory.items()
        for p, v in inv.items()
    }
    inv_b = {
        (m.value, p): v.as_dict()
        for m, inv in b.inventory.items()
        for p, v in inv.items()
    }
    flat_a = {f"{k}:{s}": d[s] for k, d in inv_a.items() for s in SPECIES}
    flat_b = {f"{k}:{s}": d[s] for k, d in inv_b.items() for s in SPECIES}
    entries["inventory"] = _diff_maps(flat_a, flat_b, rtol)
    entries["deposition"] = _diff_maps(
        {f"{p}:{s}": m.as_dict()[s] for p, m in a.deposition_by_province.items() for s in SPECIES},
        {f"{p}:{s}": m.as_dict()[s] for p, m in b.deposition_by_province.items() for s in SPECIES},
        rtol,
    )
    entries["edi"] = _diff_maps(a.exposure.edi_delta, b.exposure.edi_delta, rtol)
    entries["iq"] = _diff_maps(a.outcome.iq_total, b.outcome.iq_total, rtol)
    entries["deaths"] = _diff_maps(a.outcome.avoided_deaths, b.outcome.avoided_deaths, rtol)
    entries["attribution"] = _diff_maps(
        {k: v[0] for k, v in a.attribution.entries.items()},
        {k: v[0] for k, v in b.attribution.entries.items()},
        rtol,
    )
    return RunDiff(entries=entries)
