"""Plant-level speciated emission deltas for the three retrofit measures.

The three measures are decommissioning of small units (SUS), installation of
new air pollution control devices (APCD), and power generation efficiency
improvement (PGE).  Every operation is a pure function over immutable inputs;
all masses are in grams (reports convert to kg).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ConfigError, IngestError
from .species import SpeciatedMass

GRAMS_PER_TON = 1.0e6  # CCR columns are g/kWh, coal columns are metric tons


class Measure(str, enum.Enum):
    SUS = "SUS"
    APCD = "APCD"
    PGE = "PGE"


class Status(str, enum.Enum):
    ACTIVE = "active"
    DECOMMISSIONED = "decommissioned"


CAPACITY_CLASSES = ("<100", "100-300", "300-1200", ">=1200")

GROUP_KEYS = ("province", "company", "capacity_class")


class NegativeReductionWarning(UserWarning):
    """A measure produced a negative total-Hg reduction; usually a data problem."""


def capacity_class(capacity_mw: float) -> str:
    """Bucket a unit by nameplate capacity; boundaries 100/300/1200 MW, lower-inclusive."""
    if capacity_mw < 100.0:
        return CAPACITY_CLASSES[0]
    if capacity_mw < 300.0:
        return CAPACITY_CLASSES[1]
    if capacity_mw < 1200.0:
        return CAPACITY_CLASSES[2]
    return CAPACITY_CLASSES[3]


@dataclass(frozen=True)
class ProvinceParams:
    province_id: str
    coal_hg_g_per_ton: float   # mean Hg content of consumed coal
    washed_fraction: float     # share of coal that is washed, [0, 1]
    washing_removal: float     # Hg removal efficiency of coal washing, [0, 1]
    release_ratio_default: float = 1.0  # share of coal Hg released to flue gas


@dataclass(frozen=True)
class ApcdConfig:
    """A device combination: co-benefit Hg removal plus emitted speciation shares."""

    combo: str  # opaque key, e.g. "SCR+ESP+WFGD"
    removal_eff: float  # total Hg removal efficiency, [0, 1]
    speciation: tuple[float, float, float]  # emitted shares (hg0, hg2, hgp)

    def __post_init__(self):
        if not 0.0 <= self.removal_eff <= 1.0:
            raise ValueError(f"APCD {self.combo}: removal_eff {self.removal_eff} not in [0, 1]")
        if len(self.speciation) != 3 or any(s < 0.0 for s in self.speciation):
            raise ValueError(f"APCD {self.combo}: speciation shares must be 3 nonnegative values")
        if abs(sum(self.speciation) - 1.0) > 1e-12:
            raise ValueError(
                f"APCD {self.combo}: speciation shares sum to {sum(self.speciation)!r}, not 1"
            )


@dataclass(frozen=True)
class Plant:
    """One coal-fired generating unit with its two-epoch configuration."""

    plant_id: str
    province_id: str
    company: str
    capacity_mw: float
    lat: float
    lon: float
    coal_t1_tons: float      # annual coal consumption at the base epoch
    coal_t2_tons: float      # annual coal consumption at the later epoch
    power_t2_kwh: float      # electricity generated at the later epoch
    ccr_t1_g_per_kwh: float  # coal consumption rate, grams coal per kWh
    ccr_t2_g_per_kwh: float
    apcd_t1: ApcdConfig
    apcd_t2: ApcdConfig
    status: Status = Status.ACTIVE
    release_ratio: float | None = None  # falls back to the province default


def _release_ratio(plant: Plant, prov: ProvinceParams) -> float:
    if plant.release_ratio is not None:
        return plant.release_ratio
    return prov.release_ratio_default


def _flue_gas_hg(coal_tons: float, prov: ProvinceParams, release: float) -> float:
    """Hg reaching the APCD train, grams: coal x content x washing survival x release."""
    return (
        coal_tons
        * prov.coal_hg_g_per_ton
        * (1.0 - prov.washed_fraction * prov.washing_removal)
        * release
    )


def _speciate(thg: float, config: ApcdConfig) -> SpeciatedMass:
    f0, f2, fp = config.speciation
    return SpeciatedMass(thg * f0, thg * f2, thg * fp)


def emission_sus(plant: Plant, prov: ProvinceParams) -> SpeciatedMass:
    """Avoided emission from decommissioning, evaluated at the base-epoch configuration.

    Returned mass is the plant's base-epoch annual emission, i.e. the amount no
    longer emitted once the unit is shut down (positive = reduction).
    """
    if plant.status is not Status.DECOMMISSIONED:
        raise ConfigError(f"plant {plant.plant_id} is not decommissioned; SUS does not apply")
    base = _flue_gas_hg(plant.coal_t1_tons, prov, _release_ratio(plant, prov))
    thg = base * (1.0 - plant.apcd_t1.removal_eff)
    return _speciate(thg, plant.apcd_t1)


def emission_delta_apcd(plant: Plant, prov: ProvinceParams) -> SpeciatedMass:
    """Emission reduction from a device retrofit, per species (positive = reduction).

    A species component may be negative even when the total is positive: an
    oxidizing device shifts mass from Hg0 to Hg2+, so Hg2+ emissions can rise
    while total emissions fall.
    """
    base = _flue_gas_hg(plant.coal_t2_tons, prov, _release_ratio(plant, prov))
    pass_t1 = 1.0 - plant.apcd_t1.removal_eff
    pass_t2 = 1.0 - plant.apcd_t2.removal_eff
    f1 = plant.apcd_t1.speciation
    f2 = plant.apcd_t2.speciation
    delta = SpeciatedMass(
        base * (pass_t1 * f1[0] - pass_t2 * f2[0]),
        base * (pass_t1 * f1[1] - pass_t2 * f2[1]),
        base * (pass_t1 * f1[2] - pass_t2 * f2[2]),
    )
    if delta.total() < 0.0:
        warnings.warn(
            f"plant {plant.plant_id}: APCD retrofit increases total Hg emissions "
            f"({delta.total():.6g} g)",
            NegativeReductionWarning,
            stacklevel=2,
        )
    return delta


def pge_coal_saved_tons(plant: Plant) -> float:
    """Coal saved by the coal-consumption-rate drop, metric tons (may be negative)."""
    return plant.power_t2_kwh * (plant.ccr_t1_g_per_kwh - plant.ccr_t2_g_per_kwh) / GRAMS_PER_TON


def emission_delta_pge(plant: Plant, prov: ProvinceParams) -> SpeciatedMass:
    """Emission reduction from burning less coal per kWh, at the post-retrofit removal."""
    saved_tons = pge_coal_saved_tons(plant)
    base = _flue_gas_hg(saved_tons, prov, _release_ratio(plant, prov))
    thg = base * (1.0 - plant.apcd_t2.removal_eff)
    if thg < 0.0:
        warnings.warn(
            f"plant {plant.plant_id}: coal consumption rate rose between epochs "
            f"({plant.ccr_t1_g_per_kwh:g} -> {plant.ccr_t2_g_per_kwh:g} g/kWh)",
            NegativeReductionWarning,
            stacklevel=2,
        )
    return _speciate(thg, plant.apcd_t2)


def measure_applies(plant: Plant, measure: Measure) -> bool:
    """Eligibility: SUS needs the decommissioned flag; APCD a device change; PGE a CCR change."""
    if measure is Measure.SUS:
        return plant.status is Status.DECOMMISSIONED
    if plant.status is not Status.ACTIVE:
        return False
    if measure is Measure.APCD:
        return plant.apcd_t1 != plant.apcd_t2
    return plant.ccr_t1_g_per_kwh != plant.ccr_t2_g_per_kwh


_MEASURE_FUNCS = {
    Measure.SUS: emission_sus,
    Measure.APCD: emission_delta_apcd,
    Measure.PGE: emission_delta_pge,
}


def build_inventory(
    plants: Iterable[Plant],
    provs: Mapping[str, ProvinceParams],
    measure: Measure,
) -> dict[str, SpeciatedMass]:
    """Per-plant emission deltas for one measure; ineligible plants are omitted."""
    out: dict[str, SpeciatedMass] = {}
    seen: set[str] = set()
    func = _MEASURE_FUNCS[Measure(measure)]
    for plant in plants:
        if plant.plant_id in seen:
            raise IngestError(f"duplicate plant_id {plant.plant_id}")
        seen.add(plant.plant_id)
        if not measure_applies(plant, Measure(measure)):
            continue
        prov = provs.get(plant.province_id)
        if prov is None:
            raise ConfigError(
                f"plant {plant.plant_id} references unknown province {plant.province_id}"
            )
        out[plant.plant_id] = func(plant, prov)
    return out


def group_totals(
    inv: Mapping[str, SpeciatedMass],
    plants: Mapping[str, Plant],
    key: str,
) -> dict[str, SpeciatedMass]:
    """Sum per-plant deltas by province, company, or capacity class.

    The grand total is invariant under the grouping key; summation order is
    fixed (sorted plant ids) so repeated runs are bit-stable.
    """
    if key not in GROUP_KEYS:
        raise ValueError(f"unknown grouping key {key!r}; expected one of {GROUP_KEYS}")
    out: dict[str, SpeciatedMass] = {}
    for plant_id in sorted(inv):
        plant = plants[plant_id]
        if key == "province":
            label = plant.province_id
        elif key == "company":
            label = plant.company
        else:
            label = capacity_class(plant.capacity_mw)
        out[label] = out.get(label, SpeciatedMass()) + inv[plant_id]
    return dict(sorted(out.items()))
