"""Dose-response endpoints and source-receptor attribution of health benefits.

Two endpoints: foetal IQ decrements avoided (always linear in dose) and fatal
heart attacks avoided (linear or log-linear in hair Hg).  Attribution
propagates each source group's emission delta alone through the full linear
chain; in linear mode the tensor entries sum exactly to the whole-scenario
outcome, in log-linear mode entries are marginal linearizations and the
closure residual is reported rather than hidden.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ConfigError
from .exposure import FoodBaseline, IntakeProfile, TradeShares, exposure_chain
from .inventory import Measure, Plant, capacity_class
from .species import SpeciatedMass
from .transport import (
    GridSpec,
    SourceReceptorMatrix,
    aggregate_to_provinces,
    rasterize_emissions,
    OUTSIDE,
)

CVD_LINEAR = "linear"
CVD_LOG_LINEAR = "log-linear"
CVD_FORMS = (CVD_LINEAR, CVD_LOG_LINEAR)

# (receptor, source province, measure, company, capacity class)
GroupKey = tuple[str, str, str, str]


@dataclass(frozen=True)
class DoseResponse:
    """Configured coefficients; the engine embeds no epidemiology of its own."""

    hair_per_intake: float  # (ug/g hair) per (ug/kg-bw/day)
    iq_points_per_hair: float  # IQ points per ug/g hair, foetal endpoint
    cvd_form: str  # "linear" | "log-linear"
    cvd_beta_per_hair: float  # fractional fatal-heart-attack risk per ug/g hair
    baseline_mortality: Mapping[str, float]  # deaths/yr per province
    baseline_hair: Mapping[str, float]  # ug/g per province


@dataclass
class HealthOutcome:
    """Per-province endpoint changes plus national aggregates."""

    iq_per_foetus: dict[str, float]  # points per birth
    iq_total: dict[str, float]  # points x births
    avoided_deaths: dict[str, float]  # deaths per simulated horizon
    national_iq_per_foetus: float  # births-weighted mean of the provincial values
    total_iq: float
    total_deaths: float


def iq_endpoint(
    edi_delta: Mapping[str, float],
    dr: DoseResponse,
    intake: IntakeProfile,
) -> tuple[dict[str, float], dict[str, float]]:
    """Per-foetus and birth-weighted total IQ change per province."""
    per_foetus: dict[str, float] = {}
    total: dict[str, float] = {}
    for province in sorted(edi_delta):
        pf = dr.iq_points_per_hair * dr.hair_per_intake * edi_delta[province]
        per_foetus[province] = pf
        total[province] = pf * intake.births_per_yr.get(province, 0.0)
    return per_foetus, total


def cvd_endpoint(edi_delta: Mapping[str, float], dr: DoseResponse) -> dict[str, float]:
    """Avoided fatal heart attacks per province.

    Linear: beta * k * dEDI * baseline mortality.  Log-linear:
    baseline_mortality * (1 - exp(-beta * k * dEDI)), bounded by the baseline.
    """
    if dr.cvd_form not in CVD_FORMS:
        raise ConfigError(f"unknown cvd_form {dr.cvd_form!r}; expected one of {CVD_FORMS}")
    out: dict[str, float] = {}
    for province in sorted(edi_delta):
        mortality = dr.baseline_mortality.get(province, 0.0)
        hair_delta = dr.cvd_beta_per_hair * dr.hair_per_intake * edi_delta[province]
        if dr.cvd_form == CVD_LINEAR:
            out[province] = hair_delta * mortality
        else:
            out[province] = mortality * (1.0 - math.exp(-hair_delta))
    return out


def health_outcome(
    edi_delta: Mapping[str, float],
    dr: DoseResponse,
    intake: IntakeProfile,
) -> HealthOutcome:
    per_foetus, total = iq_endpoint(edi_delta, dr, intake)
    deaths = cvd_endpoint(edi_delta, dr)
    births_sum = sum(intake.births_per_yr.get(p, 0.0) for p in sorted(per_foetus))
    weighted = sum(
        per_foetus[p] * intake.births_per_yr.get(p, 0.0) for p in sorted(per_foetus)
    )
    return HealthOutcome(
        iq_per_foetus=per_foetus,
        iq_total=total,
        avoided_deaths=deaths,
        national_iq_per_foetus=weighted / births_sum if births_sum > 0.0 else 0.0,
        total_iq=sum(total[p] for p in sorted(total)),
        total_deaths=sum(deaths[p] for p in sorted(deaths)),
    )


def group_inventory(
    inventory_by_measure: Mapping[Measure, Mapping[str, SpeciatedMass]],
    plants: Mapping[str, Plant],
) -> dict[GroupKey, dict[str, SpeciatedMass]]:
    """Partition per-plant deltas into (province, measure, company, class) groups."""
    groups: dict[GroupKey, dict[str, SpeciatedMass]] = {}
    for measure in sorted(inventory_by_measure, key=lambda m: m.value):
        for plant_id in sorted(inventory_by_measure[measure]):
            plant = plants[plant_id]
            key = (
                plant.province_id,
                Measure(measure).value,
                plant.company,
                capacity_class(plant.capacity_mw),
            )
            groups.setdefault(key, {})[plant_id] = inventory_by_measure[measure][plant_id]
    return groups


@dataclass
class AttributionTensor:
    """Health benefits decomposed by receptor x (source province, measure,
    company, capacity class).

    ``entries[(receptor, source, measure, company, cls)] = (deaths, iq_total)``.
    In log-linear mode the entries are marginal linearizations and
    ``deaths_residual`` holds, per receptor, the gap to the nonlinear total.
    """

    mode: str
    receptors: tuple[str, ...]
    entries: dict[tuple[str, str, str, str, str], tuple[float, float]]
    deaths_residual: dict[str, float] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, str, str, str, str, float, float]]:
        return [(*key, *self.entries[key]) for key in sorted(self.entries)]

    def receptor_totals(self) -> dict[str, tuple[float, float]]:
        """Marginal sums over every source dimension."""
        out: dict[str, tuple[float, float]] = {r: (0.0, 0.0) for r in self.receptors}
        for key in sorted(self.entries):
            receptor = key[0]
            deaths, iq = self.entries[key]
            d0, i0 = out.get(receptor, (0.0, 0.0))
            out[receptor] = (d0 + deaths, i0 + iq)
        return out

    def source_totals(self) -> dict[str, tuple[float, float]]:
        out: dict[str, tuple[float, float]] = {}
        for key in sorted(self.entries):
            source = key[1]
            deaths, iq = self.entries[key]
            d0, i0 = out.get(source, (0.0, 0.0))
            out[source] = (d0 + deaths, i0 + iq)
        return out

    def measure_totals(self) -> dict[str, tuple[float, float]]:
        out: dict[str, tuple[float, float]] = {}
        for key in sorted(self.entries):
            measure = key[2]
            deaths, iq = self.entries[key]
            d0, i0 = out.get(measure, (0.0, 0.0))
            out[measure] = (d0 + deaths, i0 + iq)
        return out

    def cross_border(self) -> tuple[dict[str, float], dict[str, float]]:
        """(deaths received from other provinces, deaths exported to others)."""
        received: dict[str, float] = {r: 0.0 for r in self.receptors}
        exported: dict[str, float] = {}
        for key in sorted(self.entries):
            receptor, source = key[0], key[1]
            deaths = self.entries[key][0]
            if receptor != source:
                received[receptor] = received.get(receptor, 0.0) + deaths
                exported[source] = exported.get(source, 0.0) + deaths
        return received, exported


def attribute(
    srm: SourceReceptorMatrix,
    groups: Mapping[GroupKey, Mapping[str, SpeciatedMass]],
    inventory_by_measure: Mapping[Measure, Mapping[str, SpeciatedMass]],
    plants: Mapping[str, Plant],
    grid: GridSpec,
    baseline: FoodBaseline,
    trade: TradeShares,
    intake: IntakeProfile,
    dr: DoseResponse,
) -> AttributionTensor:
    """Propagate each group's emission delta alone through the full chain.

    The group partition must cover the inventory exactly; anything missing or
    doubled is an error, not a silent misattribution.
    """
    covered: set[tuple[str, str]] = set()
    for key in groups:
        for plant_id in groups[key]:
            pair = (key[1], plant_id)
            if pair in covered:
                raise ConfigError(
                    f"plant {plant_id} appears in more than one {key[1]} group"
                )
            covered.add(pair)
    expected = {
        (Measure(measure).value, plant_id)
        for measure in inventory_by_measure
        for plant_id in inventory_by_measure[measure]
    }
    if covered != expected:
        missing = sorted(expected - covered)
        extra = sorted(covered - expected)
        raise ConfigError(
            f"group partition does not cover the inventory; missing={missing} extra={extra}"
        )

    receptors = tuple(sorted(baseline.provinces))
    linear_dr = DoseResponse(
        hair_per_intake=dr.hair_per_intake,
        iq_points_per_hair=dr.iq_points_per_hair,
        cvd_form=CVD_LINEAR,
        cvd_beta_per_hair=dr.cvd_beta_per_hair,
        baseline_mortality=dr.baseline_mortality,
        baseline_hair=dr.baseline_hair,
    )

    entries: dict[tuple[str, str, str, str, str], tuple[float, float]] = {}
    edi_sum: dict[str, float] = {r: 0.0 for r in receptors}
    linear_deaths_sum: dict[str, float] = {r: 0.0 for r in receptors}
    for key in sorted(groups):
        fields = rasterize_emissions(groups[key], plants, grid)
        dep = srm.apply(fields, grid)
        by_province = aggregate_to_provinces(dep, grid)
        thg = {p: m.total() for p, m in by_province.items() if p != OUTSIDE}
        state = exposure_chain(thg, baseline, trade, intake)
        _, iq_total = iq_endpoint(state.edi_delta, linear_dr, intake)
        deaths = cvd_endpoint(state.edi_delta, linear_dr)
        for receptor in receptors:
            entries[(receptor, *key)] = (
                deaths.get(receptor, 0.0),
                iq_total.get(receptor, 0.0),
            )
            edi_sum[receptor] += state.edi_delta.get(receptor, 0.0)
            linear_deaths_sum[receptor] += deaths.get(receptor, 0.0)

    residual: dict[str, float] = {r: 0.0 for r in receptors}
    if dr.cvd_form == CVD_LOG_LINEAR:
        nonlinear = cvd_endpoint(edi_sum, dr)
        for r in receptors:
            residual[r] = nonlinear[r] - linear_deaths_sum[r]
    return AttributionTensor(
        mode=dr.cvd_form,
        receptors=receptors,
        entries=entries,
        deaths_residual=residual,
    )


@dataclass
class RankReport:
    """Deterministic orderings; ties broken by province id ascending."""

    top_receivers: list[tuple[str, float]]  # cross-border avoided deaths received
    top_exporters: list[tuple[str, float]]  # avoided deaths delivered to other provinces
    measure_shares: dict[str, tuple[float, float]]  # measure -> share of (deaths, iq)


def rank_report(tensor: AttributionTensor) -> RankReport:
    received, exported = tensor.cross_border()
    order = lambda items: sorted(items, key=lambda kv: (-kv[1], kv[0]))
    measure_abs = tensor.measure_totals()
    deaths_total = sum(v[0] for v in measure_abs.values())
    iq_total = sum(v[1] for v in measure_abs.values())
    shares = {
        m: (
            measure_abs[m][0] / deaths_total if deaths_total != 0.0 else 0.0,
            measure_abs[m][1] / iq_total if iq_total != 0.0 else 0.0,
        )
        for m in sorted(measure_abs)
    }
    return RankReport(
        top_receivers=order(received.items()),
        top_exporters=order(exported.items()),
        measure_shares=shares,
    )
