"""Deposition deltas to food MeHg changes, trade mixing, and dietary intake.

Food concentrations scale proportionally with the change in atmospheric Hg
input to the producing province; interprovincial trade then mixes producer
concentrations into what each consumer province actually eats; intake rates
and body weight turn that into a per-capita daily dose delta.  Every stage is
linear, so the composed map deposition -> EDI is a matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import ConfigError

FOREIGN = "FOREIGN"  # pseudo-producer with zero concentration delta

TRADE_SHARE_TOL = 1e-9  # producer shares per (consumer, category) must sum to 1


@dataclass(frozen=True)
class FoodBaseline:
    """Baseline MeHg concentrations per (province, category), ug/kg, plus the
    baseline atmospheric Hg input per province (grams per horizon) that the
    proportional scaling divides by."""

    concentrations: Mapping[tuple[str, str], float]
    base_deposition_g: Mapping[str, float]
    provinces: tuple[str, ...]
    categories: tuple[str, ...]


@dataclass(frozen=True)
class TradeShares:
    """share[(category, producer, consumer)]: fraction of the consumer's supply
    of that category sourced from the producer; FOREIGN is a valid producer."""

    shares: Mapping[tuple[str, str, str], float]
    categories: tuple[str, ...]
    producers: tuple[str, ...]
    consumers: tuple[str, ...]

    def column_sum(self, category: str, consumer: str) -> float:
        return sum(
            self.shares.get((category, p, consumer), 0.0) for p in self.producers
        )


@dataclass(frozen=True)
class IntakeProfile:
    """Dietary intake rates and demographics per province."""

    intake_kg_day: Mapping[tuple[str, str], float]  # kg/person/day
    body_weight_kg: Mapping[str, float]
    population: Mapping[str, float]
    births_per_yr: Mapping[str, float]


@dataclass(frozen=True)
class ExposureState:
    """Per-province dose change with the intermediate concentration deltas."""

    producer_delta: dict[tuple[str, str], float]  # ug/kg at the producing province
    consumed_delta: dict[tuple[str, str], float]  # ug/kg after trade mixing
    edi_delta: dict[str, float]  # ug MeHg per kg body weight per day


def food_delta(
    dep_delta_g: Mapping[str, float],
    baseline: FoodBaseline,
) -> dict[tuple[str, str], float]:
    """Concentration change per (province, category): C_base * delta_dep / base_dep."""
    out: dict[tuple[str, str], float] = {}
    for province in baseline.provinces:
        delta = float(dep_delta_g.get(province, 0.0))
        base = float(baseline.base_deposition_g.get(province, 0.0))
        if delta != 0.0 and base <= 0.0:
            raise ConfigError(
                f"province {province}: deposition delta {delta:g} g with zero baseline "
                "deposition; proportional scaling undefined"
            )
        ratio = delta / base if base > 0.0 else 0.0
        for category in baseline.categories:
            conc = baseline.concentrations.get((province, category), 0.0)
            out[(province, category)] = conc * ratio
    return out


def trade_mix(
    producer_delta: Mapping[tuple[str, str], float],
    trade: TradeShares,
) -> dict[tuple[str, str], float]:
    """Mix producer-side concentration deltas into consumer-side ones.

    FOREIGN contributes a zero delta; share columns are validated at ingestion
    but re-checked here since the operator is public.
    """
    out: dict[tuple[str, str], float] = {}
    for consumer in trade.consumers:
        for category in trade.categories:
            total_share = trade.column_sum(category, consumer)
            if abs(total_share - 1.0) > TRADE_SHARE_TOL:
                raise ConfigError(
                    f"trade shares for consumer {consumer}, category {category} "
                    f"sum to {total_share!r}, not 1"
                )
            acc = 0.0
            for producer in trade.producers:
                share = trade.shares.get((category, producer, consumer), 0.0)
                if share == 0.0 or producer == FOREIGN:
                    continue
                acc += share * producer_delta.get((producer, category), 0.0)
            out[(consumer, category)] = acc
    return out


def edi(
    consumed_delta: Mapping[tuple[str, str], float],
    intake: IntakeProfile,
) -> dict[str, float]:
    """Per-capita daily MeHg dose change, ug per kg body weight per day."""
    provinces = sorted(intake.body_weight_kg)
    categories = sorted({c for (_, c) in intake.intake_kg_day})
    out: dict[str, float] = {}
    for province in provinces:
        bw = intake.body_weight_kg[province]
        if bw <= 0.0:
            raise ConfigError(f"province {province}: body weight must be positive")
        acc = 0.0
        for category in categories:
            rate = intake.intake_kg_day.get((province, category), 0.0)
            acc += consumed_delta.get((province, category), 0.0) * rate
        out[province] = acc / bw
    return out


def exposure_chain(
    dep_delta_g: Mapping[str, float],
    baseline: FoodBaseline,
    trade: TradeShares,
    intake: IntakeProfile,
) -> ExposureState:
    """Convenience composition of the three stages."""
    produced = food_delta(dep_delta_g, baseline)
    consumed = trade_mix(produced, trade)
    return ExposureState(
        producer_delta=produced,
        consumed_delta=consumed,
        edi_delta=edi(consumed, intake),
    )
