"""Speciated mercury mass, the common currency of the emission and transport stages."""
from __future__ import annotations

from dataclasses import dataclass

HG0 = "hg0"  # elemental, long-range transport
HG2 = "hg2"  # divalent (oxidized), deposits near sources
HGP = "hgp"  # particulate-bound

SPECIES = (HG0, HG2, HGP)


@dataclass(frozen=True)
class SpeciatedMass:
    """Mass split across the three airborne mercury species, in grams.

    Components may be negative only when the instance represents a delta
    (e.g. an oxidizing retrofit that trades Hg0 for Hg2+).
    """

    hg0: float = 0.0
    hg2: float = 0.0
    hgp: float = 0.0

    def total(self) -> float:
        return self.hg0 + self.hg2 + self.hgp

    def __add__(self, other: "SpeciatedMass") -> "SpeciatedMass":
        return SpeciatedMass(self.hg0 + other.hg0, self.hg2 + other.hg2, self.hgp + other.hgp)

    def __sub__(self, other: "SpeciatedMass") -> "SpeciatedMass":
        return SpeciatedMass(self.hg0 - other.hg0, self.hg2 - other.hg2, self.hgp - other.hgp)

    def scaled(self, factor: float) -> "SpeciatedMass":
        return SpeciatedMass(self.hg0 * factor, self.hg2 * factor, self.hgp * factor)

    def as_dict(self) -> dict[str, float]:
        return {HG0: self.hg0, HG2: self.hg2, HGP: self.hgp}

