"""Independent straight-line evaluation of the three emission-delta formulas.

Used to generate and cross-check expected values; deliberately avoids any
import from the package under test.
"""


def sus_species(coal_t1, hg_content, washed, washing_eff, release, eta1, shares1):
    """Avoided base-epoch emission of a decommissioned unit, per species (g)."""
    thg = coal_t1 * hg_content * (1.0 - washed * washing_eff) * release * (1.0 - eta1)
    return (thg * shares1[0], thg * shares1[1], thg * shares1[2])


def apcd_species(coal_t2, hg_content, washed, washing_eff, release, eta1, shares1, eta2, shares2):
    """Per-species reduction from a device retrofit (g); components may be negative."""
    base = coal_t2 * hg_content * (1.0 - washed * washing_eff) * release
    return tuple(
        base * ((1.0 - eta1) * shares1[i] - (1.0 - eta2) * shares2[i]) for i in range(3)
    )


def pge_species(power_t2, ccr1, ccr2, hg_content, washed, washing_eff, release, eta2, shares2):
    """Per-species reduction from the coal-rate drop (g); coal converted g -> t."""
    saved_tons = power_t2 * (ccr1 - ccr2) / 1.0e6
    thg = saved_tons * hg_content * (1.0 - washed * washing_eff) * release * (1.0 - eta2)
    return (thg * shares2[0], thg * shares2[1], thg * shares2[2])
