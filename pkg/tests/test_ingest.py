import shutil
from pathlib import Path

import pytest

from hgimpact.demo import write_demo_bundle, write_manifest
from hgimpact.ingest import (
    BundleValidationError,
    ingest,
    read_transport_params,
    validate_bundle,
)


@pytest.fixture()
def bundle_copy(demo_dir, tmp_path) -> Path:
    dst = tmp_path / "bundle"
    shutil.copytree(demo_dir / "bundle", dst)
    return dst


def corrupt(root: Path, filename: str, transform, remanifest: bool = True) -> None:
    """Apply a text transform to one file; optionally keep the manifest honest
    so the intended violation is the only one."""
    path = root / filename
    path.write_text(transform(path.read_text()))
    if remanifest:
        write_manifest(root)


def test_demo_bundle_is_valid(demo_dir):
    assert validate_bundle(demo_dir / "bundle") == []


def test_valid_bundle_roundtrips_types(demo_bundle):
    assert len(demo_bundle.plants) == 12
    assert len(demo_bundle.provinces) == 5
    assert len(demo_bundle.food.categories) == 10
    assert demo_bundle.grid.nx == demo_bundle.grid.ny == 20
    assert demo_bundle.epoch_t1 == "2010"
    assert demo_bundle.epoch_t2 == "2014"


def test_different_seed_still_validates(tmp_path):
    write_demo_bundle(tmp_path, seed=7)
    assert validate_bundle(tmp_path / "bundle") == []


def test_read_transport_params_standalone(demo_bundle, demo_dir):
    params = read_transport_params(
        demo_dir / "bundle" / "transport.cfg",
        demo_bundle.transport.wind_u,
        demo_bundle.transport.wind_v,
    )
    assert params.dt_s == demo_bundle.transport.dt_s


def test_nonexistent_bundle_dir(tmp_path):
    violations = validate_bundle(tmp_path / "nope")
    assert len(violations) == 1
    assert "does not exist" in violations[0].message


# --- the corruption corpus -------------------------------------------------------
# each case: (name, mutator(root), expected file, expected message fragment)

def _drop_manifest(root):
    (root / "manifest.txt").unlink()


def _stale_checksum(root):
    corrupt(root, "provinces.csv", lambda t: t + "# tampered\n", remanifest=False)


def _manifest_lists_ghost(root):
    mf = root / "manifest.txt"
    mf.write_text(mf.read_text() + "0" * 64 + "  ghost.csv\n")


def _unlisted_file(root):
    (root / "stowaway.csv").write_text("anything\n")


def _wrong_schema(root):
    corrupt(root, "provinces.csv", lambda t: t.replace("hgimpact/provinces/v1", "hgimpact/provinces/v9"))


def _unit_mismatch(root):
    corrupt(root, "plants.csv", lambda t: t.replace("capacity[MW]", "capacity[GW]"))


def _not_a_number(root):
    corrupt(root, "provinces.csv", lambda t: t.replace(",0.", ",zero.", 1))


def _dangling_province(root):
    corrupt(root, "plants.csv", lambda t: t.replace("PLT001,EAST", "PLT001,ATLANTIS"))


def _dangling_combo(root):
    def swap(text):
        lines = text.splitlines()
        for i, ln in enumerate(lines):
            if ln.startswith("PLT001,"):
                parts = ln.split(",")
                parts[12] = "MAGNETS"  # apcd_t2 column
                lines[i] = ",".join(parts)
                break
        return "\n".join(lines) + "\n"

    corrupt(root, "plants.csv", swap)


def _speciation_sum(root):
    corrupt(root, "apcd.csv", lambda t: t.replace("ESP,0.3,0.58,0.4,0.02", "ESP,0.3,0.58,0.4,0.12"))


def _trade_column_sum(root):
    def fix(text):
        lines = text.splitlines()
        for i, ln in enumerate(lines):
            if ln.startswith("beef,FOREIGN,CENTRAL,"):
                prefix = ln.rsplit(",", 1)[0]
                lines[i] = f"{prefix},0.0"
                break
        return "\n".join(lines) + "\n"

    corrupt(root, "trade_shares.csv", fix)


def _negative_capacity(root):
    corrupt(root, "plants.csv", lambda t: t.replace(",135.0,", ",-135.0,", 1))


def _duplicate_plant(root):
    def dup(text):
        lines = text.splitlines()
        lines.append(lines[2])  # repeat the first data row
        return "\n".join(lines) + "\n"

    corrupt(root, "plants.csv", dup)


def _unknown_status(root):
    corrupt(root, "plants.csv", lambda t: t.replace(",decommissioned", ",vaporized", 1))


def _unknown_mask_region(root):
    corrupt(root, "grid.txt", lambda t: t.replace(" CENTRAL ", " NARNIA ", 1))


def _wind_shape(root):
    def drop_row(text):
        lines = text.splitlines()
        del lines[10]  # one row of the u block
        return "\n".join(lines) + "\n"

    corrupt(root, "wind.txt", drop_row)


def _bad_cvd_form(root):
    corrupt(root, "dose_response.cfg", lambda t: t.replace("cvd_form = linear", "cvd_form = cubic"))


def _missing_intake_row(root):
    def drop(text):
        lines = text.splitlines()
        for i, ln in enumerate(lines):
            if ln.startswith("EAST,rice,"):
                del lines[i]
                break
        return "\n".join(lines) + "\n"

    corrupt(root, "intake_rates.csv", drop)


def _missing_population_row(root):
    def drop(text):
        lines = text.splitlines()
        lines = [ln for ln in lines if not ln.startswith("WEST,")]
        return "\n".join(lines) + "\n"

    corrupt(root, "population.csv", drop)


def _plant_off_grid(root):
    def relocate(text):
        lines = text.splitlines()
        for i, ln in enumerate(lines):
            if ln.startswith("PLT012,"):
                parts = ln.split(",")
                parts[4] = "64.0"  # latitude far north of the domain
                lines[i] = ",".join(parts)
                break
        return "\n".join(lines) + "\n"

    corrupt(root, "plants.csv", relocate)


def _epochs_out_of_order(root):
    corrupt(root, "bundle.cfg", lambda t: t.replace("epoch_t1 = 2010", "epoch_t1 = 2015"))


CORRUPTIONS = [
    ("missing_manifest", _drop_manifest, "manifest.txt", "manifest missing"),
    ("stale_checksum", _stale_checksum, "provinces.csv", "checksum"),
    ("manifest_ghost_file", _manifest_lists_ghost, "manifest.txt", "missing from bundle"),
    ("unlisted_file", _unlisted_file, "manifest.txt", "not listed"),
    ("wrong_schema", _wrong_schema, "provinces.csv", "schema"),
    ("unit_mismatch", _unit_mismatch, "plants.csv", "unit mismatch"),
    ("not_a_number", _not_a_number, "provinces.csv", "not a number"),
    ("dangling_province", _dangling_province, "plants.csv", "unknown province"),
    ("dangling_combo", _dangling_combo, "plants.csv", "unknown APCD combo"),
    ("speciation_sum", _speciation_sum, "apcd.csv", "speciation"),
    ("trade_column_sum", _trade_column_sum, "trade_shares.csv", "sum"),
    ("negative_capacity", _negative_capacity, "plants.csv", "capacity"),
    ("duplicate_plant", _duplicate_plant, "plants.csv", "duplicate"),
    ("unknown_status", _unknown_status, "plants.csv", "status"),
    ("unknown_mask_region", _unknown_mask_region, "grid.txt", "unknown province"),
    ("wind_shape", _wind_shape, "wind.txt", "rows"),
    ("bad_cvd_form", _bad_cvd_form, "dose_response.cfg", "cvd_form"),
    ("missing_intake_row", _missing_intake_row, "intake_rates.csv", "missing entry"),
    ("missing_population_row", _missing_population_row, "population.csv", "missing"),
    ("plant_off_grid", _plant_off_grid, "plants.csv", "outside the grid"),
    ("epochs_out_of_order", _epochs_out_of_order, "bundle.cfg", "strictly precede"),
]


@pytest.mark.parametrize("name,mutate,expect_file,expect_msg", CORRUPTIONS, ids=[c[0] for c in CORRUPTIONS])
def test_corrupted_bundle_yields_structured_violations(bundle_copy, name, mutate, expect_file, expect_msg):
    mutate(bundle_copy)
    violations = validate_bundle(bundle_copy)
    assert violations, f"{name}: expected at least one violation"
    matching = [
        v for v in violations if v.file == expect_file and expect_msg in v.message
    ]
    assert matching, f"{name}: no violation for {expect_file} containing {expect_msg!r}; got {violations}"
    with pytest.raises(BundleValidationError):
        ingest(bundle_copy)


def test_multiple_problems_all_reported(bundle_copy):
    _dangling_province(bundle_copy)
    _bad_cvd_form(bundle_copy)
    _trade_column_sum(bundle_copy)
    violations = validate_bundle(bundle_copy)
    files = {v.file for v in violations}
    assert {"plants.csv", "dose_response.cfg", "trade_shares.csv"} <= files


def test_trade_violation_names_category_and_consumer(bundle_copy):
    _trade_column_sum(bundle_copy)
    violations = validate_bundle(bundle_copy)
    hit = [v for v in violations if v.file == "trade_shares.csv"]
    assert any("beef" in v.message and "CENTRAL" in v.message for v in hit)


def test_violations_carry_line_numbers(bundle_copy):
    _not_a_number(bundle_copy)
    violations = validate_bundle(bundle_copy)
    hit = [v for v in violations if v.file == "provinces.csv"]
    assert hit and hit[0].line is not None and hit[0].line >= 3
    assert str(hit[0]).startswith("provinces.csv:")
