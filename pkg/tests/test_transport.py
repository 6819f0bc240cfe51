import numpy as np
import pytest

from hgimpact.errors import CflError, ConfigError, OutsideDomainError
from hgimpact.inventory import ApcdConfig, Plant
from hgimpact.species import HG0, HG2, HGP, SPECIES, SpeciatedMass
from hgimpact.transport import (
    GridSpec,
    OUTSIDE,
    TransportParams,
    aggregate_to_provinces,
    build_srm,
    load_srm,
    max_stable_dt,
    rasterize_emissions,
    save_srm,
    simulate,
)


def small_grid(n=9, cell_km=50.0, mask=None):
    if mask is None:
        mask = tuple("P1" if 2 <= (i % n) <= 6 else OUTSIDE for i in range(n * n))
    return GridSpec(
        nx=n, ny=n, cell_size_km=cell_km, origin_lat=30.0, origin_lon=110.0,
        region_mask=mask,
    )


def make_params(grid, u=0.0, v=0.0, k=0.0, vd=(1e-5, 1e-5, 1e-5), k_ox=0.0,
                dt=600.0, horizon=6e5, inflow=None):
    return TransportParams(
        wind_u=np.full((grid.ny, grid.nx), u),
        wind_v=np.full((grid.ny, grid.nx), v),
        diffusivity_m2_s=k,
        vd_per_s={HG0: vd[0], HG2: vd[1], HGP: vd[2]},
        k_ox_per_s=k_ox,
        dt_s=dt,
        horizon_s=horizon,
        boundary_inflow_g=inflow or {},
    )


def pulse(grid, ix, iy, mass=(1.0, 1.0, 1.0)):
    fields = {s: np.zeros((grid.ny, grid.nx)) for s in SPECIES}
    for s, m in zip(SPECIES, mass):
        fields[s][iy, ix] = m
    return fields


class TestRasterize:
    def make_plant(self, pid, lat, lon):
        combo = ApcdConfig("ESP", 0.3, (0.8, 0.15, 0.05))
        return Plant(
            plant_id=pid, province_id="P1", company="LOCAL", capacity_mw=100.0,
            lat=lat, lon=lon, coal_t1_tons=1.0, coal_t2_tons=1.0, power_t2_kwh=1.0,
            ccr_t1_g_per_kwh=300.0, ccr_t2_g_per_kwh=300.0,
            apcd_t1=combo, apcd_t2=combo,
        )

    def test_single_plant_single_cell(self):
        grid = small_grid()
        lat, lon = grid.cell_center(4, 4)
        plants = {"P": self.make_plant("P", lat, lon)}
        fields = rasterize_emissions({"P": SpeciatedMass(5.0, 3.0, 1.0)}, plants, grid)
        assert fields[HG0][4, 4] == 5.0
        assert np.count_nonzero(fields[HG0]) == 1
        assert fields[HG2].sum() == 3.0

    def test_two_plants_same_cell_sum(self):
        grid = small_grid()
        lat, lon = grid.cell_center(2, 3)
        plants = {
            "A": self.make_plant("A", lat, lon),
            "B": self.make_plant("B", lat + 0.05, lon + 0.05),  # same 50 km cell
        }
        inv = {"A": SpeciatedMass(1.0, 0, 0), "B": SpeciatedMass(2.0, 0, 0)}
        fields = rasterize_emissions(inv, plants, grid)
        assert fields[HG0][3, 2] == 3.0

    def test_outside_domain_names_plant(self):
        grid = small_grid()
        plants = {"FAR": self.make_plant("FAR", 80.0, 10.0)}
        with pytest.raises(OutsideDomainError, match="FAR"):
            rasterize_emissions({"FAR": SpeciatedMass(1, 0, 0)}, plants, grid)

    def test_totals_preserved(self, demo_bundle):
        from hgimpact.inventory import Measure, build_inventory

        inv = build_inventory(
            [demo_bundle.plants[p] for p in sorted(demo_bundle.plants)],
            demo_bundle.provinces,
            Measure.SUS,
        )
        fields = rasterize_emissions(inv, demo_bundle.plants, demo_bundle.grid)
        for s, attr in ((HG0, "hg0"), (HG2, "hg2"), (HGP, "hgp")):
            want = sum(getattr(m, attr) for m in inv.values())
            assert fields[s].sum() == pytest.approx(want, rel=1e-12)

    def test_demo_raster_checksum_golden(self, demo_bundle):
        from conftest import load_golden, rel_err
        from hgimpact.inventory import Measure, build_inventory

        merged = {}
        for m in Measure:
            for pid, mass in build_inventory(
                [demo_bundle.plants[p] for p in sorted(demo_bundle.plants)],
                demo_bundle.provinces,
                m,
            ).items():
                merged[pid] = merged.get(pid, SpeciatedMass()) + mass
        fields = rasterize_emissions(merged, demo_bundle.plants, demo_bundle.grid)
        n = demo_bundle.grid.n_cells
        weights = np.arange(1, n + 1, dtype=float)
        for species, total, checksum in load_golden("raster.csv"):
            flat = fields[species].reshape(-1)
            assert rel_err(float(flat.sum()), float(total)) < 1e-12
            assert rel_err(float(flat @ weights), float(checksum)) < 1e-12


class TestSimulate:
    def test_pure_decay_deposits_everything_in_place(self):
        # no wind, no diffusion, vd * horizon = 60 >> 30
        grid = small_grid()
        params = make_params(grid, vd=(1e-4, 1e-4, 1e-4), dt=600.0, horizon=6e5)
        dep = simulate(pulse(grid, 4, 4, (2.0, 3.0, 4.0)), params, grid)
        for pool, want in (("hg0", 2.0), ("hg2", 3.0), ("hgp", 4.0)):
            assert dep.deposited[pool][4, 4] == pytest.approx(want, rel=1e-12)
            assert dep.exported[pool] == 0.0
        assert np.count_nonzero(dep.deposited["hg0"]) == 1

    def test_no_removal_conserves_airborne_mass(self):
        grid = small_grid()
        params = make_params(grid, vd=(0.0, 0.0, 0.0), dt=600.0, horizon=1e5)
        dep = simulate(pulse(grid, 4, 4), params, grid)
        for pool in ("hg0", "hg2", "hgp"):
            assert float(dep.deposited[pool].sum()) == 0.0
            assert dep.exported[pool] == 0.0
            assert dep.airborne_residual[pool] == pytest.approx(1.0, rel=1e-12)

    def test_eastward_wind_moves_deposition_centroid_east(self):
        grid = small_grid(n=15)
        params = make_params(grid, u=3.0, vd=(2e-5, 2e-5, 2e-5), dt=1000.0, horizon=2e6)
        dep = simulate(pulse(grid, 3, 7), params, grid)
        for pool in ("hg0", "hg2", "hgp"):
            field = dep.deposited[pool]
            xs = np.arange(grid.nx)
            centroid_x = float((field.sum(axis=0) * xs).sum() / field.sum())
            assert centroid_x > 3.0

    def test_mass_balance_with_oxidation(self):
        grid = small_grid()
        params = make_params(
            grid, u=2.0, v=-1.0, k=500.0, vd=(2e-7, 3e-5, 2e-5), k_ox=1e-6,
            dt=900.0, horizon=9e5,
        )
        dep = simulate(pulse(grid, 4, 4, (10.0, 5.0, 2.0)), params, grid)
        residuals = dep.balance_residuals()
        assert max(residuals.values()) < 1e-12
        assert dep.oxidized_transfer > 0.0

    def test_no_oxidation_means_no_cross_species_deposition(self):
        grid = small_grid()
        params = make_params(grid, u=2.0, vd=(1e-6, 1e-5, 1e-5), k_ox=0.0)
        dep = simulate(pulse(grid, 4, 4), params, grid)
        assert float(np.abs(dep.deposited["hg2_from_hg0"]).max()) == 0.0

    def test_nonnegative_state_everywhere(self):
        grid = small_grid()
        rng = np.random.default_rng(7)
        params = TransportParams(
            wind_u=rng.uniform(-4, 4, (grid.ny, grid.nx)),
            wind_v=rng.uniform(-4, 4, (grid.ny, grid.nx)),
            diffusivity_m2_s=1500.0,
            vd_per_s={HG0: 1e-6, HG2: 4e-5, HGP: 2e-5},
            k_ox_per_s=1e-6,
            dt_s=0.0,  # set below from the stability bound
            horizon_s=0.0,
            boundary_inflow_g={},
        )
        params.dt_s = 0.9 * max_stable_dt(params, grid)
        params.horizon_s = params.dt_s * 400
        emis = {s: rng.uniform(0, 10, (grid.ny, grid.nx)) for s in SPECIES}
        dep = simulate(emis, params, grid)
        for pool in dep.deposited:
            assert (dep.deposited[pool] >= 0.0).all()
            assert dep.exported[pool] >= 0.0
            assert dep.airborne_residual[pool] >= -1e-15

    def test_cfl_violation_reports_stable_dt(self):
        grid = small_grid()
        params = make_params(grid, u=5.0, dt=1e6)
        with pytest.raises(CflError) as err:
            simulate(pulse(grid, 4, 4), params, grid)
        assert err.value.dt_max_s < 1e6
        assert f"{err.value.dt_max_s:g}" in str(err.value)

    def test_translation_symmetry_on_uniform_wind(self):
        grid = small_grid(n=13)
        params = make_params(grid, u=2.0, v=1.0, vd=(3e-5, 3e-5, 3e-5),
                             dt=1000.0, horizon=3e5)
        a = simulate(pulse(grid, 4, 5), params, grid).deposited["hg2"]
        b = simulate(pulse(grid, 5, 6), params, grid).deposited["hg2"]
        # compare away from boundaries: shift a by (+1, +1) and overlay
        inner_a = a[2:9, 2:9]
        inner_b = b[3:10, 3:10]
        assert np.allclose(inner_a, inner_b, rtol=1e-12, atol=1e-300)

    def test_boundary_inflow_enters_the_ledger(self):
        grid = small_grid()
        params = make_params(
            grid, u=2.0, k=800.0, vd=(1e-6, 1e-5, 1e-5),
            inflow={HG0: 0.5, HG2: 0.2, HGP: 0.0},
        )
        dep = simulate(pulse(grid, 4, 4, (0.0, 0.0, 0.0)), params, grid)
        assert dep.inflow["hg0"] > 0.0
        assert float(dep.deposited["hg0"].sum()) > 0.0
        assert max(dep.balance_residuals().values()) < 1e-12

    def test_non_finite_emissions_rejected(self):
        grid = small_grid()
        params = make_params(grid)
        fields = pulse(grid, 4, 4)
        fields[HG0][0, 0] = np.nan
        with pytest.raises(ConfigError, match="non-finite"):
            simulate(fields, params, grid)


class TestSrm:
    def test_unit_pulse_column_matches_direct_simulation(self):
        grid = small_grid()
        params = make_params(grid, u=2.0, v=0.5, k=500.0, vd=(1e-6, 3e-5, 2e-5), k_ox=1e-6)
        src = grid.flat(4, 4)
        srm = build_srm(params, grid, [src])
        direct = simulate(pulse(grid, 4, 4), params, grid)
        applied = srm.apply(pulse(grid, 4, 4), grid)
        for pool in direct.deposited:
            np.testing.assert_allclose(
                applied.deposited[pool], direct.deposited[pool], rtol=1e-10, atol=1e-300
            )

    def test_linearity_superposition(self):
        grid = small_grid()
        params = make_params(grid, u=2.0, v=-0.5, k=300.0, vd=(1e-6, 3e-5, 2e-5))
        cells = [grid.flat(3, 3), grid.flat(5, 6)]
        srm = build_srm(params, grid, cells)
        e1 = pulse(grid, 3, 3, (2.0, 1.0, 0.5))
        e2 = pulse(grid, 5, 6, (0.3, 4.0, 1.5))
        alpha, beta = 1.7, -0.4
        combined = {s: alpha * e1[s] + beta * e2[s] for s in SPECIES}
        lhs = srm.apply(combined, grid)
        a = srm.apply(e1, grid)
        b = srm.apply(e2, grid)
        for pool in lhs.deposited:
            rhs = alpha * a.deposited[pool] + beta * b.deposited[pool]
            scale = max(np.abs(rhs).max(), 1e-300)
            assert np.abs(lhs.deposited[pool] - rhs).max() / scale < 1e-10

    def test_column_sums_at_most_one(self, demo_bundle):
        grid = demo_bundle.grid
        sources = sorted(
            {grid.flat(*grid.cell_of(p.lat, p.lon)) for p in demo_bundle.plants.values()}
        )
        srm = build_srm(demo_bundle.transport, grid, sources)
        for block, sums in srm.column_sums().items():
            assert (sums >= 0.0).all()
            assert (sums <= 1.0 + 1e-12).all()

    def test_demo_column_sums_match_oracle_golden(self, demo_bundle):
        from conftest import load_golden, rel_err

        grid = demo_bundle.grid
        sources = sorted(
            {grid.flat(*grid.cell_of(p.lat, p.lon)) for p in demo_bundle.plants.values()}
        )
        srm = build_srm(demo_bundle.transport, grid, sources)
        col = {s: j for j, s in enumerate(srm.sources)}
        sums = srm.column_sums()
        for block, source, fraction in load_golden("srm_colsums.csv"):
            got = float(sums[block][col[int(source)]])
            assert rel_err(got, float(fraction), floor=1e-18) < 1e-9

    def test_apply_rejects_off_support_mass(self):
        grid = small_grid()
        params = make_params(grid)
        srm = build_srm(params, grid, [grid.flat(4, 4)])
        stray = pulse(grid, 1, 1)
        with pytest.raises(ConfigError, match="outside the matrix sources"):
            srm.apply(stray, grid)

    def test_empty_sources(self):
        grid = small_grid()
        srm = build_srm(make_params(grid), grid, [])
        dep = srm.apply({s: np.zeros((grid.ny, grid.nx)) for s in SPECIES}, grid)
        assert float(dep.deposited["hg0"].sum()) == 0.0

    def test_save_load_roundtrip(self, tmp_path):
        grid = small_grid()
        params = make_params(grid, u=1.5, k=200.0, vd=(1e-6, 2e-5, 1e-5), k_ox=5e-7)
        srm = build_srm(params, grid, [grid.flat(4, 4), grid.flat(2, 6)])
        path = tmp_path / "srm.txt"
        save_srm(srm, path)
        loaded = load_srm(path)
        assert loaded.sources == srm.sources
        for block in srm.dep_blocks:
            np.testing.assert_array_equal(loaded.dep_blocks[block], srm.dep_blocks[block])
            np.testing.assert_array_equal(loaded.exported[block], srm.exported[block])
            np.testing.assert_array_equal(loaded.residual[block], srm.residual[block])
        np.testing.assert_array_equal(loaded.oxidized, srm.oxidized)

    def test_load_detects_corruption(self, tmp_path):
        grid = small_grid()
        srm = build_srm(make_params(grid, u=1.0), grid, [grid.flat(4, 4)])
        path = tmp_path / "srm.txt"
        save_srm(srm, path)
        text = path.read_text().replace("hg2,", "hgX,", 1)
        path.write_text(text)
        with pytest.raises(ConfigError, match="checksum"):
            load_srm(path)


class TestAggregate:
    def test_all_in_one_province(self):
        grid = small_grid()
        params = make_params(grid, vd=(1e-4, 1e-4, 1e-4), dt=600.0, horizon=6e5)
        dep = simulate(pulse(grid, 4, 4, (2.0, 0.0, 0.0)), params, grid)
        agg = aggregate_to_provinces(dep, grid)
        assert agg["P1"].hg0 == pytest.approx(2.0, rel=1e-12)
        assert agg[OUTSIDE].total() == 0.0

    def test_no_outside_cells_sums_to_domain_total(self):
        mask = tuple("P1" if i % 2 == 0 else "P2" for i in range(81))
        grid = small_grid(mask=mask)
        params = make_params(grid, u=1.0, vd=(5e-5, 5e-5, 5e-5), dt=600.0, horizon=6e5)
        dep = simulate(pulse(grid, 4, 4), params, grid)
        agg = aggregate_to_provinces(dep, grid)
        assert OUTSIDE not in agg
        total = sum(m.total() for m in agg.values())
        by_species = dep.deposited_by_species()
        want = float(sum(by_species[s].sum() for s in SPECIES))
        assert total == pytest.approx(want, rel=1e-12)

    def test_oxidized_mass_counts_as_hg2(self):
        grid = small_grid()
        params = make_params(grid, vd=(1e-5, 1e-4, 1e-4), k_ox=1e-5, dt=600.0, horizon=6e5)
        dep = simulate(pulse(grid, 4, 4, (1.0, 0.0, 0.0)), params, grid)
        agg = aggregate_to_provinces(dep, grid)
        assert agg["P1"].hg2 > 0.0  # only hg0 was emitted

    def test_demo_deposition_matches_oracle_golden(self, all_measures_record):
        from conftest import load_golden, rel_err

        for prov, hg0, hg2, hgp in load_golden("deposition_provinces.csv"):
            mass = all_measures_record.deposition_by_province[prov]
            assert rel_err(mass.hg0, float(hg0), floor=1e-12) < 1e-9
            assert rel_err(mass.hg2, float(hg2), floor=1e-12) < 1e-9
            assert rel_err(mass.hgp, float(hgp), floor=1e-12) < 1e-9


class TestGridSpec:
    def test_cell_mapping_roundtrip(self):
        grid = small_grid()
        for ix, iy in ((0, 0), (4, 7), (8, 8)):
            lat, lon = grid.cell_center(ix, iy)
            assert grid.cell_of(lat, lon) == (ix, iy)

    def test_outside(self):
        grid = small_grid()
        assert grid.cell_of(0.0, 0.0) is None

    def test_mask_length_validated(self):
        with pytest.raises(ValueError, match="mask"):
            GridSpec(3, 3, 50.0, 30.0, 110.0, ("P1",) * 8)
