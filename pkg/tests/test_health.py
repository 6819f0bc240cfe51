import pytest

from hgimpact.errors import ConfigError
from hgimpact.exposure import IntakeProfile
from hgimpact.health import (
    AttributionTensor,
    DoseResponse,
    attribute,
    cvd_endpoint,
    group_inventory,
    health_outcome,
    iq_endpoint,
    rank_report,
)
from hgimpact.inventory import Measure


def make_dr(form="linear", beta=0.066, k=10.0, gamma=0.18, mortality=1000.0):
    return DoseResponse(
        hair_per_intake=k,
        iq_points_per_hair=gamma,
        cvd_form=form,
        cvd_beta_per_hair=beta,
        baseline_mortality={"A": mortality, "B": mortality},
        baseline_hair={"A": 0.5, "B": 0.5},
    )


def make_intake():
    return IntakeProfile(
        intake_kg_day={},
        body_weight_kg={"A": 60.0, "B": 60.0},
        population={"A": 1e7, "B": 2e7},
        births_per_yr={"A": 1e5, "B": 3e5},
    )


class TestIq:
    def test_zero_dose_zero_iq(self):
        pf, total = iq_endpoint({"A": 0.0}, make_dr(), make_intake())
        assert pf["A"] == 0.0 and total["A"] == 0.0

    def test_configured_product(self):
        # gamma=0.18, k=10, dEDI=0.001 -> 0.0018 points per foetus
        pf, total = iq_endpoint({"A": 0.001}, make_dr(), make_intake())
        assert pf["A"] == pytest.approx(0.0018, rel=1e-12)
        assert total["A"] == pytest.approx(0.0018 * 1e5, rel=1e-12)

    def test_linearity(self):
        pf1, _ = iq_endpoint({"A": 0.001}, make_dr(), make_intake())
        pf2, _ = iq_endpoint({"A": 0.002}, make_dr(), make_intake())
        assert pf2["A"] == pytest.approx(2.0 * pf1["A"], rel=1e-12)


class TestCvd:
    def test_zero_dose_zero_deaths_both_modes(self):
        for form in ("linear", "log-linear"):
            out = cvd_endpoint({"A": 0.0}, make_dr(form=form))
            assert out["A"] == 0.0

    def test_linear_direct_product(self):
        # beta*k*dEDI = 0.01 on 1000 baseline deaths -> 10 avoided
        dr = make_dr(beta=0.1, k=10.0)
        out = cvd_endpoint({"A": 0.01}, dr)
        assert out["A"] == pytest.approx(10.0, rel=1e-12)

    def test_log_linear_below_linear(self):
        dr_lin = make_dr(form="linear", beta=0.2)
        dr_log = make_dr(form="log-linear", beta=0.2)
        for dose in (1e-4, 1e-2, 0.5, 2.0):
            lin = cvd_endpoint({"A": dose}, dr_lin)["A"]
            log = cvd_endpoint({"A": dose}, dr_log)["A"]
            assert log <= lin
            assert 0.0 <= log <= 1000.0  # bounded by baseline mortality

    def test_unknown_form_rejected(self):
        dr = make_dr(form="quadratic")
        with pytest.raises(ConfigError, match="cvd_form"):
            cvd_endpoint({"A": 0.1}, dr)


class TestOutcome:
    def test_national_per_foetus_is_births_weighted(self):
        out = health_outcome({"A": 0.001, "B": 0.004}, make_dr(), make_intake())
        # births A=1e5, B=3e5  ->  weights 0.25 / 0.75
        want = 0.25 * out.iq_per_foetus["A"] + 0.75 * out.iq_per_foetus["B"]
        assert out.national_iq_per_foetus == pytest.approx(want, rel=1e-12)

    def test_signs_follow_dose_in_linear_mode(self):
        out = health_outcome({"A": -0.001, "B": 0.002}, make_dr(), make_intake())
        assert out.iq_per_foetus["A"] < 0.0 < out.iq_per_foetus["B"]
        assert out.avoided_deaths["A"] < 0.0 < out.avoided_deaths["B"]


class TestAttributionTensor:
    def _tensor(self, entries, receptors=("A", "B")):
        return AttributionTensor(mode="linear", receptors=receptors, entries=entries)

    def test_single_group_equals_total(self):
        entries = {
            ("A", "A", "SUS", "LOCAL", "<100"): (3.0, 0.1),
            ("B", "A", "SUS", "LOCAL", "<100"): (1.0, 0.05),
        }
        t = self._tensor(entries)
        assert t.receptor_totals() == {"A": (3.0, 0.1), "B": (1.0, 0.05)}

    def test_cross_border_splits(self):
        entries = {
            ("A", "A", "SUS", "L", "<100"): (5.0, 0.0),
            ("A", "B", "SUS", "L", "<100"): (2.0, 0.0),
            ("B", "A", "APCD", "L", "<100"): (1.0, 0.0),
        }
        received, exported = self._tensor(entries).cross_border()
        assert received == {"A": 2.0, "B": 1.0}
        assert exported == {"B": 2.0, "A": 1.0}

    def test_rank_tie_breaks_by_identifier(self):
        entries = {
            ("A", "B", "SUS", "L", "<100"): (1.0, 1.0),
            ("B", "A", "SUS", "L", "<100"): (1.0, 1.0),
        }
        report = rank_report(self._tensor(entries))
        assert report.top_receivers == [("A", 1.0), ("B", 1.0)]
        assert report.top_exporters == [("A", 1.0), ("B", 1.0)]

    def test_dominant_source_ranks_first(self):
        entries = {
            ("A", "B", "SUS", "L", "<100"): (10.0, 0.0),
            ("B", "A", "SUS", "L", "<100"): (0.1, 0.0),
        }
        report = rank_report(self._tensor(entries))
        assert report.top_exporters[0][0] == "B"
        assert report.top_receivers[0][0] == "A"

    def test_measure_shares(self):
        entries = {
            ("A", "A", "SUS", "L", "<100"): (3.0, 0.3),
            ("A", "A", "APCD", "L", "<100"): (1.0, 0.1),
        }
        report = rank_report(self._tensor(entries, receptors=("A",)))
        assert report.measure_shares["SUS"][0] == pytest.approx(0.75, rel=1e-12)
        assert report.measure_shares["APCD"][0] == pytest.approx(0.25, rel=1e-12)


class TestGrouping:
    def test_group_partition_covers_inventory(self, demo_bundle):
        from hgimpact.inventory import build_inventory

        inv = {
            m: build_inventory(
                [demo_bundle.plants[p] for p in sorted(demo_bundle.plants)],
                demo_bundle.provinces,
                m,
            )
            for m in Measure
        }
        groups = group_inventory(inv, demo_bundle.plants)
        pairs = {
            (key[1], pid) for key, members in groups.items() for pid in members
        }
        want = {(m.value, pid) for m in inv for pid in inv[m]}
        assert pairs == want

    def test_partition_gap_rejected(self, demo_bundle, all_measures_record):
        from hgimpact.inventory import build_inventory
        from hgimpact.transport import build_srm

        inv = {
            Measure.SUS: build_inventory(
                [demo_bundle.plants[p] for p in sorted(demo_bundle.plants)],
                demo_bundle.provinces,
                Measure.SUS,
            )
        }
        groups = group_inventory(inv, demo_bundle.plants)
        # drop one plant from its group -> partition no longer covers
        first_key = sorted(groups)[0]
        victim = sorted(groups[first_key])[0]
        del groups[first_key][victim]
        grid = demo_bundle.grid
        srm = build_srm(
            demo_bundle.transport,
            grid,
            sorted({grid.flat(*grid.cell_of(p.lat, p.lon)) for p in demo_bundle.plants.values()}),
        )
        with pytest.raises(ConfigError, match="partition"):
            attribute(
                srm, groups, inv, demo_bundle.plants, grid,
                demo_bundle.food, demo_bundle.trade, demo_bundle.intake,
                demo_bundle.dose_response,
            )


class TestAttributionDemo:
    def test_linear_closure(self, all_measures_record):
        totals = all_measures_record.attribution.receptor_totals()
        for prov in all_measures_record.provinces:
            deaths, iq = totals[prov]
            want_d = all_measures_record.outcome.avoided_deaths[prov]
            want_iq = all_measures_record.outcome.iq_total[prov]
            assert deaths == pytest.approx(want_d, rel=1e-9)
            assert iq == pytest.approx(want_iq, rel=1e-9)

    def test_matches_oracle_golden(self, all_measures_record):
        from conftest import load_golden, rel_err

        entries = all_measures_record.attribution.entries
        golden = load_golden("attribution.csv")
        assert len(golden) == len(entries)
        for receptor, source, measure, company, cls, deaths, iq in golden:
            got = entries[(receptor, source, measure, company, cls)]
            assert rel_err(got[0], float(deaths), floor=1e-18) < 1e-9
            assert rel_err(got[1], float(iq), floor=1e-18) < 1e-9

    def test_rankings_match_oracle_golden(self, all_measures_record):
        from conftest import load_golden, rel_err

        ranking = all_measures_record.ranking
        golden = load_golden("rankings.csv")
        receivers = [(r[2], float(r[3])) for r in golden if r[0] == "top_receivers"]
        exporters = [(r[2], float(r[3])) for r in golden if r[0] == "top_exporters"]
        assert [p for p, _ in ranking.top_receivers] == [p for p, _ in receivers]
        assert [p for p, _ in ranking.top_exporters] == [p for p, _ in exporters]
        for (p, got), (_, want) in zip(ranking.top_receivers, receivers):
            assert rel_err(got, want, floor=1e-18) < 1e-9
        shares_d = {r[2]: float(r[3]) for r in golden if r[0] == "measure_share_deaths"}
        for measure, (d_share, _) in ranking.measure_shares.items():
            assert rel_err(d_share, shares_d[measure], floor=1e-18) < 1e-9

    def test_homogeneity_and_cross_border_ratio_invariance(self, demo_bundle, demo_dir):
        """Scaling all plant activity by L scales linear outcomes by L and
        leaves every receptor's cross-border share unchanged."""
        import dataclasses

        from hgimpact.scenario import parse_scenario_file, run

        lam = 3.0
        scaled_plants = {
            pid: dataclasses.replace(
                p,
                coal_t1_tons=p.coal_t1_tons * lam,
                coal_t2_tons=p.coal_t2_tons * lam,
                power_t2_kwh=p.power_t2_kwh * lam,
            )
            for pid, p in demo_bundle.plants.items()
        }
        scaled_bundle = dataclasses.replace(demo_bundle, plants=scaled_plants)
        scenario = parse_scenario_file(demo_dir / "scenarios" / "all_measures.txt")
        base = run(scenario, demo_bundle)
        scaled = run(scenario, scaled_bundle)
        for prov in base.provinces:
            assert scaled.outcome.avoided_deaths[prov] == pytest.approx(
                lam * base.outcome.avoided_deaths[prov], rel=1e-9
            )
            assert scaled.outcome.iq_total[prov] == pytest.approx(
                lam * base.outcome.iq_total[prov], rel=1e-9
            )
        base_recv, _ = base.attribution.cross_border()
        scaled_recv, _ = scaled.attribution.cross_border()
        for prov in base.provinces:
            total_b = base.attribution.receptor_totals()[prov][0]
            total_s = scaled.attribution.receptor_totals()[prov][0]
            share_b = base_recv[prov] / total_b
            share_s = scaled_recv[prov] / total_s
            assert share_s == pytest.approx(share_b, rel=1e-9)

    def test_log_linear_mode_reports_small_residual(self, demo_bundle, demo_dir):
        from hgimpact.scenario import parse_scenario_file, run

        dr = demo_bundle.dose_response
        log_dr = DoseResponse(
            hair_per_intake=dr.hair_per_intake,
            iq_points_per_hair=dr.iq_points_per_hair,
            cvd_form="log-linear",
            cvd_beta_per_hair=dr.cvd_beta_per_hair,
            baseline_mortality=dr.baseline_mortality,
            baseline_hair=dr.baseline_hair,
        )
        import dataclasses

        bundle = dataclasses.replace(demo_bundle, dose_response=log_dr)
        scenario = parse_scenario_file(demo_dir / "scenarios" / "all_measures.txt")
        record = run(scenario, bundle)
        assert record.attribution.mode == "log-linear"
        for prov in record.provinces:
            total = record.outcome.avoided_deaths[prov]
            residual = record.attribution.deaths_residual[prov]
            assert abs(residual) < 0.05 * abs(total)
            # linearized entries plus the residual reproduce the nonlinear total
            marginal = record.attribution.receptor_totals()[prov][0]
            assert marginal + residual == pytest.approx(total, rel=1e-9)
