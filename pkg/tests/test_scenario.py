import json

import numpy as np
import pytest

from edsense.errors import DomainError, EnumerationSizeError, ScenarioFormatError
from edsense.scenario import (
    OccupancySet,
    PuProfile,
    RawLink,
    Scenario,
    active_mixture,
    enumerate_occupancies,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

FIG2_INR_DB = (0.0, -1.0, -2.0, -3.0, -5.0)


def multi_pu_scenario(p=0.5, noise_var=1.0, num_samples=5):
    pus = [PuProfile.from_snr_db(0.0, m=1, activity_prior=0.5)]
    pus += [PuProfile.from_snr_db(inr, m=1, activity_prior=p) for inr in FIG2_INR_DB]
    return Scenario(noise_var=noise_var, num_samples=num_samples, pus=tuple(pus))


class TestEnumerateOccupancies:
    def test_single_user_busy(self):
        scn = Scenario(1.0, 5, (PuProfile(1, 1.0, 0.7),))
        out = enumerate_occupancies(scn, "pu1_busy")
        assert out == [(OccupancySet((True,)), 1.0)]

    def test_uniform_bernoulli_product(self):
        pus = tuple(PuProfile(1, 1.0, 0.5) for _ in range(3))
        scn = Scenario(1.0, 5, pus)
        out = enumerate_occupancies(scn, "pu1_busy")
        assert len(out) == 4
        for occ, prior in out:
            assert occ.flags[0] is True
            assert prior == pytest.approx(0.25)

    def test_all_idle_prior(self):
        scn = multi_pu_scenario(p=0.5)
        out = enumerate_occupancies(scn, "pu1_idle")
        assert len(out) == 32
        idle_priors = [pr for occ, pr in out if occ.num_active == 0]
        assert idle_priors == [pytest.approx(0.5**5)]

    def test_priors_sum_to_one(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            m = int(rng.integers(1, 9))
            pus = tuple(
                PuProfile(1, 1.0, float(rng.uniform(0, 1))) for _ in range(m)
            )
            scn = Scenario(1.0, 5, pus)
            for hyp in ("pu1_busy", "pu1_idle"):
                total = sum(pr for _, pr in enumerate_occupancies(scn, hyp))
                assert total == pytest.approx(1.0, abs=1e-14)

    def test_hypothesis_pins_first_flag(self):
        scn = multi_pu_scenario()
        assert all(o.flags[0] for o, _ in enumerate_occupancies(scn, "pu1_busy"))
        assert not any(o.flags[0] for o, _ in enumerate_occupancies(scn, "pu1_idle"))

    def test_unknown_hypothesis(self):
        scn = multi_pu_scenario()
        with pytest.raises(DomainError):
            enumerate_occupancies(scn, "busy")

    def test_size_cap(self):
        pus = tuple(PuProfile(1, 1.0, 0.5) for _ in range(21))
        scn = Scenario(1.0, 5, pus)
        with pytest.raises(EnumerationSizeError):
            enumerate_occupancies(scn, "pu1_busy")


class TestActiveMixture:
    def test_single_user_zero_db(self):
        scn = Scenario(1.0, 5, (PuProfile(1, 1.0, 0.5),))
        mix = active_mixture(scn, OccupancySet((True,)))
        assert mix.offset == 0.5
        assert [(c.shape, c.scale) for c in mix.components] == [(1, 0.5)]

    def test_equal_scale_users_merge(self):
        pus = (PuProfile(1, 1.0, 0.5), PuProfile(1, 1.0, 0.5))
        scn = Scenario(1.0, 5, pus)
        mix = active_mixture(scn, OccupancySet((True, True)))
        assert [(c.shape, c.scale) for c in mix.components] == [(2, 0.5)]
        assert mix.offset == 0.5

    def test_interferer_scales_from_inr(self):
        scn = multi_pu_scenario()
        occ = OccupancySet((False,) + (True,) * 5)
        mix = active_mixture(scn, occ)
        # scale_i = 10^(INR_i/10) / 2 with unit noise variance
        expected_exact = [10.0 ** (v / 10.0) / 2.0 for v in FIG2_INR_DB]
        assert np.allclose(mix.scales, expected_exact, rtol=1e-15)
        assert np.allclose(mix.scales, [0.5, 0.3972, 0.3155, 0.2506, 0.1581],
                           atol=5e-5)

    def test_offset_independent_of_occupancy(self):
        scn = multi_pu_scenario(noise_var=3.7)
        for flags in [(True,) * 6, (True,) + (False,) * 5,
                      (False, True, False, True, False, True)]:
            assert active_mixture(scn, OccupancySet(flags)).offset == 3.7 / 2.0

    def test_all_idle_rejected(self):
        scn = multi_pu_scenario()
        with pytest.raises(DomainError):
            active_mixture(scn, OccupancySet((False,) * 6))

    def test_length_mismatch(self):
        scn = multi_pu_scenario()
        with pytest.raises(DomainError):
            active_mixture(scn, OccupancySet((True,)))

    def test_nakagami_shape_becomes_gamma_shape(self):
        scn = Scenario(2.0, 5, (PuProfile(3, 2.0, 0.5),))
        mix = active_mixture(scn, OccupancySet((True,)))
        assert [(c.shape, c.scale) for c in mix.components] == [
            (3, pytest.approx(2.0 * 2.0 / 6.0))
        ]


class TestPuProfile:
    def test_avg_snr_round_trip_from_raw(self):
        raw = RawLink(distance=120.0, path_loss_exp=3.2, signal_var=4.0,
                      channel_var=1.6)
        noise_var = 0.8
        p = PuProfile.from_raw(2, 0.3, raw, noise_var)
        expected = 120.0 ** (-3.2) * 1.6 * 4.0 / 0.8
        assert p.avg_snr == expected
        assert p.channel_var == 1.6

    def test_snr_db_conversion(self):
        assert PuProfile.from_snr_db(0.0).avg_snr == 1.0
        assert PuProfile.from_snr_db(5.0).avg_snr == pytest.approx(
            3.1622776601683795, rel=1e-15
        )

    def test_default_channel_var(self):
        assert PuProfile(1, 2.0, 0.5).channel_var == 1.0

    @pytest.mark.parametrize(
        "kw",
        [
            {"nakagami_m": 0, "avg_snr": 1.0, "activity_prior": 0.5},
            {"nakagami_m": 1.5, "avg_snr": 1.0, "activity_prior": 0.5},
            {"nakagami_m": 1, "avg_snr": -1.0, "activity_prior": 0.5},
            {"nakagami_m": 1, "avg_snr": 1.0, "activity_prior": 1.5},
        ],
    )
    def test_validation(self, kw):
        with pytest.raises(DomainError):
            PuProfile(**kw)


class TestScenarioJson:
    def doc(self):
        return {
            "noise_var": 1.0,
            "num_samples": 5,
            "pus": [
                {"snr_db": 0.0, "m": 1, "activity_prior": 0.5},
                {"snr_db": -2.0, "m": 2, "activity_prior": 0.25},
            ],
        }

    def test_parse(self):
        scn = scenario_from_dict(self.doc())
        assert scn.num_pus == 2
        assert scn.pus[1].nakagami_m == 2
        assert scn.pus[1].avg_snr == pytest.approx(10.0 ** -0.2)

    def test_raw_quadruple(self):
        doc = self.doc()
        doc["pus"][0] = {
            "m": 1,
            "activity_prior": 0.5,
            "distance": 10.0,
            "path_loss_exp": 2.0,
            "signal_var": 50.0,
            "channel_var": 1.0,
        }
        scn = scenario_from_dict(doc)
        assert scn.pus[0].avg_snr == pytest.approx(0.5)

    def test_unknown_top_level_key_rejected(self):
        doc = self.doc()
        doc["bandwidth"] = 5e6
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict(doc)

    def test_unknown_pu_key_rejected(self):
        doc = self.doc()
        doc["pus"][0]["snr"] = 1.0
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict(doc)

    def test_mixed_link_spec_rejected(self):
        doc = self.doc()
        doc["pus"][0].update(distance=1.0, path_loss_exp=2.0, signal_var=1.0,
                             channel_var=1.0)
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict(doc)

    def test_partial_raw_rejected(self):
        doc = self.doc()
        doc["pus"][0] = {"m": 1, "activity_prior": 0.5, "distance": 2.0}
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict(doc)

    def test_missing_fields_rejected(self):
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict({"noise_var": 1.0, "num_samples": 5})
        doc = self.doc()
        del doc["pus"][0]["m"]
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict(doc)

    def test_non_integer_samples_rejected(self):
        doc = self.doc()
        doc["num_samples"] = 4.5
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict(doc)

    def test_round_trip(self):
        scn = scenario_from_dict(self.doc())
        again = scenario_from_dict(scenario_to_dict(scn))
        assert again.noise_var == scn.noise_var
        assert [p.avg_snr for p in again.pus] == pytest.approx(
            [p.avg_snr for p in scn.pus]
        )

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "scn.json"
        path.write_text(json.dumps(self.doc()))
        scn = load_scenario(path)
        assert scn.num_samples == 5

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ScenarioFormatError):
            load_scenario(path)


class TestOccupancySet:
    def test_views(self):
        occ = OccupancySet((True, False, True))
        assert occ.active_indices == (0, 2)
        assert occ.num_active == 2
