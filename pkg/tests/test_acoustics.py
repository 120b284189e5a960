import numpy as np
import pytest
from numpy.testing import assert_allclose
from PyLBT.generators import (ArrayGeometry, Room, SourcePlacement, Scenario, sample_scenario, geometry_truth,
                              reflection_coefficient, simulate_rir, simulate_rirs, direct_rir, estimate_t60,
                              direct_to_reverberant_ratio, spatialize, scenario_rirs, SPEED_OF_SOUND,
                              MixtureGenerator, ScenarioGenerator, SpeechGenerator)
from PyLBT.generators.image_method import SINC_TAPS, RIR_LEAD, convolve, energy_decay_curve


MIC = np.array([2.6, 2.4, 1.5])
SRC = np.array([0.8, 1.2, 1.5])


def make_scenario(azimuths, distances, t60=0.0, kind='circular'):
    room = Room(dims=(5.0, 5.0, 3.0), t60=t60)
    center = (2.5, 2.5, 1.5)
    array = ArrayGeometry.linear(center=center) if kind == 'linear' else ArrayGeometry.circular(center=center)
    sources = tuple(SourcePlacement(float(a), float(d)) for a, d in zip(azimuths, distances))
    return Scenario(room=room, array=array, sources=sources, azimuth_resolution=5.0, seed=0)


class TestImageMethod:
    def test_reflection_coefficient(self):
        assert reflection_coefficient(Room((5, 5, 3), 0.0)) == 0.0
        room = Room((5, 5, 3), 0.4)
        eyring = reflection_coefficient(room, 'eyring')
        sabine = reflection_coefficient(room, 'sabine')
        assert 0 < sabine < eyring <= 0.999
        assert reflection_coefficient(room) == sabine
        with pytest.raises(ValueError):
            reflection_coefficient(room, 'millington')

    def test_direct_tap_delay(self):
        room = Room((5.0, 4.0, 3.0), 0.0)
        rir = simulate_rir(room, SRC, MIC)
        expected = np.linalg.norm(SRC - MIC) * 16000 / SPEED_OF_SOUND
        assert abs(np.flatnonzero(rir)[0] - expected) <= 1
        assert abs(np.argmax(np.abs(rir)) - RIR_LEAD - expected) <= 1

    def test_close_source_keeps_the_whole_kernel(self):
        room = Room((5.0, 4.0, 3.0), 0.0)
        src = MIC - [0.3, 0.0, 0.0]
        rir = simulate_rir(room, src, MIC)
        expected = 0.3 * 16000 / SPEED_OF_SOUND
        assert abs(np.flatnonzero(rir)[0] - expected) <= 1
        assert np.count_nonzero(rir) >= SINC_TAPS - 1
        assert np.sum(rir) * 4 * np.pi * 0.3 == pytest.approx(1.0, abs=0.02)

    def test_convolve_restores_the_path_delay(self):
        dry = np.zeros(400)
        dry[0] = 1.0
        wet = convolve(dry, direct_rir(SRC, MIC), len(dry))
        expected = np.linalg.norm(SRC - MIC) * 16000 / SPEED_OF_SOUND
        assert abs(np.argmax(wet) - expected) <= 1

    def test_inverse_distance_law(self):
        # whole-sample delays put the direct path on a single tap
        near, far = SPEED_OF_SOUND * 50 / 16000, SPEED_OF_SOUND * 100 / 16000
        peaks = [np.max(np.abs(direct_rir(MIC + [d, 0.0, 0.0], MIC))) for d in [near, far]]
        assert peaks[0] == pytest.approx(1 / (4 * np.pi * near), rel=1e-9)
        assert peaks[0] / peaks[1] == pytest.approx(far / near, rel=1e-6)

    def test_mirrored_pair_has_the_same_decay(self):
        room = Room((5.0, 4.0, 3.0), 0.3)
        dims = np.array(room.dims)
        a = simulate_rir(room, SRC, MIC)
        b = simulate_rir(room, dims - SRC, dims - MIC)
        edc_a, edc_b = energy_decay_curve(a), energy_decay_curve(b)
        keep = edc_a > -60
        assert_allclose(edc_b[keep], edc_a[keep], atol=1e-10)

    def test_anechoic_is_direct_path(self):
        room = Room((5.0, 4.0, 3.0), 0.0)
        rir = simulate_rir(room, SRC, MIC)
        assert_allclose(rir, direct_rir(SRC, MIC, taps=len(rir)))
        assert direct_to_reverberant_ratio(rir, direct_rir(SRC, MIC, taps=len(rir))) == np.inf

    def test_causal(self):
        room = Room((5.0, 4.0, 3.0), 0.2)
        rir = simulate_rir(room, SRC, MIC)
        delay = np.linalg.norm(SRC - MIC) * 16000 / SPEED_OF_SOUND
        assert np.all(rir[:int(delay) - 1] == 0)

    def test_shared_image_set(self):
        room = Room((5.0, 4.0, 3.0), 0.2)
        mics = np.stack([MIC, MIC + [0.05, 0.0, 0.0]])
        rirs = simulate_rirs(room, SRC, mics)
        assert rirs.shape[0] == 2
        assert_allclose(rirs[1], simulate_rir(room, SRC, mics[1], taps=rirs.shape[1]))

    @pytest.mark.parametrize('t60', [0.15, 0.3, 0.6])
    def test_schroeder_t60(self, t60):
        room = Room((5.0, 4.0, 3.0), t60)
        rir = simulate_rir(room, SRC, MIC, absorption='eyring')
        assert estimate_t60(rir) == pytest.approx(t60, rel=0.2)

    @pytest.mark.parametrize('t60', [0.3, 0.6])
    def test_sabine_decay(self, t60):
        # image sources decay at the Eyring rate of the Sabine absorption
        room = Room((5.0, 4.0, 3.0), t60)
        ratio = 0.161 * room.volume / (t60 * room.surface_area)
        expected = t60 * ratio / -np.log(1.0 - ratio)
        sabine = estimate_t60(simulate_rir(room, SRC, MIC))
        assert sabine == pytest.approx(expected, rel=0.2)
        assert sabine < estimate_t60(simulate_rir(room, SRC, MIC, absorption='eyring'))

    def test_drr_falls_with_distance(self):
        room = Room((5.0, 4.0, 3.0), 0.3)
        near = MIC + [0.5, 0.0, 0.0]
        drr = []
        for src in [near, SRC]:
            rir = simulate_rir(room, src, MIC)
            drr.append(direct_to_reverberant_ratio(rir, direct_rir(src, MIC, taps=len(rir))))
        assert np.isfinite(drr).all()
        assert drr[0] > drr[1]

    def test_points_outside_room(self):
        room = Room((5.0, 4.0, 3.0), 0.2)
        with pytest.raises(ValueError):
            simulate_rir(room, [6.0, 1.0, 1.0], MIC)
        with pytest.raises(ValueError):
            simulate_rir(room, MIC, MIC)


class TestScenario:
    def test_circular_array(self):
        array = ArrayGeometry.circular()
        assert array.n_mics == 7
        assert array.offsets[0] == (0.0, 0.0, 0.0)
        assert_allclose(np.linalg.norm(array.mic_offsets[1:], axis=1), 0.0425)

    def test_protocol_constraints(self):
        rng = np.random.RandomState(0)
        for i in range(2000):
            n = 1 + i % 5
            scenario = sample_scenario(rng, n_speakers=n, azimuth_resolution=[1, 5][i % 2], reverberant=i % 3 > 0)
            assert scenario.check() == []
            t60 = scenario.room.t60
            assert t60 == 0 or 0.15 <= t60 <= 0.6

    def test_gap_fraction(self):
        rng = np.random.RandomState(1)
        gaps = [sample_scenario(rng, n_speakers=2, azimuth_resolution=1, reverberant=False).min_gap for _ in range(4000)]
        assert np.mean(np.array(gaps) < 20) == pytest.approx(38 / 359, abs=0.02)

    @pytest.mark.slow
    def test_protocol_constraints_at_scale(self):
        rng = np.random.RandomState(2)
        gaps = []
        for i in range(100000):
            scenario = sample_scenario(rng, n_speakers=2, azimuth_resolution=1, reverberant=i % 2 == 0)
            assert scenario.check() == []
            gaps.append(scenario.min_gap)
        assert np.mean(np.array(gaps) < 20) == pytest.approx(0.12, abs=0.02)

    def test_seed_is_reproducible(self):
        assert sample_scenario(123).to_dict() == sample_scenario(123).to_dict()
        assert sample_scenario(123).seed == 123

    def test_gap_constraints(self):
        wide = ScenarioGenerator(n_speakers=3, min_gap=60, seed=0).generate(50)
        assert all(s.min_gap >= 60 for s in wide)
        close = ScenarioGenerator(n_speakers=2, azimuth_resolution=1, max_gap=15, seed=0).generate(50)
        assert all(s.min_gap <= 15 for s in close)

    def test_unsatisfiable(self):
        with pytest.raises(RuntimeError):
            sample_scenario(1, n_speakers=5, min_gap=100, max_retries=50)
        with pytest.raises(ValueError):
            sample_scenario(1, n_speakers=6)
        with pytest.raises(ValueError):
            sample_scenario(1, azimuth_resolution=2)

    def test_dict_round_trip(self):
        scenario = sample_scenario(42, n_speakers=3)
        again = Scenario.from_dict(scenario.to_dict())
        assert again.to_dict() == scenario.to_dict()
        assert again.hash() == scenario.hash()

    def test_check_reports_violations(self):
        bad = make_scenario([0, 0], [1.0, 1.1])
        problems = bad.check()
        assert any('duplicate' in p for p in problems)
        assert any('closer' in p for p in problems)


class TestGeometryTruth:
    def test_circular(self):
        scenario = make_scenario([90, -90, 0], [1.0, 2.0, 1.5])
        assert geometry_truth(scenario) == ((2, 0, 1), (0, 2, 1))

    def test_linear_folds_front_and_back(self):
        scenario = make_scenario([30, 150, -30], [1.0, 0.5, 0.8], kind='linear')
        az_order, dist_order = geometry_truth(scenario)
        assert az_order == (2, 0, 1)
        assert dist_order == (1, 2, 0)
        assert geometry_truth(scenario, array_kind='circular')[0] == (0, 1, 2)

    def test_distance_ties_go_to_smaller_azimuth(self):
        scenario = make_scenario([100, 20], [1.0, 1.0])
        assert geometry_truth(scenario)[1] == (1, 0)


class TestSpatialize:
    def test_anechoic_mixture_is_sum_of_targets(self, anechoic_pair):
        ex = anechoic_pair
        assert ex.mixture.shape == (7, 8000)
        assert ex.targets.shape == (2, 8000)
        assert_allclose(ex.mixture[0], ex.targets.sum(axis=0), atol=1e-12)
        assert all(d == np.inf for d in ex.drr_db)

    def test_reverberant(self, speech):
        scenario = make_scenario([0, 120], [1.0, 1.6], t60=0.2)
        ex = spatialize(speech, scenario)
        assert ex.mixture.shape == (7, 16000)
        assert all(np.isfinite(ex.drr_db))
        assert not np.allclose(ex.mixture[0], ex.targets.sum(axis=0))

    def test_linear_in_the_dry_signals(self, speech, rng):
        scenario = make_scenario([0, 120], [1.0, 1.6], t60=0.2)
        other = [rng.standard_normal(len(x)) * 0.1 for x in speech]
        summed = spatialize([x + y for x, y in zip(speech, other)], scenario)
        a, b = spatialize(speech, scenario), spatialize(other, scenario)
        assert_allclose(summed.mixture, a.mixture + b.mixture, atol=1e-10)
        assert_allclose(summed.targets, a.targets + b.targets, atol=1e-10)

    def test_validation(self, speech):
        scenario = make_scenario([0, 120], [1.0, 1.6])
        with pytest.raises(ValueError):
            spatialize(speech, scenario, fs=8000)
        with pytest.raises(ValueError):
            spatialize(speech[:1], scenario)
        with pytest.raises(ValueError):
            spatialize([np.zeros((2, 10)), speech[1]], scenario)

    def test_rir_cache(self, tmp_path):
        scenario = make_scenario([0, 120], [1.0, 1.6])
        rirs, direct = scenario_rirs(scenario, cache_dir=str(tmp_path))
        assert len(list(tmp_path.iterdir())) == 1
        cached, cached_direct = scenario_rirs(scenario, cache_dir=str(tmp_path))
        assert_allclose(cached, rirs)
        assert_allclose(cached_direct, direct)
        assert rirs.shape[:2] == (2, 7) and direct.shape == (2, rirs.shape[2])


class TestGenerators:
    def test_speech(self):
        a = SpeechGenerator(duration=0.5, level=0.4, seed=1).generate(3)
        b = SpeechGenerator(duration=0.5, level=0.4, seed=1).generate(3)
        assert len(a) == 3 and all(len(x) == 8000 for x in a)
        assert all(np.max(np.abs(x)) == pytest.approx(0.4) for x in a)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert not np.array_equal(a[0], a[1])

    def test_mixtures_are_reproducible(self, anechoic_pair):
        again = MixtureGenerator(n_speakers=2, duration=0.5, reverberant=False, min_gap=60, seed=7).generate(1)[0]
        assert again.example_id == anechoic_pair.example_id == '000000'
        assert np.array_equal(again.mixture, anechoic_pair.mixture)

    def test_dry_pool(self, speech):
        pool = [('a.wav', speech[0]), ('b.wav', speech[1]), ('c.wav', speech[0][::-1].copy())]
        examples = MixtureGenerator(n_speakers=2, duration=0.25, reverberant=False, seed=3).generate(2, dry=pool)
        assert [e.example_id for e in examples] == ['000000', '000001']
        for e in examples:
            assert len(set(e.utterance_ids)) == 2
            assert set(e.utterance_ids) <= {'a.wav', 'b.wav', 'c.wav'}
            assert e.length == 4000
        with pytest.raises(ValueError):
            MixtureGenerator(n_speakers=2, seed=3).generate(1, dry=pool[:1])

    def test_zero_examples(self):
        assert MixtureGenerator(seed=0).generate(0) == []
