import numpy as np
import pytest
from numpy.testing import assert_allclose
from PyLBT.models import DenseUNet, SeparatorConfig, OracleSeparator, CombinedSeparator
from PyLBT.models.layers import FrequencyMapping
from PyLBT.solvers import Tensor
from PyLBT.criteria import Criterion, lbt_assign, speaker_order
from PyLBT.generators import MixtureGenerator
from PyLBT.utils import apply_cirm, si_snr


def tiny_model(n_speakers=2, **kwargs):
    params = dict(n_speakers=n_speakers, n_mics=7, n_freqs=257, depth=2, n_blocks=3, n_convs=2, channels=4, lr=3e-3, seed=0)
    params.update(kwargs)
    return DenseUNet(**params)


class TestSeparatorConfig:
    def test_validation(self):
        for bad in [dict(n_blocks=2), dict(depth=1, n_blocks=5), dict(channels=0), dict(input_norm='batch'), dict(depth=-1)]:
            with pytest.raises(ValueError):
                SeparatorConfig(**bad)

    def test_block_levels(self):
        assert SeparatorConfig(depth=2, n_blocks=3).block_levels() == [1]
        assert SeparatorConfig(depth=3, n_blocks=1).block_levels() == []
        big = SeparatorConfig.full_scale()
        assert (big.depth, big.n_blocks, big.n_convs, big.channels) == (4, 9, 5, 64)
        assert big.block_levels() == [0, 1, 2, 3]
        assert big.padded_freqs == 272

    def test_dict(self):
        cfg = SeparatorConfig(n_speakers=3, channels=5)
        assert SeparatorConfig.from_dict(cfg.to_dict()) == cfg


class TestDenseUNet:
    def test_inputs_are_padded_by_reflection(self, rng):
        model = tiny_model()
        x = rng.standard_normal((1, 3, 5, 6))
        padded = model._pad(x)
        assert padded.shape == (1, 3, 8, 8)
        assert_allclose(padded[:, :, 5], x[:, :, 3, [0, 1, 2, 3, 4, 5, 4, 3]])
        assert_allclose(padded[:, :, :5, 6:], x[:, :, :, [4, 3]])
        single = model._pad(x[:, :, :1])
        assert_allclose(single[:, :, 1:, :6], np.repeat(x[:, :, :1], 3, axis=2))

    def test_gradients_match_finite_differences(self, rng):
        model = DenseUNet(n_speakers=2, n_mics=2, n_freqs=8, depth=2, n_blocks=3, n_convs=2, channels=3, seed=1)
        model.network.output.weight.data[...] = rng.standard_normal(model.network.output.weight.shape) * 0.5
        model.network.output.bias.data[...] = rng.standard_normal(model.network.output.bias.shape) * 0.5
        Y = rng.standard_normal((2, 8, 8)) + 1j * rng.standard_normal((2, 8, 8))
        targets = [rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)) for _ in range(2)]

        def objective():
            masks = model.forward(Y)
            return lbt_assign([apply_cirm(masks[n], Y[0]) for n in range(2)], targets, (0, 1)).objective

        model.optimizer.zero_grad()
        objective().backward()

        h = 1e-5
        for name, p in model.params.items():
            flat = p.data.reshape(-1)
            picks = rng.choice(flat.size, size=min(10, flat.size), replace=False)
            for i in picks:
                orig = flat[i]
                flat[i] = orig + h
                plus = objective().item()
                flat[i] = orig - h
                minus = objective().item()
                flat[i] = orig
                numeric = (plus - minus) / (2 * h)
                analytic = p.grad.reshape(-1)[i]
                assert abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6) < 1e-3, name

    def test_parameter_names(self):
        names = set(tiny_model().params)
        assert {'input.weight', 'bottleneck.mapping.weight', 'encoder.1.convs.0.weight', 'down.0.conv.weight',
                'up.1.conv.bias', 'output.weight'} <= names
        assert not any(n.startswith('encoder.0.') for n in names)

    def test_zero_output_layer_gives_zero_masks(self, anechoic_pair):
        model = tiny_model()
        S_hats = model.separate(anechoic_pair)
        assert S_hats.shape[0] == 2
        assert np.all(S_hats == 0)

    def test_features(self, anechoic_pair):
        model = tiny_model()
        Y = model.mixture_spectrograms(anechoic_pair)
        x = model.features(Y)
        assert x.shape == (1, 14) + Y.shape[1:]
        assert_allclose(x[0, 1], 0.0, atol=1e-12)
        plain = tiny_model(input_norm='utterance').features(Y)
        rms = np.sqrt(np.mean(np.abs(Y[0]) ** 2))
        assert_allclose(plain[0, 2] + 1j * plain[0, 3], Y[1] / rms)
        with pytest.raises(ValueError):
            model.features(Y[:3])

    def test_loss_decreases(self, anechoic_pair):
        model = tiny_model()
        model.fit([anechoic_pair], 'azimuth', n_steps=30)
        losses = model.logs['updates']['loss'].to_numpy(dtype=float)
        assert len(losses) == 30
        assert np.mean(losses[-5:]) < losses[0]

    def test_counters_in_log(self, anechoic_trio):
        for criterion, permutations, evals in [('pit', 6, 9), ('azimuth', 1, 3), ('distance', 1, 3)]:
            model = tiny_model(n_speakers=3, channels=2)
            model.fit([anechoic_trio], criterion, n_steps=2)
            log = model.logs['updates']
            assert list(log['permutations_scanned']) == [permutations] * 2
            assert list(log['pairwise_evals']) == [evals] * 2
            assert list(log['criterion']) == [criterion] * 2

    def test_batch_objective_is_the_mean(self, anechoic_pair):
        single, batched = tiny_model(), tiny_model()
        report = single.train_step(anechoic_pair, 'azimuth')
        reports = batched.train_step([anechoic_pair, anechoic_pair], 'azimuth')
        assert len(reports) == 2
        assert reports[0].total_loss == pytest.approx(report.total_loss)
        for name, p in single.params.items():
            assert_allclose(batched.params[name].data, p.data, rtol=1e-9, atol=1e-12)
        with pytest.raises(ValueError):
            single.train_step([], 'azimuth')

    def test_batched_fit_log(self, anechoic_pair, anechoic_trio):
        model = tiny_model(n_speakers=3, channels=2)
        model.fit([anechoic_trio], 'pit', n_steps=2, batch_size=3)
        log = model.logs['updates']
        assert len(log) == 2 and model.n_step == 2
        assert list(log['permutations_scanned']) == [18] * 2
        assert list(log['pairwise_evals']) == [27] * 2
        assert log['example_id'].iloc[0] == ';'.join([anechoic_trio.example_id] * 3)
        with pytest.raises(AssertionError):
            tiny_model().fit([anechoic_pair], 'pit', n_steps=1, batch_size=0)

    def test_seeded_steps_are_bit_identical(self, anechoic_pair):
        a, b = tiny_model(seed=5), tiny_model(seed=5)
        for _ in range(3):
            a.train_step(anechoic_pair, 'azimuth')
            b.train_step(anechoic_pair, 'azimuth')
        for name, p in a.params.items():
            assert np.array_equal(b.params[name].data, p.data), name

    def test_frequency_mapping_starts_as_identity(self, rng):
        model = tiny_model()
        mappings = [name for name in model.params if name.endswith('mapping.weight')]
        assert len(mappings) > 0
        for name in mappings:
            W = model.params[name].data
            assert np.array_equal(W, np.eye(W.shape[0]))
        x = rng.standard_normal((1, 2, 3, 6))
        assert_allclose(FrequencyMapping(6)(Tensor(x)).numpy(), x)

    def test_output_order(self, anechoic_pair):
        model = tiny_model()
        assert model.output_order(anechoic_pair) == (0, 1)
        model.fit([anechoic_pair], 'distance', n_steps=1)
        assert model.output_order(anechoic_pair) == speaker_order('distance', anechoic_pair.scenario)
        model.fit([anechoic_pair], 'azimuth', n_steps=1)
        assert model.output_order(anechoic_pair) == speaker_order('azimuth', anechoic_pair.scenario)
        model.fit([anechoic_pair], 'pit', n_steps=1)
        assert model.output_order(anechoic_pair) == (0, 1)

    def test_example_checks(self, anechoic_pair, anechoic_trio):
        model = tiny_model()
        with pytest.raises(ValueError):
            model.fit([anechoic_trio], 'pit', n_steps=1)
        with pytest.raises(TypeError):
            model.fit([], 'pit', n_steps=1)
        with pytest.raises(ValueError):
            model.train_step(anechoic_pair, 'combined')

    def test_checkpoint_round_trip(self, anechoic_pair, tmp_path):
        model = tiny_model()
        model.fit([anechoic_pair], 'pit', n_steps=2)
        path = model.save_checkpoint(str(tmp_path / 'pit.npz'), config_hash='abc123def456')

        loaded = DenseUNet.load_checkpoint(path)
        assert loaded.config == model.config
        assert loaded.config_hash == 'abc123def456'
        assert loaded.criterion == Criterion.PIT
        assert loaded.n_step == 2 and loaded.optimizer.t == 2
        for name, p in model.params.items():
            assert_allclose(loaded.params[name].data, p.data)
            assert_allclose(loaded.optimizer.m[name], model.optimizer.m[name])
        assert_allclose(loaded.separate(anechoic_pair), model.separate(anechoic_pair))

    def test_not_a_checkpoint(self, tmp_path):
        path = str(tmp_path / 'other.npz')
        np.savez(path, weights=np.zeros(3))
        with pytest.raises(ValueError):
            DenseUNet.load_checkpoint(path)


class TestOracleSeparator:
    def test_single_speaker_is_exact(self, single_source):
        est = OracleSeparator().estimate_waveforms(single_source)
        assert est.shape == single_source.targets.shape
        assert si_snr(est[0], single_source.targets[0]) >= 50

    def test_two_speakers(self, anechoic_pair):
        est = OracleSeparator().estimate_waveforms(anechoic_pair)
        for n in range(2):
            assert si_snr(est[n], anechoic_pair.targets[n]) > 20

    def test_mask_clamp(self, anechoic_pair):
        masks = OracleSeparator(clamp=2.0).masks(anechoic_pair)
        assert np.max(np.abs(masks)) <= 2.0 + 1e-12


class TestCombinedSeparator:
    def combined(self, grid_step=5.0):
        return CombinedSeparator(azimuth_model=OracleSeparator(), distance_model=OracleSeparator(),
                                 localizer=OracleSeparator(), grid_step=grid_step)

    def test_wide_gaps_use_azimuth(self):
        examples = MixtureGenerator(n_speakers=2, duration=0.5, reverberant=False, min_gap=60, seed=31).generate(4)
        model = self.combined()
        for e in examples:
            model.separate(e)
        assert model.selection_rate('azimuth') == 1.0
        assert list(model.logs['selections']['example_id']) == [e.example_id for e in examples]

    def test_gaps_past_the_threshold_use_azimuth(self):
        examples = MixtureGenerator(n_speakers=2, duration=0.5, reverberant=False, azimuth_resolution=1, min_gap=25,
                                    seed=33).generate(30)
        model = self.combined(grid_step=1.0)
        for e in examples:
            model.separate(e)
        assert model.selection_rate('azimuth') == 1.0

    def test_close_gaps_use_distance(self):
        examples = MixtureGenerator(n_speakers=2, duration=0.5, reverberant=False, azimuth_resolution=1, max_gap=15,
                                    seed=32).generate(30)
        model = self.combined(grid_step=1.0)
        for e in examples:
            model.separate(e)
        assert model.selection_rate(Criterion.DISTANCE) == 1.0

    def test_single_speaker(self, single_source):
        model = self.combined()
        assert model.select(single_source) == (Criterion.AZIMUTH, None)
        model.separate(single_source)
        assert model.last_selection == Criterion.AZIMUTH

    def test_no_selections(self):
        assert np.isnan(self.combined().selection_rate())


@pytest.mark.slow
class TestToyConvergence:
    def test_fixed_set_halves_the_loss(self):
        examples = MixtureGenerator(n_speakers=2, duration=1.0, reverberant=False, min_gap=60, seed=1997).generate(8)
        model = DenseUNet(n_speakers=2, seed=1997)
        model.fit(examples, 'azimuth', n_steps=200, batch_size=8)
        losses = model.logs['updates']['loss'].to_numpy(dtype=float)
        assert len(losses) == 200
        assert losses[-1] < 0.5 * losses[0]
