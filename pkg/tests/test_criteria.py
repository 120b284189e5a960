import math
import dataclasses
import itertools
import numpy as np
import pytest
from PyLBT.criteria import (Criterion, Assignment, loss_ri, loss_ri_mag, get_loss, pairwise_loss_matrix, pit_assign,
                            lbt_assign, dynamic_select, assign, speaker_order, circular_diff, min_azimuth_gap)
from PyLBT.generators import sample_scenario, geometry_truth
from PyLBT.solvers import Tensor, ComplexTensor


def random_specs(rng, n, shape=(4, 5)):
    return [rng.standard_normal(shape) + 1j * rng.standard_normal(shape) for _ in range(n)]


def brute_force(S_hats, Ss):
    '''Lexicographically first permutation with the smallest mean loss, from scratch.'''
    N = len(Ss)
    best, best_loss = None, np.inf
    for perm in itertools.permutations(range(N)):
        loss = math.fsum(loss_ri_mag(S_hats[n], Ss[perm[n]]) for n in range(N)) / N
        if loss < best_loss:
            best, best_loss = perm, loss
    return best, best_loss


class TestLosses:
    def test_constant_offset(self, rng):
        S = random_specs(rng, 1)[0]
        assert loss_ri(S + (1 + 2j), S) == pytest.approx(3.0)
        assert loss_ri_mag(S, S) == 0.0

    def test_magnitude_term(self):
        S = np.ones((2, 3), dtype=complex)
        assert loss_ri_mag(-S, S) == pytest.approx(2.0)
        assert loss_ri_mag(2 * S, S) == pytest.approx(2.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            loss_ri(np.zeros((2, 3)), np.zeros((3, 2)))

    def test_get_loss(self):
        assert get_loss('ri') is loss_ri
        with pytest.raises(ValueError):
            get_loss('l2')


class TestPit:
    @pytest.mark.parametrize('N', [2, 3, 4, 5])
    def test_matches_brute_force(self, N):
        rng = np.random.RandomState(N)
        for _ in range(100 if N < 5 else 20):
            S_hats, Ss = random_specs(rng, N), random_specs(rng, N)
            report = pit_assign(S_hats, Ss)
            perm, loss = brute_force(S_hats, Ss)
            assert report.pairing == perm
            assert report.total_loss == pytest.approx(loss, rel=1e-12)

    def test_pit_never_worse_than_lbt(self):
        rng = np.random.RandomState(0)
        for N in range(2, 6):
            for _ in range(250):
                S_hats, Ss = random_specs(rng, N, (2, 3)), random_specs(rng, N, (2, 3))
                order = tuple(rng.permutation(N))
                assert pit_assign(S_hats, Ss).total_loss <= lbt_assign(S_hats, Ss, order).total_loss

    @pytest.mark.slow
    def test_pit_never_worse_than_lbt_at_scale(self):
        rng = np.random.RandomState(1)
        for N in range(2, 6):
            for _ in range(1000):
                S_hats, Ss = random_specs(rng, N, (2, 3)), random_specs(rng, N, (2, 3))
                order = tuple(rng.permutation(N))
                assert pit_assign(S_hats, Ss).total_loss <= lbt_assign(S_hats, Ss, order).total_loss

    @pytest.mark.parametrize('N', range(1, 9))
    def test_counters(self, N, rng):
        S_hats, Ss = random_specs(rng, N, (1, 2)), random_specs(rng, N, (1, 2))
        pit = pit_assign(S_hats, Ss)
        lbt = lbt_assign(S_hats, Ss, range(N))
        assert (pit.permutations_scanned, pit.pairwise_evals) == (math.factorial(N), N * N)
        assert (lbt.permutations_scanned, lbt.pairwise_evals) == (1, N)

    def test_ties_pick_identity(self):
        S = np.ones((2, 2), dtype=complex)
        report = pit_assign([S] * 4, [S] * 4)
        assert report.pairing == (0, 1, 2, 3)
        assert report.total_loss == 0.0

    def test_swapped_outputs(self, rng):
        Ss = random_specs(rng, 3)
        report = pit_assign([Ss[2], Ss[0], Ss[1]], Ss)
        assert report.pairing == (2, 0, 1)
        assert report.per_pair_losses == (0.0, 0.0, 0.0)

    def test_limits(self, rng):
        with pytest.raises(ValueError):
            pit_assign(random_specs(rng, 9, (1, 1)), random_specs(rng, 9, (1, 1)))
        with pytest.raises(ValueError):
            pit_assign(random_specs(rng, 2), random_specs(rng, 3))
        with pytest.raises(ValueError):
            pit_assign([], [])

    def test_pairwise_matrix(self, rng):
        S_hats, Ss = random_specs(rng, 3), random_specs(rng, 3)
        matrix, n_evals = pairwise_loss_matrix(S_hats, Ss)
        assert n_evals == 9
        assert matrix[1, 2] == loss_ri_mag(S_hats[1], Ss[2])


class TestLbt:
    def test_fixed_pairing(self, rng):
        S_hats, Ss = random_specs(rng, 3), random_specs(rng, 3)
        report = lbt_assign(S_hats, Ss, (2, 0, 1), criterion='distance')
        assert report.criterion == Criterion.DISTANCE
        assert report.per_pair_losses[0] == loss_ri_mag(S_hats[0], Ss[2])
        assert report.to_dict()['pairing'] == [3, 1, 2]

    def test_bad_order(self, rng):
        with pytest.raises(ValueError):
            lbt_assign(random_specs(rng, 2), random_specs(rng, 2), (0, 0))
        with pytest.raises(ValueError):
            lbt_assign(random_specs(rng, 2), random_specs(rng, 2), (0, 1, 2))

    def test_assign_dispatch(self, rng):
        scenario = sample_scenario(5, n_speakers=3)
        S_hats, Ss = random_specs(rng, 3), random_specs(rng, 3)
        az_order, dist_order = geometry_truth(scenario)
        assert assign('azimuth', S_hats, Ss, scenario).pairing == az_order
        assert assign(Criterion.DISTANCE, S_hats, Ss, scenario).pairing == dist_order
        assert speaker_order('distance', scenario) == dist_order
        assert assign('pit', S_hats, Ss).criterion == Criterion.PIT
        with pytest.raises(ValueError):
            assign('combined', S_hats, Ss, scenario)
        with pytest.raises(ValueError):
            assign('azimuth', S_hats, Ss)

    def test_differentiable_objective(self, rng):
        Ss = random_specs(rng, 2)
        params = [Tensor(rng.standard_normal((4, 5)), requires_grad=True) for _ in range(4)]
        S_hats = [ComplexTensor(params[0], params[1]), ComplexTensor(params[2], params[3])]
        report = lbt_assign(S_hats, Ss, (1, 0))
        assert report.objective.item() == pytest.approx(report.total_loss)
        report.objective.backward()
        assert all(p.grad is not None and p.grad.shape == (4, 5) for p in params)
        assert pit_assign([s.numpy() for s in S_hats], Ss).objective is None

    @pytest.mark.parametrize('criterion', ['azimuth', 'distance'])
    def test_relabeling_speakers(self, criterion, rng):
        scenario = sample_scenario(9, n_speakers=4)
        S_hats, Ss = random_specs(rng, 4), random_specs(rng, 4)
        base = assign(criterion, S_hats, Ss, scenario)
        for perm in itertools.permutations(range(4)):
            shuffled = dataclasses.replace(scenario, sources=tuple(scenario.sources[i] for i in perm))
            report = assign(criterion, S_hats, [Ss[i] for i in perm], shuffled)
            assert report.total_loss == pytest.approx(base.total_loss, rel=1e-12)
            assert [perm[i] for i in report.pairing] == list(base.pairing)


class TestSelection:
    def test_threshold(self):
        assert dynamic_select([0, 25]) == Criterion.AZIMUTH
        assert dynamic_select([0, 20]) == Criterion.DISTANCE
        assert dynamic_select([10, 350]) == Criterion.DISTANCE
        assert dynamic_select([-170, 170, 60]) == Criterion.DISTANCE
        assert dynamic_select([0, 25], threshold=30) == Criterion.DISTANCE

    def test_needs_two_estimates(self):
        with pytest.raises(ValueError):
            dynamic_select([45])

    def test_angles(self):
        assert circular_diff(-175, 175) == 10
        assert circular_diff(0, 180) == 180
        assert min_azimuth_gap([0]) == np.inf
        assert min_azimuth_gap([0, 90, 350]) == 10


class TestTypes:
    def test_parse(self):
        assert Criterion.parse('PIT') == Criterion.PIT
        assert Criterion.parse(Criterion.AZIMUTH) is Criterion.AZIMUTH
        with pytest.raises(ValueError):
            Criterion.parse('angle')

    def test_assignment_is_permutation(self):
        assert Assignment((1, 0), Criterion.PIT).pairing == (1, 0)
        with pytest.raises(ValueError):
            Assignment((1, 1), Criterion.PIT)
