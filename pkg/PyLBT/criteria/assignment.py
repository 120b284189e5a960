import math
import itertools
import numpy as np
from enum import Enum
from functools import reduce
from dataclasses import dataclass
from .losses import loss_ri_mag
from ..solvers.autograd import Tensor


MAX_PIT_SPEAKERS = 8
SELECTION_THRESHOLD = 20.0


class Criterion(str, Enum):
    '''Output-to-speaker assignment strategies.
    '''
    PIT = 'pit'
    AZIMUTH = 'azimuth'
    DISTANCE = 'distance'
    COMBINED = 'combined'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError("[E] Unknown criterion: {}. Choose from {}.".format(value, [c.value for c in cls])) from None


@dataclass(frozen=True)
class Assignment:
    '''Pairing of network outputs with speakers.

    .. note::

        pairing : tuple of int
            ``pairing[n]`` is the speaker index (0-based) assigned to output ``n``.
        criterion : Criterion
    '''
    pairing: tuple
    criterion: Criterion

    def __post_init__(self):
        object.__setattr__(self, 'pairing', tuple(int(p) for p in self.pairing))
        _check_permutation(self.pairing)


@dataclass(frozen=True)
class CriterionReport:
    '''Result of one assignment call, with evaluation counters.

    .. note::

        total_loss : float
            Mean over outputs of the paired losses.
        pairwise_evals : int
            Number of pairwise loss evaluations performed.
        permutations_scanned : int
            ``N!`` for PIT, 1 for a fixed location-based pairing.
        objective : Tensor or None
            Differentiable ``total_loss`` when the losses were computed on ``ComplexTensor`` estimates.
    '''
    total_loss: float
    assignment: Assignment
    pairwise_evals: int
    per_pair_losses: tuple
    permutations_scanned: int = 1
    objective: object = None

    @property
    def criterion(self):
        return self.assignment.criterion

    @property
    def pairing(self):
        return self.assignment.pairing

    def to_dict(self):
        return {
            'criterion': self.criterion.value,
            'loss': self.total_loss,
            'pairing': [p + 1 for p in self.pairing],
            'pairwise_evals': self.pairwise_evals,
            'permutations_scanned': self.permutations_scanned,
            'per_pair_losses': list(self.per_pair_losses),
        }


def _check_permutation(order, n=None):
    n = len(order) if n is None else n
    if len(order) != n or sorted(order) != list(range(n)):
        raise ValueError("[E] {} is not a permutation of {} speakers.".format(list(order), n))


def _check_counts(S_hats, Ss):
    if len(S_hats) != len(Ss):
        raise ValueError("[E] {} estimates for {} targets.".format(len(S_hats), len(Ss)))
    if len(Ss) == 0:
        raise ValueError("[E] No speakers.")


def _value(loss):
    return loss.item() if isinstance(loss, Tensor) else float(loss)


def _objective(terms):
    if not all(isinstance(t, Tensor) for t in terms):
        return None
    return reduce(lambda a, b: a + b, terms) * (1.0 / len(terms))


# angles

def circular_diff(a, b):
    '''Smallest absolute difference between angles in degrees, in [0, 180].
    '''
    d = np.mod(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)), 360.0)
    d = np.minimum(d, 360.0 - d)
    return float(d) if d.ndim == 0 else d


def min_azimuth_gap(azimuths):
    '''Smallest pairwise circular azimuth difference; ``inf`` for fewer than two azimuths.
    '''
    az = np.asarray(azimuths, dtype=np.float64).ravel()
    if len(az) < 2:
        return np.inf
    return float(circular_diff(az[:, None], az[None, :])[np.triu_indices(len(az), 1)].min())


def _azimuth_key(azimuths, kind='circular'):
    az = np.asarray(azimuths, dtype=np.float64)
    if kind == 'linear':
        # front-back folding onto [0, 180]
        return np.abs(np.mod(az + 180.0, 360.0) - 180.0)
    return np.mod(az, 360.0)


def azimuth_order(azimuths, distances, kind='circular'):
    '''Speaker indices by ascending azimuth on [0, 360), ties to the nearer speaker.
    '''
    return tuple(int(i) for i in np.lexsort((np.asarray(distances, dtype=np.float64), _azimuth_key(azimuths, kind))))


def distance_order(azimuths, distances, kind='circular'):
    '''Speaker indices by ascending distance, ties to the smaller azimuth.
    '''
    return tuple(int(i) for i in np.lexsort((_azimuth_key(azimuths, kind), np.asarray(distances, dtype=np.float64))))


# assignment

def pairwise_loss_matrix(S_hats, Ss, pairwise_loss=loss_ri_mag):
    '''All ``N x N`` losses ``L(S_hats[n], Ss[m])``.

    Returns
    -------
    matrix : ndarray
        ``N``-by-``N`` float losses.
    n_evals : int
    '''
    matrix, _, n_evals = _pairwise_terms(S_hats, Ss, pairwise_loss)
    return matrix, n_evals


def _pairwise_terms(S_hats, Ss, pairwise_loss):
    _check_counts(S_hats, Ss)
    N = len(Ss)
    terms = [[pairwise_loss(S_hats[n], Ss[m]) for m in range(N)] for n in range(N)]
    matrix = np.array([[_value(t) for t in row] for row in terms])
    return matrix, terms, N * N


def pit_assign(S_hats, Ss, pairwise_loss=loss_ri_mag):
    '''Utterance-level permutation-invariant assignment.

    The pairwise matrix is computed once; every permutation is then scored by summing its entries.
    Ties go to the lexicographically smallest permutation.

    Parameters
    ----------
    S_hats : list of N spectrograms
        Network outputs.
    Ss : list of N spectrograms
        Targets.
    pairwise_loss : callable, default: loss_ri_mag

    Returns
    -------
    report : CriterionReport
    '''
    _check_counts(S_hats, Ss)
    N = len(Ss)
    if N > MAX_PIT_SPEAKERS:
        raise ValueError("[E] PIT over {} speakers exceeds the limit of {}.".format(N, MAX_PIT_SPEAKERS))

    matrix, terms, n_evals = _pairwise_terms(S_hats, Ss, pairwise_loss)
    rows = range(N)
    best, best_sum, n_scanned = None, np.inf, 0
    for perm in itertools.permutations(rows):
        total = math.fsum(matrix[n, perm[n]] for n in rows)
        n_scanned += 1
        if total < best_sum:
            best, best_sum = perm, total

    return CriterionReport(
        total_loss=best_sum / N,
        assignment=Assignment(best, Criterion.PIT),
        pairwise_evals=n_evals,
        per_pair_losses=tuple(float(matrix[n, best[n]]) for n in rows),
        permutations_scanned=n_scanned,
        objective=_objective([terms[n][best[n]] for n in rows]),
    )


def lbt_assign(S_hats, Ss, order, pairwise_loss=loss_ri_mag, criterion=Criterion.AZIMUTH):
    '''Location-based assignment: output ``n`` is paired with speaker ``order[n]``.

    Only the ``N`` paired losses are evaluated.

    Parameters
    ----------
    order : sequence of int
        Speaker permutation from ``geometry_truth``.
    criterion : Criterion, default: Criterion.AZIMUTH
        Tag for the report.
    '''
    _check_counts(S_hats, Ss)
    N = len(Ss)
    order = tuple(int(o) for o in order)
    _check_permutation(order, N)

    terms = [pairwise_loss(S_hats[n], Ss[order[n]]) for n in range(N)]
    values = [_value(t) for t in terms]
    return CriterionReport(
        total_loss=math.fsum(values) / N,
        assignment=Assignment(order, Criterion.parse(criterion)),
        pairwise_evals=N,
        per_pair_losses=tuple(values),
        permutations_scanned=1,
        objective=_objective(terms),
    )


def dynamic_select(est_azimuths, threshold=SELECTION_THRESHOLD):
    '''Pick the azimuth criterion when the estimated speakers are more than ``threshold`` degrees apart.

    Parameters
    ----------
    est_azimuths : AzimuthEstimateSet or sequence of float
    threshold : float, default: 20

    Returns
    -------
    criterion : Criterion
        ``AZIMUTH`` if the smallest pairwise gap is strictly larger than ``threshold``, ``DISTANCE`` otherwise.
    '''
    az = getattr(est_azimuths, 'azimuths', est_azimuths)
    az = np.asarray(az, dtype=np.float64).ravel()
    if len(az) < 2:
        raise ValueError("[E] dynamic_select needs at least 2 azimuth estimates, got {}.".format(len(az)))
    return Criterion.AZIMUTH if min_azimuth_gap(az) > threshold else Criterion.DISTANCE


def speaker_order(criterion, scenario, array_kind=None):
    '''Location-based speaker order of a scene.
    '''
    criterion = Criterion.parse(criterion)
    kind = scenario.array.kind if array_kind is None else array_kind
    if criterion == Criterion.AZIMUTH:
        return azimuth_order(scenario.azimuths, scenario.distances, kind)
    if criterion == Criterion.DISTANCE:
        return distance_order(scenario.azimuths, scenario.distances, kind)
    raise ValueError("[E] {} has no location-based order.".format(criterion.value))


def assign(criterion, S_hats, Ss, scenario=None, pairwise_loss=loss_ri_mag, array_kind=None):
    '''Dispatch to PIT or location-based assignment.

    ``COMBINED`` is a selection between two trained separators at inference time and has no training assignment.
    '''
    criterion = Criterion.parse(criterion)
    if criterion == Criterion.PIT:
        return pit_assign(S_hats, Ss, pairwise_loss)
    if criterion == Criterion.COMBINED:
        raise ValueError("[E] The combined criterion selects between trained models; train with 'azimuth' or 'distance'.")
    if scenario is None:
        raise ValueError("[E] Location-based assignment needs the scenario.")
    order = speaker_order(criterion, scenario, array_kind)
    return lbt_assign(S_hats, Ss, order, pairwise_loss, criterion)
