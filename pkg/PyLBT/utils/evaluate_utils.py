import math
import itertools
import numpy as np
import pandas as pd
from dataclasses import dataclass, field
from .metrics import get_metrics, si_snr


SCORING = ['fixed', 'best-permutation']


@dataclass
class EvalRecord:
    '''Scores of one separated example.

    .. note::

        metrics : dict of str to list
            Per-speaker score of each metric, in target order.
        unprocessed : dict of str to list
            The same metrics with the reference mixture channel as the estimate.
        pairing : tuple of int
            ``pairing[n]`` is the target scored against output ``n``.
        scoring : str in {'fixed', 'best-permutation'}
    '''
    metrics: dict
    unprocessed: dict
    pairing: tuple
    scoring: str
    info: dict = field(default_factory=dict)

    @property
    def delta(self):
        return {m: [a - b for a, b in zip(self.metrics[m], self.unprocessed[m])] for m in self.metrics}

    def mean(self, metric, delta=False):
        values = self.delta[metric] if delta else self.metrics[metric]
        return float(np.mean(values))

    def to_dict(self):
        return {
            'scoring': self.scoring,
            'pairing': [p + 1 for p in self.pairing],
            'metrics': {m: [float(v) for v in vs] for m, vs in self.metrics.items()},
            'unprocessed': {m: [float(v) for v in vs] for m, vs in self.unprocessed.items()},
            'delta': {m: [float(v) for v in vs] for m, vs in self.delta.items()},
            **self.info,
        }

    def to_row(self):
        '''Flatten into one dict per example for a ``DataFrame``: means and delta-means per metric.
        '''
        row = dict(self.info)
        row['scoring'] = self.scoring
        row['pairing'] = ' '.join(str(p + 1) for p in self.pairing)
        for m in self.metrics:
            row[m] = self.mean(m)
            row['unprocessed ' + m] = float(np.mean(self.unprocessed[m]))
            row['delta ' + m] = self.mean(m, delta=True)
        return row


def best_permutation(estimates, targets):
    '''Output-to-target pairing that maximizes the mean SI-SNR.

    Ties go to the lexicographically smallest permutation.
    '''
    n = len(estimates)
    scores = np.array([[si_snr(estimates[i], targets[j]) for j in range(n)] for i in range(n)])
    best, best_perm = -np.inf, None
    for perm in itertools.permutations(range(n)):
        total = math.fsum(scores[i, perm[i]] for i in range(n))
        if total > best:
            best, best_perm = total, perm
    return best_perm


def eval_example(estimates, targets, mixture_ref, scoring='fixed', metrics=('SI-SNR', 'SDR', 'ESTOI'), filter_len=512, info=None):
    '''Score the separated waveforms of one example.

    Parameters
    ----------
    estimates : list of 1-D arrays
        Model outputs in output order.
    targets : list of 1-D arrays
        Direct-path targets in speaker order.
    mixture_ref : 1-D array
        Reference-microphone mixture, scored as the unprocessed baseline.
    scoring : str in {'fixed', 'best-permutation'}, default: 'fixed'
        'fixed' pairs output ``n`` with target ``n``; 'best-permutation' maximizes the mean SI-SNR over all ``N!`` pairings.
    metrics : list of str
    filter_len : int, default: 512
    info : dict, optional
        Extra fields carried into the record.

    Returns
    -------
    record : EvalRecord
    '''
    if scoring not in SCORING:
        raise ValueError("[E] scoring must be one of {}, got {}.".format(SCORING, scoring))
    if len(estimates) != len(targets):
        raise ValueError("[E] Got {} estimates for {} targets.".format(len(estimates), len(targets)))
    if len(estimates) == 0:
        raise ValueError("[E] Nothing to evaluate.")

    n = len(targets)
    pairing = tuple(range(n)) if scoring == 'fixed' else best_permutation(estimates, targets)

    scores = {m: [None] * n for m in metrics}
    unprocessed = {m: [None] * n for m in metrics}
    for i in range(n):
        j = pairing[i]
        for m, value in zip(metrics, get_metrics(estimates[i], targets[j], metrics, filter_len=filter_len)):
            scores[m][j] = value
        for m, value in zip(metrics, get_metrics(mixture_ref, targets[j], metrics, filter_len=filter_len)):
            unprocessed[m][j] = value

    return EvalRecord(metrics=scores, unprocessed=unprocessed, pairing=pairing, scoring=scoring, info=dict(info or {}))


def record(df_dict, df_name, columns, records, verbose=False):
    '''Create and add records to a dataframe in a logs dict.

    Parameters
    ----------
    df_dict : dict
    df_name : str
    columns : list of str
    records : list
    verbose : bool, default: False
        Print the last line.
    '''
    if df_name not in df_dict:
        df_dict[df_name] = pd.DataFrame(columns=['time'] + list(columns))

    ts = [pd.Timestamp.now().strftime("%d/%m/%y %I:%M:%S")]
    df = df_dict[df_name]
    df.loc[len(df.index)] = ts + list(records)

    if verbose:
        print(df.tail(1).to_string(header=False))
