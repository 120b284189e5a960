import os
import json
import time
import math
import numpy as np
import pandas as pd
from dataclasses import dataclass
from tqdm import tqdm
from ..criteria import Criterion, pit_assign, lbt_assign, MAX_PIT_SPEAKERS
from ..datasets import MixtureData, SpeechFolderData, write_manifest
from ..generators import MixtureGenerator
from ..localization import build_steering_table, azimuth_errors
from ..models import DenseUNet, OracleSeparator, CombinedSeparator
from ..utils import eval_example, save_csv, show_gap_breakdown, show_profiles, get_rng, to_jsonable, get_config, timeit


# simulation

@timeit
def cmd_simulate(config, out_dir, split='train', count=None, cache_dir=None, verbose=False):
    '''Simulate a dataset split and write its WAV files and JSONL manifest.

    Parameters
    ----------
    config : ExperimentConfig
    out_dir : str
    split : str in {'train', 'test'}, default: 'train'
        Picks the example count and the derived seed.
    count : int, optional
        Overrides the config's example count.
    cache_dir : str, optional
        RIR cache folder. Falls back to the ``cache`` entry of settings.ini.

    Returns
    -------
    path : str
        The manifest, ``<out_dir>/<split>.jsonl``.
    '''
    count = config.n_examples(split) if count is None else int(count)
    if count < 0:
        raise ValueError("[E] count must be non-negative, got {}.".format(count))

    dry = None
    if config.dry_dir is not None:
        dry = SpeechFolderData(root=config.dry_dir).utterances()
    cache_dir = get_config(key="cache") if cache_dir is None else cache_dir

    generator = MixtureGenerator(n_speakers=config.n_speakers, duration=config.duration,
                                 azimuth_resolution=config.azimuth_resolution, reverberant=config.reverberant,
                                 min_gap=config.min_gap, max_gap=config.max_gap, absorption=config.absorption,
                                 array=config.make_array(), cache_dir=cache_dir, n_jobs=config.n_jobs, seed=config.split_seed(split),
                                 verbose=verbose)
    examples = generator.generate(count, dry=dry)
    return write_manifest(examples, out_dir, name="{}.jsonl".format(split), config_hash=config.hash(), seed=config.seed)


# training

def load_examples(manifest, n_speakers=None):
    '''All examples of a manifest, checking the speaker count against ``n_speakers``.
    '''
    data = MixtureData(manifest)
    if n_speakers is not None and len(data) > 0 and data.n_speakers != n_speakers:
        raise ValueError("[E] Manifest {} has {} speakers, the config has {}.".format(manifest, data.n_speakers, n_speakers))
    return list(data)


@timeit
def cmd_train(config, manifest, out_dir, criterion=None, verbose=False):
    '''Train a separator on a manifest with one criterion.

    Writes the per-step log ``<criterion>_log.csv`` and the checkpoint ``<criterion>.npz``.

    Returns
    -------
    paths : dict
        'checkpoint' and 'log'.
    '''
    criterion = Criterion.parse(config.criterion if criterion is None else criterion)
    examples = load_examples(manifest, config.n_speakers)
    if len(examples) == 0:
        raise ValueError("[E] Manifest {} is empty.".format(manifest))

    model = DenseUNet.from_config(config.separator_config(examples[0].n_mics), loss=config.loss, lr=config.lr,
                                  seed=config.seed, verbose=verbose)
    model.fit(examples, criterion, n_steps=config.n_steps, batch_size=config.batch_size, shuffle=config.shuffle)

    log = model.logs['updates'].drop(columns=['time'])
    log_path = save_csv(log, os.path.join(out_dir, "{}_log.csv".format(criterion.value)), config.hash(), config.seed)
    checkpoint = model.save_checkpoint(os.path.join(out_dir, "{}.npz".format(criterion.value)), config_hash=config.hash())
    return {'checkpoint': checkpoint, 'log': log_path}


# evaluation

def _check_compatible(model, examples):
    if len(examples) == 0:
        return
    for name in ['n_speakers', 'n_mics']:
        expected = getattr(model, name, None)
        found = getattr(examples[0], name)
        if expected is not None and expected != found:
            raise ValueError("[E] Model has {} = {}, the manifest has {}.".format(name, expected, found))


def _checkpoint_label(spec):
    '''``label=path`` or a bare path labelled by its file stem.
    '''
    if '=' in spec:
        label, path = spec.split('=', 1)
        return label, path
    return os.path.splitext(os.path.basename(spec))[0], spec


def evaluate_separator(separator, examples, label, config, verbose=False):
    '''Score ``separator`` on every example.

    Returns
    -------
    records : list of EvalRecord
    '''
    records = []
    for example in tqdm(examples, disable=not verbose, desc="[I] Evaluating {}".format(label)):
        estimates = separator.estimate_waveforms(example)
        info = {
            'example_id': example.example_id,
            'criterion': label,
            'n_speakers': example.n_speakers,
            't60': example.scenario.room.t60,
            'min_gap': example.scenario.min_gap,
        }
        if isinstance(separator, CombinedSeparator):
            info['selected'] = separator.last_selection.value
        # fixed scoring pairs output k with the speaker the separator puts there
        targets = [example.targets[i] for i in separator.output_order(example)]
        records.append(eval_example(list(estimates), targets, example.mixture[0], scoring=config.scoring,
                                    metrics=config.metrics, info=info))
    return records


@timeit
def cmd_eval(config, manifest, out_dir, checkpoints=(), oracle=False, combined=False, oracle_localizer=False,
             gap_bins=None, plot=False, verbose=False):
    '''Evaluate separators on a manifest.

    Parameters
    ----------
    checkpoints : list of str
        ``label=path`` or paths whose stem is the label.
    oracle : bool, default: False
        Add the ideal-cIRM separator under the label 'oracle'.
    combined : bool, default: False
        Also evaluate the selection between the 'azimuth' and 'distance' checkpoints under the label 'combined'.
    oracle_localizer : bool, default: False
        Localize with oracle masks when selecting.
    gap_bins : list of float, optional
        Edges of the azimuth-gap breakdown, defaults to the config's.
    plot : bool, default: False
        Save the gap breakdown as ``gaps.png``.

    Returns
    -------
    report : dict of str to DataFrame
        'examples', 'aggregate', 'gaps' and 'table'.
    '''
    examples = load_examples(manifest, config.n_speakers)
    separators = {}
    for spec in checkpoints:
        label, path = _checkpoint_label(spec)
        separators[label] = DenseUNet.load_checkpoint(path)
    if oracle:
        separators['oracle'] = OracleSeparator()
    if combined:
        missing = [k for k in ['azimuth', 'distance'] if k not in separators]
        if missing:
            raise ValueError("[E] Combined evaluation needs checkpoints labelled {}.".format(missing))
        localizer = OracleSeparator() if oracle_localizer else None
        separators['combined'] = CombinedSeparator(separators['azimuth'], separators['distance'], threshold=config.threshold,
                                                   localizer=localizer, grid_step=config.grid_step)
    if len(separators) == 0:
        raise ValueError("[E] Nothing to evaluate: pass checkpoints or the oracle.")

    records = []
    for label, separator in separators.items():
        if not isinstance(separator, (OracleSeparator, CombinedSeparator)):
            _check_compatible(separator, examples)
        records += evaluate_separator(separator, examples, label, config, verbose=verbose)

    rows = pd.DataFrame([r.to_row() for r in records])
    aggregate = aggregate_records(rows, config.metrics)
    if combined:
        aggregate['selection_rate'] = [separators['combined'].selection_rate(Criterion.AZIMUTH) if c == 'combined' else np.nan
                                       for c in aggregate['criterion']]
    gaps = gap_breakdown(rows, config.gap_bins if gap_bins is None else gap_bins, config.metrics)
    table = table_summary(rows, config.metrics)

    h, seed = config.hash(), config.seed
    save_csv(rows, os.path.join(out_dir, 'eval_examples.csv'), h, seed)
    save_csv(aggregate, os.path.join(out_dir, 'eval_aggregate.csv'), h, seed)
    save_csv(gaps, os.path.join(out_dir, 'eval_gaps.csv'), h, seed)
    save_csv(table, os.path.join(out_dir, 'eval_table.csv'), h, seed)
    if plot and len(gaps) > 0:
        show_gap_breakdown(gaps, metric=config.metrics[0], path=os.path.join(out_dir, 'gaps.png'))

    return {'examples': rows, 'aggregate': aggregate, 'gaps': gaps, 'table': table}


def aggregate_records(rows, metrics):
    '''Mean score, unprocessed score and improvement of every metric per criterion.
    '''
    columns = []
    for m in metrics:
        columns += [m, 'unprocessed ' + m, 'delta ' + m]
    if len(rows) == 0:
        return pd.DataFrame(columns=['criterion', 'n_examples'] + columns)
    agg = rows.groupby('criterion', sort=False)[columns].mean().reset_index()
    agg.insert(1, 'n_examples', rows.groupby('criterion', sort=False).size().values)
    return agg


def _bin_label(low, high, last):
    return "[{:g},{:g}{}".format(low, high, ']' if last else ')')


def gap_breakdown(rows, bins=(0, 20, 45, 90, 180), metrics=('SI-SNR', 'SDR', 'ESTOI')):
    '''Scores binned by the smallest true azimuth gap of each example.

    Bins are half-open except the last, which is closed. Examples without a gap (one speaker) fall in no bin.

    Parameters
    ----------
    rows : DataFrame
        One row per example and criterion, as written by ``cmd_eval``.
    bins : list of float
        Bin edges in degrees.

    Returns
    -------
    df : DataFrame
        One row per criterion, bin and metric: 'criterion', 'bin', 'metric', 'n', 'mean', 'delta_mean'.
    '''
    bins = [float(b) for b in bins]
    out = []
    criteria = list(dict.fromkeys(rows['criterion'])) if len(rows) > 0 else []
    for criterion in criteria:
        sub = rows[rows['criterion'] == criterion]
        gaps = sub['min_gap'].astype(float)
        for i, (low, high) in enumerate(zip(bins, bins[1:])):
            last = i == len(bins) - 2
            inside = (gaps >= low) & ((gaps <= high) if last else (gaps < high))
            label = _bin_label(low, high, last)
            for m in metrics:
                values = sub.loc[inside, m]
                deltas = sub.loc[inside, 'delta ' + m]
                out.append({
                    'criterion': criterion,
                    'bin': label,
                    'metric': m,
                    'n': int(inside.sum()),
                    'mean': float(values.mean()) if len(values) else np.nan,
                    'delta_mean': float(deltas.mean()) if len(deltas) else np.nan,
                })
    return pd.DataFrame(out, columns=['criterion', 'bin', 'metric', 'n', 'mean', 'delta_mean'])


def table_summary(rows, metrics=('SI-SNR', 'SDR', 'ESTOI')):
    '''Criterion rows by metric columns, with the unprocessed mixture as the first row.

    ESTOI is given in percent; PESQ is not computed and marked 'n/a'.
    '''
    def entry(name, means):
        row = {'Criterion': name}
        row['ESTOI (%)'] = 100 * means['ESTOI'] if 'ESTOI' in means else np.nan
        row['PESQ'] = 'n/a'
        row['SI-SNR (dB)'] = means.get('SI-SNR', np.nan)
        row['SDR (dB)'] = means.get('SDR', np.nan)
        return row

    table = []
    if len(rows) > 0:
        first = rows.drop_duplicates(subset='example_id')
        table.append(entry('Unprocessed', {m: float(first['unprocessed ' + m].mean()) for m in metrics}))
        for criterion in dict.fromkeys(rows['criterion']):
            sub = rows[rows['criterion'] == criterion]
            table.append(entry(criterion, {m: float(sub[m].mean()) for m in metrics}))
    return pd.DataFrame(table, columns=['Criterion', 'ESTOI (%)', 'PESQ', 'SI-SNR (dB)', 'SDR (dB)'])


# localization

def cmd_localize(config, manifest, out_dir, checkpoint=None, include_profiles=False, plot=False):
    '''Localize the separated outputs of every example.

    Oracle masks are used when no checkpoint is given. Writes ``localize.jsonl``; with ``plot`` the score profiles
    of the first example are saved as ``profiles.png``.

    Returns
    -------
    path : str
    '''
    examples = load_examples(manifest, config.n_speakers)
    separator = OracleSeparator() if checkpoint is None else DenseUNet.load_checkpoint(checkpoint)
    if checkpoint is not None:
        _check_compatible(separator, examples)

    lines, tables = [], {}
    for example in examples:
        key = (example.scenario.array.offsets, config.grid_step)
        if key not in tables:
            tables[key] = build_steering_table(example.scenario.array, config.grid_step)
        estimates = separator.localize(example, table=tables[key])
        truth = example.scenario.azimuths
        line = {
            'example_id': example.example_id,
            'true_azimuths': [float(a) for a in truth],
            'localization': estimates.to_dict(include_profiles=include_profiles),
            'errors_fixed': [float(e) for e in azimuth_errors(estimates, truth, match='fixed')],
            'errors_best': [float(e) for e in azimuth_errors(estimates, truth, match='best')],
            'config_hash': config.hash(),
            'seed': config.seed,
        }
        lines.append(json.dumps(to_jsonable(line), sort_keys=True))
        if plot and len(lines) == 1:
            show_profiles(estimates, truth=truth, path=os.path.join(out_dir, 'profiles.png'), title=example.example_id)

    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, 'localize.jsonl')
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(''.join(line + '\n' for line in lines))
    print("[I] Localization saved as:", os.path.abspath(path))
    return path


# complexity benchmark

@dataclass
class BenchReport:
    '''Counters and timings of PIT and location-based assignment per speaker count.

    .. note::

        rows : list of dict
            Per ``n_speakers``: 'pit_permutations', 'pit_pairwise_evals', 'lbt_permutations',
            'lbt_pairwise_evals', 'pit_time', 'lbt_time' (median seconds per call) and 'time_ratio'.
    '''
    rows: list
    n_reps: int

    def to_frame(self):
        return pd.DataFrame(self.rows)

    @property
    def time_ratios(self):
        return [row['time_ratio'] for row in self.rows]


def _median_time(fn, n_reps):
    times = []
    for _ in range(n_reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def cmd_bench(max_n=MAX_PIT_SPEAKERS, n_reps=100, n_frames=16, n_freqs=65, seed=0, out_dir=None, config=None):
    '''Time PIT against location-based assignment on fixed-size dummy spectrograms.

    Parameters
    ----------
    max_n : int, default: 8
        Speaker counts ``1..max_n`` are measured.
    n_reps : int, default: 100
        Timed repetitions per call; the median is reported.
    out_dir : str, optional
        Write ``bench.csv`` here.

    Returns
    -------
    report : BenchReport
    '''
    if not 1 <= max_n <= MAX_PIT_SPEAKERS:
        raise ValueError("[E] max_n must be in [1, {}], got {}.".format(MAX_PIT_SPEAKERS, max_n))
    if n_reps < 1:
        raise ValueError("[E] n_reps must be positive.")

    rng = get_rng(seed)
    rows = []
    for n in range(1, max_n + 1):
        shape = (n_frames, n_freqs)
        S_hats = [rng.randn(*shape) + 1j * rng.randn(*shape) for _ in range(n)]
        Ss = [rng.randn(*shape) + 1j * rng.randn(*shape) for _ in range(n)]
        order = tuple(range(n))

        pit = pit_assign(S_hats, Ss)
        lbt = lbt_assign(S_hats, Ss, order)
        pit_time = _median_time(lambda: pit_assign(S_hats, Ss), n_reps)
        lbt_time = _median_time(lambda: lbt_assign(S_hats, Ss, order), n_reps)
        rows.append({
            'n_speakers': n,
            'pit_permutations': pit.permutations_scanned,
            'pit_pairwise_evals': pit.pairwise_evals,
            'lbt_permutations': lbt.permutations_scanned,
            'lbt_pairwise_evals': lbt.pairwise_evals,
            'factorial': math.factorial(n),
            'pit_time': pit_time,
            'lbt_time': lbt_time,
            'time_ratio': pit_time / lbt_time,
        })

    report = BenchReport(rows=rows, n_reps=n_reps)
    if out_dir is not None:
        h = None if config is None else config.hash()
        save_csv(report.to_frame(), os.path.join(out_dir, 'bench.csv'), h, seed)
    return report
