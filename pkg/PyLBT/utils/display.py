import os
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def show_profiles(estimate_set, truth=None, path=None, title=None, fontsize=8):
    '''Plot the GCC-PHAT score profile of each speaker.

    Parameters
    ----------
    estimate_set : AzimuthEstimateSet
    truth : list of float, optional
        True azimuths in degrees, drawn as dashed lines.
    path : str, optional
        Save the figure here (PNG) instead of keeping it open.
    '''
    fig, ax = plt.subplots(figsize=(6, 3))
    for k, profile in enumerate(estimate_set.profiles):
        line, = ax.plot(estimate_set.grid, profile, label="output {}".format(k + 1))
        ax.axvline(estimate_set.azimuths[k], color=line.get_color(), linewidth=0.8)
        if truth is not None:
            ax.axvline(truth[k], color=line.get_color(), linestyle='--', linewidth=0.8)

    ax.set_xlabel("azimuth (deg)", fontsize=fontsize)
    ax.set_ylabel("score", fontsize=fontsize)
    ax.legend(fontsize=fontsize)
    if title is not None:
        ax.set_title(title, fontsize=fontsize)
    return _finish(fig, path)


def show_gap_breakdown(df, metric='SI-SNR', path=None, fontsize=8):
    '''Bar plot of a delta metric per azimuth-gap bin and criterion.

    Parameters
    ----------
    df : pandas.DataFrame
        Output of ``gap_breakdown`` with columns 'criterion', 'bin', 'metric', 'delta_mean'.
    metric : str, default: 'SI-SNR'
    '''
    sub = df[df['metric'] == metric]
    bins = list(dict.fromkeys(sub['bin']))
    criteria = list(dict.fromkeys(sub['criterion']))
    width = 0.8 / max(len(criteria), 1)

    fig, ax = plt.subplots(figsize=(6, 3))
    x = np.arange(len(bins))
    for i, criterion in enumerate(criteria):
        values = [sub[(sub['criterion'] == criterion) & (sub['bin'] == b)]['delta_mean'].mean() for b in bins]
        ax.bar(x + i * width, values, width=width, label=criterion)

    ax.set_xticks(x + width * (len(criteria) - 1) / 2)
    ax.set_xticklabels(bins, fontsize=fontsize)
    ax.set_xlabel("azimuth gap (deg)", fontsize=fontsize)
    ax.set_ylabel("delta " + metric, fontsize=fontsize)
    ax.legend(fontsize=fontsize)
    return _finish(fig, path)


def _finish(fig, path):
    fig.tight_layout()
    if path is None:
        return fig
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    print("[I] Figure saved as:", os.path.abspath(path))
    return path
