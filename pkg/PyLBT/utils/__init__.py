from .common import get_rng, split_seeds, config_hash, to_jsonable, format_time
from .decorator_utils import timeit, ignore_warnings

from .signal_utils import SAMPLE_RATE, StftConfig, ComplexSpectrogram
from .signal_utils import as_bins, n_frames, stft, stft_multichannel, istft, apply_cirm, ideal_cirm
from .wav_utils import read_wav, write_wav

from .metrics import get_metrics, si_snr, sdr, estoi
from .evaluate_utils import EvalRecord, eval_example, best_permutation, record

from .dataframe_utils import get_config, _make_name, save_csv
from .display import show_profiles, show_gap_breakdown
