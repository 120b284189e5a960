import os
import sys
import json
import argparse
import traceback
from .config import ExperimentConfig
from .experiments import cmd_simulate, cmd_train, cmd_eval, cmd_localize, cmd_bench
from ..criteria import MAX_PIT_SPEAKERS


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("[E] {}".format(message))


def build_parser():
    parser = _Parser(prog='pylbt', description='Location-based training experiments.')
    common = _Parser(add_help=False)
    common.add_argument('--config', type=str, default=None, help='ExperimentConfig JSON file')
    common.add_argument('--seed', type=int, default=None, help='Overrides the config seed')
    common.add_argument('--out-dir', type=str, default='.', help='Output folder')
    common.add_argument('--verbose', action='store_true')

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('simulate', parents=[common], help='Simulate a dataset split')
    p.add_argument('--split', choices=['train', 'test'], default='train')
    p.add_argument('--count', type=int, default=None)
    p.add_argument('--dry-dir', type=str, default=None, help='Folder of 16 kHz mono WAVs')
    p.add_argument('--cache-dir', type=str, default=None, help='RIR cache folder')

    p = sub.add_parser('train', parents=[common], help='Train a separator')
    p.add_argument('--manifest', type=str, required=True)
    p.add_argument('--criterion', choices=['pit', 'azimuth', 'distance'], default=None)
    p.add_argument('--n-steps', type=int, default=None)
    p.add_argument('--batch-size', type=int, default=None)

    p = sub.add_parser('eval', parents=[common], help='Evaluate separators')
    p.add_argument('--manifest', type=str, required=True)
    p.add_argument('--checkpoint', action='append', default=[], help='label=path or path, repeatable')
    p.add_argument('--oracle', action='store_true', help='Also evaluate the ideal-cIRM separator')
    p.add_argument('--combined', action='store_true', help="Select between the 'azimuth' and 'distance' checkpoints")
    p.add_argument('--oracle-localizer', action='store_true')
    p.add_argument('--scoring', choices=['fixed', 'best-permutation'], default=None)
    p.add_argument('--threshold', type=float, default=None)
    p.add_argument('--gap-bins', type=float, nargs='+', default=None)
    p.add_argument('--plot', action='store_true')

    p = sub.add_parser('localize', parents=[common], help='Localize separated outputs')
    p.add_argument('--manifest', type=str, required=True)
    p.add_argument('--checkpoint', type=str, default=None, help='Oracle masks when missing')
    p.add_argument('--grid-step', type=float, default=None)
    p.add_argument('--profiles', action='store_true', help='Include the score profiles')
    p.add_argument('--plot', action='store_true', help='Plot the score profiles of the first example')

    p = sub.add_parser('bench', parents=[common], help='PIT against location-based assignment')
    p.add_argument('--max-n', type=int, default=MAX_PIT_SPEAKERS)
    p.add_argument('--reps', type=int, default=100)
    return parser


def load_config(args):
    config = ExperimentConfig() if args.config is None else ExperimentConfig.from_json(args.config)
    return config.override(seed=args.seed, dry_dir=getattr(args, 'dry_dir', None),
                           scoring=getattr(args, 'scoring', None), threshold=getattr(args, 'threshold', None),
                           grid_step=getattr(args, 'grid_step', None), n_steps=getattr(args, 'n_steps', None),
                           batch_size=getattr(args, 'batch_size', None))


def run(args):
    config = load_config(args)
    if args.command == 'simulate':
        return {'manifest': cmd_simulate(config, args.out_dir, split=args.split, count=args.count,
                                                   cache_dir=args.cache_dir, verbose=args.verbose)}
    if args.command == 'train':
        return cmd_train(config, args.manifest, args.out_dir, criterion=args.criterion, verbose=args.verbose)
    if args.command == 'eval':
        cmd_eval(config, args.manifest, args.out_dir, checkpoints=args.checkpoint, oracle=args.oracle,
                 combined=args.combined, oracle_localizer=args.oracle_localizer, gap_bins=args.gap_bins,
                 plot=args.plot, verbose=args.verbose)
        return {'report': os.path.join(args.out_dir, 'eval_aggregate.csv')}
    if args.command == 'localize':
        return {'localization': cmd_localize(config, args.manifest, args.out_dir, checkpoint=args.checkpoint,
                                             include_profiles=args.profiles, plot=args.plot)}
    report = cmd_bench(max_n=args.max_n, n_reps=args.reps, seed=config.seed, out_dir=args.out_dir, config=config)
    return {'bench': os.path.join(args.out_dir, 'bench.csv'), 'time_ratio': report.time_ratios}


def main(argv=None):
    '''Entry point of the ``pylbt`` command.

    Prints a JSON summary on success; on failure writes ``{"error", "message", "command"}`` as JSON to stderr
    and exits with status 1.
    '''
    argv = sys.argv[1:] if argv is None else list(argv)
    args = None
    try:
        args = build_parser().parse_args(argv)
        result = run(args)
    except Exception as e:
        if getattr(args, "verbose", False):
            traceback.print_exc()
        command = args.command if args is not None else next((a for a in argv if not a.startswith("-")), None)
        error = {"error": type(e).__name__, "message": str(e), "command": command}
        sys.stderr.write(json.dumps(error) + '\n')
        return 1
    print(json.dumps(result, sort_keys=True))
    return 0


if __name__ == '__main__':
    sys.exit(main())
