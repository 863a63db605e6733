import logging

from vcselect.commands import run_command
from vcselect.environment import output_dir
from vcselect.pipeline import ArtifactExtractor, FitOrchestrator

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('fit', help='Run the Gibbs sampler on a dataset and summarize the posterior')
    parser.add_argument('--config', help='run configuration JSON file')
    parser.add_argument('--data', help='dataset CSV')
    parser.add_argument('--truth', help='truth JSON recorded for a later evaluate')
    parser.add_argument('--method', choices=['bqrvcss', 'bqrvc', 'bvcss', 'bvc'])
    parser.add_argument('--tau', type=float)
    parser.add_argument('--degree', type=int)
    parser.add_argument('--interior-knots', type=int)
    parser.add_argument('--iterations', type=int)
    parser.add_argument('--burn-in', type=int)
    parser.add_argument('--thin', type=int)
    parser.add_argument('--chains', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--log-every', type=int)
    parser.add_argument('--threshold', type=float)
    parser.add_argument('--ci-level', type=float)
    parser.add_argument('--grid-size', type=int)
    parser.add_argument('--track-all', action='store_const', const=True)
    parser.add_argument('--no-latents', action='store_const', const=False, dest='store_latents')
    parser.add_argument('--workers', type=int, help='processes for parallel chains')
    parser.add_argument('--output-dir')
    parser.set_defaults(func=cmd_fit)


def run_config_overrides(args) -> dict:
    return {
        'method': args.method,
        'tau': args.tau,
        'spline': {'degree': args.degree, 'interior_knots': args.interior_knots},
        'mcmc': {'iterations': args.iterations, 'burn_in': args.burn_in, 'thin': args.thin,
                 'chains': args.chains, 'seed': args.seed, 'log_every': args.log_every},
        'data_path': args.data,
        'truth_path': args.truth,
        'output_dir': args.output_dir,
        'threshold': args.threshold,
        'ci_level': args.ci_level,
        'grid_size': args.grid_size,
        'track_all_coefficients': args.track_all,
        'store_latents': args.store_latents,
    }


@run_command
def cmd_fit(args) -> int:
    config = ArtifactExtractor().load_run_config(args.config, run_config_overrides(args))
    config = config.model_copy(update={'output_dir': output_dir(config.output_dir)})
    paths = FitOrchestrator().run_fit(config, config.output_dir, args.workers)
    logger.info(f"Fit written: {paths['summary']}")
    return 0
