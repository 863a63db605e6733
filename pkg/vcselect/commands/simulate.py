import logging
import os

from vcselect.commands import run_command
from vcselect.environment import output_dir
from vcselect.pipeline import ArtifactExtractor, ArtifactLoader
from vcselect.simulate import simulate_dataset

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('simulate', help='Write simulated datasets with their true curves')
    parser.add_argument('--config', help='scenario JSON file')
    parser.add_argument('--n', type=int)
    parser.add_argument('--p', type=int)
    parser.add_argument('--covariate-kind', choices=['gene', 'snp'])
    parser.add_argument('--error-kind', choices=['normal', 'normal_mixture', 'laplace', 'lognormal', 't2'])
    parser.add_argument('--heteroscedastic', action='store_const', const=True)
    parser.add_argument('--tau', type=float)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--ar-rho', type=float)
    parser.add_argument('--mixture-scale', choices=['variance', 'sd'])
    parser.add_argument('--hard-intercept', action='store_const', const=True)
    parser.add_argument('--clinical-covariates', type=int)
    parser.add_argument('--replicates', type=int, default=1,
                        help='number of datasets; replicate r uses seed + r')
    parser.add_argument('--output-dir')
    parser.set_defaults(func=cmd_simulate)


@run_command
def cmd_simulate(args) -> int:
    overrides = {
        'n': args.n, 'p': args.p, 'covariate_kind': args.covariate_kind, 'error_kind': args.error_kind,
        'heteroscedastic': args.heteroscedastic, 'tau': args.tau, 'seed': args.seed, 'ar_rho': args.ar_rho,
        'mixture_scale': args.mixture_scale, 'hard_intercept': args.hard_intercept,
        'clinical_covariates': args.clinical_covariates,
    }
    spec = ArtifactExtractor().load_scenario(args.config, overrides)
    if args.replicates < 1:
        raise ValueError('--replicates must be at least 1')
    directory = output_dir(args.output_dir)
    loader = ArtifactLoader()
    if args.replicates == 1:
        loader.save_simulation(simulate_dataset(spec), directory)
        return 0
    for r in range(args.replicates):
        replicate = spec.model_copy(update={'seed': spec.seed + r})
        loader.save_simulation(simulate_dataset(replicate), os.path.join(directory, f'replicate_{r}'))
    logger.info(f"Simulated {args.replicates} replicates of {spec.label()} into {directory}")
    return 0
