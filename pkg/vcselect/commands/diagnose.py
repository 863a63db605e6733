import logging

from config.study_config import study_config
from vcselect.commands import run_command
from vcselect.pipeline import FitOrchestrator

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('diagnose', help='Gelman-Rubin PSRF of a multi-chain fit')
    parser.add_argument('--fit-dir', required=True)
    parser.add_argument('--split', action='store_true', help='halve every chain; works with a single chain')
    parser.add_argument('--checkpoint-step', type=int, default=study_config.PSRF_CHECKPOINT_STEP)
    parser.add_argument('--track-all', action='store_const', const=True)
    parser.add_argument('--cutoff', type=float, default=study_config.PSRF_CUTOFF)
    parser.set_defaults(func=cmd_diagnose)


@run_command
def cmd_diagnose(args) -> int:
    report = FitOrchestrator().diagnose(args.fit_dir, split=args.split, checkpoint_step=args.checkpoint_step,
                                        track_all=args.track_all, cutoff=args.cutoff)
    if not report['converged']:
        logger.warning(f"PSRF above {args.cutoff} for some tracked parameters (max {report['max_psrf']:.3f})")
    return 0
