import logging
import os

from vcselect import repository
from vcselect.commands import run_command
from vcselect.environment import output_dir
from vcselect.errors import ConfigurationError
from vcselect.pipeline import FitOrchestrator

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('evaluate', help='Score fits against their true curves')
    parser.add_argument('--fit-dir', action='append', required=True,
                        help='fit output directory; repeat for batch mode')
    parser.add_argument('--truth', action='append',
                        help='truth JSON, one per --fit-dir; defaults to the truth path recorded with the fit')
    parser.add_argument('--output', help='aggregate JSON written in batch mode')
    parser.set_defaults(func=cmd_evaluate)


@run_command
def cmd_evaluate(args) -> int:
    truths = args.truth or [None] * len(args.fit_dir)
    if len(truths) != len(args.fit_dir):
        raise ConfigurationError(f'{len(truths)} truth files for {len(args.fit_dir)} fits')
    orchestrator = FitOrchestrator()
    if len(args.fit_dir) == 1:
        metrics = orchestrator.evaluate(args.fit_dir[0], truths[0])
        logger.info(f"{args.fit_dir[0]}: {metrics['fit_class']}, TIMSE {metrics['timse']:.4f}")
        return 0
    batch = orchestrator.evaluate_batch(args.fit_dir, truths)
    path = args.output or os.path.join(output_dir(), 'aggregate.json')
    repository.write_json(batch, path)
    aggregate = batch['aggregate']
    logger.info(f"Batch of {aggregate['replicates']}: C={aggregate['C']:.2f} O={aggregate['O']:.2f} "
                f"U={aggregate['U']:.2f} TIMSE {aggregate['timse']}")
    return 0
