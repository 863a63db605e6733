import logging

from vcselect.commands import run_command
from vcselect.pipeline import ArtifactExtractor, StudyOrchestrator

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('replicate-study', help='Simulate, fit and score a grid of scenarios')
    parser.add_argument('--config', help='study grid JSON file')
    parser.add_argument('--replicates', type=int)
    parser.add_argument('--base-seed', type=int)
    parser.add_argument('--workers', type=int, help='processes for parallel replicates')
    parser.add_argument('--output-dir')
    parser.set_defaults(func=cmd_replicate_study)


@run_command
def cmd_replicate_study(args) -> int:
    grid = ArtifactExtractor().load_study_grid(
        args.config, {'replicates': args.replicates, 'base_seed': args.base_seed}
    )
    report = StudyOrchestrator(grid, args.output_dir, args.workers).run()
    failed = sum(len(stats['errors']) for stats in report.values())
    for cell, stats in report.items():
        logger.info(f"{cell} -> created {stats['created']}, resumed {stats['resumed']}, "
                    f"errors {len(stats['errors'])}")
    return 1 if failed else 0
