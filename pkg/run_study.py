import logging
import sys

from vcselect.environment import configure_logging
from vcselect.pipeline import ArtifactExtractor, StudyOrchestrator

logger = logging.getLogger("vcselect-study")


def main(config_path: str = None):
    configure_logging(log_file="study.log")
    grid = ArtifactExtractor().load_study_grid(config_path)
    report = StudyOrchestrator(grid).run()
    logger.info("Study finished. Report:")
    for cell, stats in report.items():
        logger.info(f"{cell} -> {stats}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
