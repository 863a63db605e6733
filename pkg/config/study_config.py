import os
from dataclasses import dataclass, field
from typing import Dict

from dotenv import load_dotenv

load_dotenv()


@dataclass
class StudyConfig:
    # Paths
    OUTPUT_DIR: str = field(default_factory=lambda: os.getenv("VCSELECT_OUTPUT_DIR", "data/output"))
    LOGS_DIR: str = "logs"

    # Grid and progress reporting
    GRID_SIZE: int = 200
    LOG_EVERY: int = 1000
    PSRF_CUTOFF: float = 1.1
    PSRF_CHECKPOINT_STEP: int = 1000

    # Labels used in the study tables
    METHOD_LABELS: Dict[str, str] = None

    def __post_init__(self):
        self.METHOD_LABELS = {
            'bqrvcss': 'BQRVCSS',
            'bqrvc': 'BQRVC',
            'bvcss': 'BVCSS',
            'bvc': 'BVC',
        }

    def ensure_directories(self):
        for d in [self.OUTPUT_DIR, self.LOGS_DIR]:
            os.makedirs(d, exist_ok=True)


# Global configuration
study_config = StudyConfig()
