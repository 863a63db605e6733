import logging
import os
from typing import Optional

from dotenv import load_dotenv

from config.study_config import study_config

# Load environment variables
load_dotenv()

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def output_dir(override: Optional[str] = None) -> str:
    """Resolve the output directory: explicit flag, then VCSELECT_OUTPUT_DIR, then the config default."""
    return override or os.getenv("VCSELECT_OUTPUT_DIR") or study_config.OUTPUT_DIR


def configure_logging(level: Optional[str] = None, log_file: str = "vcselect.log"):
    level_name = (level or os.getenv("VCSELECT_LOG_LEVEL", "INFO")).upper()
    study_config.ensure_directories()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(os.path.join(study_config.LOGS_DIR, log_file)),
            logging.StreamHandler()
        ]
    )
