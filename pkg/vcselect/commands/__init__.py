import functools
import logging

from vcselect.errors import VcSelectError

logger = logging.getLogger(__name__)


def run_command(handler):
    """Log a failed command and turn it into exit status 1."""

    @functools.wraps(handler)
    def wrapper(args) -> int:
        try:
            return handler(args)
        except (VcSelectError, ValueError, OSError) as e:
            logger.error(f"{args.command} failed: {e}")
            return 1

    return wrapper
