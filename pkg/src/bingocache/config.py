"""Package-wide defaults, logger and error helper."""
import logging
import os

# community estimation and identification
DEFAULT_BETA = 3
DEFAULT_XI = 4
DEFAULT_RHO = 1
DEFAULT_CHUNK_SIZE = 10**4
DEFAULT_MIN_COMMUNITY_SIZE = 3
DEFAULT_PHI_MAX = 0.5
DEFAULT_PENDING_CAP = 64
# requests a resident file may go unrequested before it is purged
DEFAULT_STALENESS = 500

# workload
DEFAULT_NUM_USERS = 2000
DEFAULT_NUM_COMMUNITIES = 50
DEFAULT_SIZE_EXPONENT = 2.5
DEFAULT_MIN_SIZE = 10
DEFAULT_MAX_SIZE = 200
DEFAULT_NUM_FILES = 10**6
DEFAULT_ALPHA = 0.8
DEFAULT_NOISE_RATE = 0.1
DEFAULT_TOTAL_REQUESTS = 10**5

# experiment cell
DEFAULT_CAPACITY = 20
DEFAULT_BATCH_SIZE = 40
DEFAULT_SEEDS = tuple(range(10))

# request origin marker for requests not generated by a community session
NOISE_ORIGIN = -1

POLICY_NAMES = ("BINGO", "FIFO", "LRU", "LFU", "MPC", "RND")


def raise_error(exception, message=None):
    """Raise exception with the given message.

    Args:
        exception (Exception): python exception type.
        message (str): the error message.
    """
    raise exception(message)


class CustomHandler(logging.StreamHandler):
    """Custom handler for logging algorithm."""

    def format(self, record):
        """Format the record with specific format."""
        from bingocache import __version__

        fmt = f"[bingocache {__version__}|%(levelname)s|%(asctime)s]: %(message)s"
        return logging.Formatter(fmt, datefmt="%Y-%m-%d %H:%M:%S").format(record)


log = logging.getLogger(__name__)
log.setLevel(int(os.environ.get("BINGOCACHE_LOG_LEVEL", 3)) * 10)
log.addHandler(CustomHandler())
