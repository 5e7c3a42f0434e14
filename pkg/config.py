MAX_SUPPORTS = 10**6
MAX_ACTIVE_SUBSETS = 10**6
MAX_INEQUALITY_ROWS = 12

DEFAULT_SAMPLES = 5

SQRT_DENOMINATOR = 10**6
SQRT_REFINEMENTS = 4

SCHEMA_VERSION = "1"

LOG_DIR = "logs"
ERROR_LOG_DIR = "logs/errors"
LOG_LEVEL = "INFO"
