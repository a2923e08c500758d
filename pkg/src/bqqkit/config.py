import logging
import os

import coloredlogs

# Configure logger
logger = logging.getLogger(__name__)

# Install coloredlogs with custom format
# Can be overridden with BQQ_LOG_LEVEL environment variable
coloredlogs.install(
    level=os.getenv("BQQ_LOG_LEVEL", "INFO"),
    logger=logger,
    fmt="%(asctime)s %(name)s %(levelname)s %(message)s",
    datefmt="%H:%M:%S",
)

# Worker pool bound for sweeps
# Can be overridden with BQQ_THREADS environment variable
BQQ_THREADS: int = int(os.getenv("BQQ_THREADS", str(os.cpu_count() or 1)))

# Bit width of every stored scaling factor (memory accounting and codec)
SCALAR_BITS: int = int(os.getenv("BQQ_SCALAR_BITS", "32"))

# Annealing defaults for the subproblem solver
DEFAULT_T_INIT = 0.2
DEFAULT_T_FIN = 0.005
DEFAULT_ETA = 0.06
DEFAULT_ZETA = 4.0
DEFAULT_N_STEP = 50_000

# AMFD progress is logged at DEBUG every this many steps
LOG_EVERY_STEPS = 5_000

# Baseline defaults
DEFAULT_UQ_SPLIT = 100
DEFAULT_VQ_DIM = 8
DEFAULT_VQ_K = 256
DEFAULT_VQ_MAX_ITER = 100
DEFAULT_VQ_TOL = 1e-6
DEFAULT_E8_SCALE_BITS = 2

# Largest PUBO solved by exhaustive enumeration
MAX_ENUMERATION_VARS = 24

# BCQ re-picks signs from all 2**p patterns per element
MAX_BCQ_ROUNDS = 16

# Pseudo-inverse cutoff for the 4x4 scaling-factor system
SFO_RCOND = 1e-12

# Prometheus metric names
# Counters are exported with a _total suffix
CELLS_METRIC_NAME = "bqq_sweep_cells"
MSE_METRIC_NAME = "bqq_sweep_last_mse"
MEMORY_METRIC_NAME = "bqq_sweep_last_memory_bits"
CELL_SECONDS_METRIC_NAME = "bqq_sweep_cell_seconds"
