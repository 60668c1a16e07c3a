"""
Centralized configuration for the inverse periodic shadowing laboratory.
All process-wide defaults are managed through environment variables.
"""

import os

# Logging
LOG_LEVEL = os.getenv("INVPERSHADOW_LOG_LEVEL", "INFO")
LOG_DIR = os.getenv("INVPERSHADOW_LOG_DIR", "logs")
LOG_TO_FILE = os.getenv("INVPERSHADOW_LOG_TO_FILE", "1").lower() in ("1", "true", "yes")

# Campaign execution
WORKERS = int(os.getenv("INVPERSHADOW_WORKERS", "4"))
MASTER_SEED = int(os.getenv("INVPERSHADOW_MASTER_SEED", "20240101"))

# Perron solver defaults
SOLVER_TOLERANCE = float(os.getenv("INVPERSHADOW_SOLVER_TOLERANCE", "1e-14"))
SOLVER_MAX_ITERATIONS = int(os.getenv("INVPERSHADOW_SOLVER_MAX_ITERATIONS", "200"))

# Sampled-sup defaults
DEFAULT_SAMPLE_COUNT = int(os.getenv("INVPERSHADOW_SAMPLE_COUNT", "2048"))
