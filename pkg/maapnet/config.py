"""
Runtime configuration.

Values come from the environment (optionally a local .env file) and can be
overridden by command-line flags.
"""

import os

from dotenv import load_dotenv

load_dotenv()

# Logging
LOG_LEVEL = os.getenv("MAAPNET_LOG_LEVEL", "INFO").upper()
LOG_DIR = os.getenv("MAAPNET_LOG_DIR", "logs")
LOG_FILE_ENABLED = os.getenv("MAAPNET_LOG_FILE", "1") not in ("0", "false", "no", "off")

# Verification defaults
DEFAULT_SEED = int(os.getenv("MAAPNET_SEED", "20240101"))
DEFAULT_TRIALS = int(os.getenv("MAAPNET_TRIALS", "200"))
FLOAT_RTOL = float(os.getenv("MAAPNET_FLOAT_RTOL", "1e-6"))  # relative tolerance for float-mode checks
WORKERS = int(os.getenv("MAAPNET_WORKERS", "1"))

# Where `build` writes documents when no --out-dir is given
OUTPUT_DIR = os.getenv("MAAPNET_OUTPUT_DIR", ".")
