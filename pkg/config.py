"""
Configuration for the CASS source-separation toolkit.
Load from environment or .env; experiment hyperparameters live in config files (see cli/experiment.py).
"""
import os
from pathlib import Path

from dotenv import load_dotenv
load_dotenv()

VERSION = "0.3.0"

# Paths
BASE_DIR = Path(__file__).resolve().parent
DATA_DIR = Path(os.getenv("CASS_DATA_DIR", str(BASE_DIR / "data")))
OUTPUT_DIR = Path(os.getenv("CASS_OUTPUT_DIR", str(BASE_DIR / "runs")))

# Run registry (SQLite by default)
DATABASE_URL: str = os.getenv("DATABASE_URL", f"sqlite:///{DATA_DIR / 'registry.db'}")

LOG_LEVEL: str = os.getenv("CASS_LOG_LEVEL", "INFO").upper()

# Torch device for training/evaluation; cpu keeps runs bit-reproducible
DEVICE: str = os.getenv("CASS_DEVICE", "cpu")

# Chunk size for forward passes during evaluation (fixed so trainer and eval agree bitwise)
EVAL_BATCH: int = int(os.getenv("CASS_EVAL_BATCH", "64"))

# Results browser
WEB_HOST: str = os.getenv("WEB_HOST", "127.0.0.1")
WEB_PORT: int = int(os.getenv("WEB_PORT", "8000"))
