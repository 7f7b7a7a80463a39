"""todkit: end-to-end task-oriented dialog engine with a rule-based user
simulator and automatic evaluation."""

from pathlib import Path

__version__ = "0.1.0"

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_DB_DIR = DATA_DIR / "db"
