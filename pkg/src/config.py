# config.py
import os
import logging
from dotenv import load_dotenv

load_dotenv()


def _int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


def _float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


# ---- Grid defaults ----
GRID_N = _int("WP_GRID_N", 2049)
WINDOW = _float("WP_WINDOW", 8.0)
LEVELS = _int("WP_LEVELS", 8)
Y_MAX = _float("WP_Y_MAX", 2.0)
RESOLUTION = _int("WP_RESOLUTION", 2048)

# ---- Run defaults ----
SEED = _int("WP_SEED", 0)
PAIR_BUDGET = _int("WP_PAIR_BUDGET", 2_000_000)
OUT_DIR = os.getenv("WP_OUT_DIR", "out")
DB_URL = os.getenv("WP_DB_URL", "sqlite:///wp_lab.db")
LOG_LEVEL = os.getenv("WP_LOG_LEVEL", "INFO")


def configure_logging(level: str = None) -> None:
    """Configure root logging once for CLI runs"""
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
