"""
Configuration file for the POVM probability-domain toolkit
"""
import os
from pathlib import Path
from typing import Dict, Any

from dotenv import load_dotenv

load_dotenv()

# Project paths
BASE_DIR = Path(__file__).parent
DATA_DIR = BASE_DIR / "data"
LOGS_DIR = BASE_DIR / "logs"


def _positive_float(name: str, default: float) -> float:
    """Read a strictly positive float from the environment"""
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {raw!r}")
    return value


# Numerical tolerance used wherever a tolerance is optional
DEFAULT_TOL = _positive_float("POVM_DOMAIN_TOL", 1e-10)

# Matrix kernel (Jacobi rotations)
KERNEL_CONFIG: Dict[str, Any] = {
    "max_sweeps": 100,
}

# Probability domain sampling
DOMAIN_CONFIG: Dict[str, Any] = {
    "samples": 200,
    "tetrahedral_center": 0.25,
    "tetrahedral_radius_squared": 1.0 / 12.0,
}

# Finite-sample estimation
ESTIMATION_CONFIG: Dict[str, Any] = {
    "k": 1.0,  # one-sigma error box
    "budget": 10000,  # membership evaluations per error-box search
    "bisection_steps": 40,
}

# Command-line surface
CLI_CONFIG: Dict[str, Any] = {
    "seed": 0,
    "shots": 1000,
    "grid": (64, 128),  # Bloch polar x azimuthal samples
    "float_format": "%.17g",
}

# Logging Configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_TO_FILE = os.getenv("LOG_TO_FILE", "False").lower() == "true"

LOGGING_CONFIG: Dict[str, Any] = {
    "formatters": {
        "default": {
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        },
    },
    "file": str(LOGS_DIR / "povm_domain.log"),
    "level": LOG_LEVEL,
}
