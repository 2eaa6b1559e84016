"""
Runtime settings for the prosumer QAOA toolkit.

Collects the knobs that more than one module needs:
  • statevector qubit cap (overridable through the environment)
  • enumeration / brute-force size bounds
  • data locations
  • logging setup for the command-line entry points
"""

import logging
import os
from pathlib import Path

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Statevector cap: 2^24 complex128 amplitudes is 256 MiB.
MAX_QUBITS_ENV = "PROSUMER_QAOA_MAX_QUBITS"
DEFAULT_MAX_QUBITS = 24

ENUMERATION_LIMIT = 30  # load variables
BRUTE_FORCE_LIMIT = 30  # QUBO / Ising variables
EXHAUSTIVE_VERIFY_LIMIT = 20
VERIFY_SAMPLE_SIZE = 1 << 14

DIAGONAL_CHUNK = 1 << 16

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = PROJECT_ROOT / "data"
FIXTURE_A_PATH = DATA_DIR / "fixture_a.json"


def default_max_qubits() -> int:
    """Return the statevector cap, honouring PROSUMER_QAOA_MAX_QUBITS when set."""
    raw = os.environ.get(MAX_QUBITS_ENV)
    if not raw:
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {MAX_QUBITS_ENV}={raw!r}: not an integer")
        return DEFAULT_MAX_QUBITS
    if value < 1:
        logger.warning(f"Ignoring {MAX_QUBITS_ENV}={value}: must be >= 1")
        return DEFAULT_MAX_QUBITS
    return value


def configure_logging(verbosity: int = 0) -> None:
    """Set up root logging once for CLI use (0 = warnings, 1 = info, 2+ = debug)."""
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)
