import os
from typing import Dict, List


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return int(raw)


class Settings:
    # Precision settings (bits of mantissa)
    DEFAULT_BITS: int = _env_int("EIGENWKB_BITS", 256)
    HARNESS_BITS: int = _env_int("EIGENWKB_BITS", 512)
    OUTPUT_DIGITS_MARGIN: int = 5

    # Root finder
    ROOT_MAX_ITERATIONS: int = 200

    # Quadrature and branch tracking
    QUAD_MAX_DEPTH: int = 40
    BRANCH_AMBIGUITY_FACTOR: float = 3.0
    BRANCH_INITIAL_STEPS: int = 64
    BRANCH_MIN_STEP_EXPONENT: int = 30  # smallest step is 2**-30 of a segment
    ANCHOR_RADIUS_FACTOR: float = 10.0
    HULL_MARGIN: float = 1e-12

    # Series
    SERIES_ORDER: int = 8

    # Cache settings
    CACHE_TTL: int = 3600  # 1 hour
    CACHE_MAXSIZE: int = 256

    # API server
    API_HOST: str = os.getenv("EIGENWKB_HOST", "0.0.0.0")
    API_PORT: int = _env_int("EIGENWKB_PORT", 10000)
    API_RELOAD: bool = os.getenv("EIGENWKB_RELOAD", "1") == "1"

    # Logging
    LOG_LEVEL: str = os.getenv("EIGENWKB_LOG_LEVEL", "INFO")

    # Built-in scenarios and the experiments the harness knows about
    SCENARIOS: List[str] = ["legendre2", "jacobi4", "masson_shapiro", "monomial", "custom"]
    EXPERIMENTS: List[str] = ["ratio", "strong", "c1", "cauchy", "zeros", "nth_root"]

    # CSV schema shared by every experiment
    CSV_COLUMNS: List[str] = [
        "scenario", "n", "z_re", "z_im",
        "measured_re", "measured_im", "predicted_re", "predicted_im", "rel_error",
    ]

    DEFAULT_THRESHOLDS: Dict[str, float] = {
        "ratio": 1e-3,
        "strong": 0.1,
        "cauchy": 0.05,
        "zeros": 0.05,
    }


settings = Settings()
