"""
Configuration settings for the Tropical EP Analyzer.

This module loads environment variables and provides the numeric defaults
used by the exact pipeline, the amoeba sampler and the numeric verification
layer. Every value can be overridden through the environment or a .env file.
"""

import os
from pydantic_settings import BaseSettings
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Logging Settings
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Output Settings
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "out")
    ZERO_TOL: float = float(os.getenv("ZERO_TOL", "1e-12"))  # display only

    # Amoeba Settings
    AMOEBA_R_MIN: float = float(os.getenv("AMOEBA_R_MIN", "1e-4"))
    AMOEBA_R_MAX: float = float(os.getenv("AMOEBA_R_MAX", "1e4"))
    AMOEBA_N_R: int = int(os.getenv("AMOEBA_N_R", "200"))
    AMOEBA_N_THETA: int = int(os.getenv("AMOEBA_N_THETA", "256"))
    AMOEBA_RESIDUAL_TOL: float = float(os.getenv("AMOEBA_RESIDUAL_TOL", "1e-8"))
    AMOEBA_MIN_ABS: float = float(os.getenv("AMOEBA_MIN_ABS", "1e-300"))
    VACUOLE_GRID: int = int(os.getenv("VACUOLE_GRID", "64"))
    TENTACLE_ANGLE_TOL: float = float(os.getenv("TENTACLE_ANGLE_TOL", "0.1"))

    # Splitting Fit Settings
    DECADE_MIN: int = int(os.getenv("DECADE_MIN", "3"))
    DECADE_MAX: int = int(os.getenv("DECADE_MAX", "9"))
    SPLITTING_FLOOR: float = float(os.getenv("SPLITTING_FLOOR", "1e-12"))

    # Holonomy Settings
    LOOP_RADIUS: float = float(os.getenv("LOOP_RADIUS", "0.1"))
    LOOP_SAMPLES: int = int(os.getenv("LOOP_SAMPLES", "512"))
    LOOP_MIN_SAMPLES: int = int(os.getenv("LOOP_MIN_SAMPLES", "64"))
    LOOP_MAX_SAMPLES: int = int(os.getenv("LOOP_MAX_SAMPLES", "4096"))
    MATCH_AMBIGUITY_TOL: float = float(os.getenv("MATCH_AMBIGUITY_TOL", "1e-10"))
    CONTINUITY_FACTOR: float = float(os.getenv("CONTINUITY_FACTOR", "10"))
    PETAL_RADIUS_SHARE: float = float(os.getenv("PETAL_RADIUS_SHARE", "0.5"))

    # Linear Algebra Settings
    EIGEN_MAX_DIM: int = int(os.getenv("EIGEN_MAX_DIM", "64"))
    CHARPOLY_MAX_DIM: int = int(os.getenv("CHARPOLY_MAX_DIM", "16"))  # warning threshold

    class Config:
        env_file = ".env"
        case_sensitive = True


# Create a global settings object
settings = Settings()


def get_settings() -> Settings:
    """Return the settings object."""
    return settings
