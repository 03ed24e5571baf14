"""
Application configuration and constants.
Centralized tolerances, grid defaults and output settings.
"""
import logging
import math
import os

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SELFSWITCH_OUTPUT_DIR"


class Settings:
    """Application settings and configuration."""

    # Output
    OUTPUT_DIR: str = os.environ.get(OUTPUT_DIR_ENV, "results")

    # State invariants
    HERMITICITY_TOL: float = 1e-10
    POSITIVITY_TOL: float = 1e-10
    EIGEN_RECONSTRUCTION_TOL: float = 1e-12
    PROJECTOR_TOL: float = 1e-12

    # Integrator
    INTEGRATOR_POSITIVITY_TOL: float = 1e-6
    DRIFT_LOG_STRIDE: int = 10
    # Conserved quantities with |q₀| below this drift absolutely; Tr H f(ρ) may vanish
    DRIFT_SCALE_FLOOR: float = 1.0
    MOMENT_ORDER: int = 4
    CONVERGENCE_DT: float = 4e-3

    # Verification
    FD_STEP: float = 1e-4
    RESIDUAL_THRESHOLD: float = 1e-6
    ISOSPECTRAL_TOL: float = 1e-10
    CLOSED_FORM_DRIFT_TOL: float = 1e-6
    INTEGRATOR_DRIFT_TOL: float = 1e-5
    ORDER_RATIO_RANGE: tuple[float, float] = (12.0, 20.0)

    # Oscillator basis
    MAX_OSCILLATOR_LEVEL: int = 200
    X_GRID_MIN: float = -8.0
    X_GRID_MAX: float = 8.0
    X_GRID_POINTS: int = 401

    # Figures
    FIGURE_GRID: tuple[int, int] = (201, 201)
    FIGURE_T0: float = 150.0
    FIGURE_T1: float = 0.0
    FIGURE_H_MAX: float = 2.45
    FIGURE_RANGES: dict = {
        1: {"t": (-40.0, 40.0), "x": (-8.0, 8.0)},
        2: {"t": (-40.0, 40.0), "h": ((15 + math.sqrt(5)) / (5 + math.sqrt(5)), 2.45)},
        3: {"t": (-5.0, 5.0)},
        4: {"t": (0.0, 300.0), "t1": (0.0, 300.0)},
        5: {"t": (0.0, 300.0), "t1": (0.0, 300.0)},
        6: {"t": (-60.0, 60.0), "t0": (-60.0, 60.0)},
    }

    # CSV
    CSV_SIGNIFICANT_DIGITS: int = 17
    CSV_COMMENT_PREFIX: str = "#"

    @classmethod
    def describe_output_dir(cls) -> None:
        """Log where results go, warning when the environment overrides it."""
        if os.environ.get(OUTPUT_DIR_ENV):
            logger.warning("Output directory overridden by %s: %s", OUTPUT_DIR_ENV, cls.OUTPUT_DIR)
        else:
            logger.info("Writing results under %s", cls.OUTPUT_DIR)


# Create global settings instance
settings = Settings()
