"""Application configuration."""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Base configuration."""

    APP_NAME = os.environ.get("APP_NAME", "Halpern Rates")
    DEBUG = False
    TESTING = False

    # Exact arithmetic
    # Decimal digits an exact count may hold before switching to log-estimates
    DIGIT_BUDGET = int(os.environ.get("DIGIT_BUDGET", 1_000_000))
    GUARD_BAND = float(os.environ.get("GUARD_BAND", 1e-12))
    GAMMA_ENUMERATION_CAP = int(os.environ.get("GAMMA_ENUMERATION_CAP", 100_000))
    TOWER_ITERATION_BUDGET = int(os.environ.get("TOWER_ITERATION_BUDGET", 100_000))
    BROWDER_ITERATION_BUDGET = int(
        os.environ.get("BROWDER_ITERATION_BUDGET", 1_000_000)
    )
    REPORT_ORBIT_LIMIT = int(os.environ.get("REPORT_ORBIT_LIMIT", 256))

    # Iteration
    TRACE_CAP = int(os.environ.get("TRACE_CAP", 2_000_000))
    DEFAULT_HORIZON = int(os.environ.get("DEFAULT_HORIZON", 1_000_000))

    # Browder approximants
    PICARD_MAX_ITER = int(os.environ.get("PICARD_MAX_ITER", 10_000_000))
    SOLVER_TOL_FACTOR = float(os.environ.get("SOLVER_TOL_FACTOR", 1e-10))

    # Fuzzing
    FUZZ_ATTEMPT_CAP = int(os.environ.get("FUZZ_ATTEMPT_CAP", 1000))
    FUZZ_TRIALS = int(os.environ.get("FUZZ_TRIALS", 10_000))
    DEFAULT_SEED = int(os.environ.get("DEFAULT_SEED", 42))
    WORKERS = int(os.environ.get("WORKERS", 1))

    # Outputs
    OUTPUT_DIR = os.environ.get("OUTPUT_DIR", "out")

    # Logging
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
    LOG_FILE = os.environ.get("LOG_FILE", "logs/halpern.log")

    @classmethod
    def init_app(cls, runtime):
        """Hook for environment-specific initialization."""


class DevelopmentConfig(Config):
    """Development configuration."""

    DEBUG = os.environ.get("DEBUG", "True").lower() == "true"
    TESTING = False


class TestingConfig(Config):
    """Testing configuration."""

    TESTING = True
    DEBUG = True
    DIGIT_BUDGET = 1_000_000
    TRACE_CAP = 200_000
    DEFAULT_HORIZON = 50_000
    FUZZ_TRIALS = 200
    PICARD_MAX_ITER = 1_000_000
    WORKERS = 1


class ProductionConfig(Config):
    """Production configuration."""

    DEBUG = False
    TESTING = False

    @classmethod
    def init_app(cls, runtime):
        """Initialize production-specific settings."""
        Config.init_app(runtime)

        # Experiments must be able to persist their reports
        output_dir = runtime.config["OUTPUT_DIR"]
        os.makedirs(output_dir, exist_ok=True)
        assert os.access(output_dir, os.W_OK), f"OUTPUT_DIR {output_dir} must be writable"


# Configuration dictionary
config = {
    "development": DevelopmentConfig,
    "testing": TestingConfig,
    "production": ProductionConfig,
    "default": DevelopmentConfig,
}
