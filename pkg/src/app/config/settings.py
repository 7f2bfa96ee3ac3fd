from typing import List

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Limit estimation settings
    DEFAULT_TOL: float = 1e-6
    SCHEDULE_RHO0: float = 1.0
    SCHEDULE_GAMMA: float = 0.5
    SCHEDULE_STEPS: int = 12
    SCHEDULE_RESOLUTION_FACTOR: float = 2.0

    # Local probing settings (shrinking spheres around a point)
    PROBE_RHO0: float = 1e-2
    PROBE_GAMMA: float = 0.1
    PROBE_STEPS: int = 4
    PROBE_DIRECTIONS_2D: int = 180
    PROBE_DIRECTIONS_3D: int = 26

    # Grid and space settings
    GRID_SPACING: float = 1e-2
    GRID_HALF_WIDTH: float = 1.0
    FINITE_SPACE_MAX_POINTS: int = 400
    METRIC_TOL: float = 1e-12

    # Criteria settings
    STRICT_SLACK: float = 1e-9
    CRITERIA_GAMMA: float = 0.5
    QUALITATIVE_THRESHOLD: float = 0.05
    BAND_MODE: str = "one_sided"
    RELATIVE_TOL: float = 0.05
    GRID_TOL: float = 1e-3

    # Dual norm / coderivative settings
    L2_DUAL_DIRECTIONS: int = 128
    VGRID_STEPS: int = 3

    # Gfrerer limit-set test settings
    GFRERER_UNIT_SAMPLES: int = 8
    GFRERER_THRESHOLD: float = 0.1
    GFRERER_V_RADIUS: float = 2.0

    # Verify suite settings
    VERIFY_SEED: int = 0
    VERIFY_RANDOM_SPACES: int = 20
    VERIFY_RANDOM_SPACE_MAX_POINTS: int = 50
    VERIFY_EKELAND_INSTANCES: int = 100

    # Output settings
    REPORT_OUTPUT_DIR: str = "reports"
    LOG_DIR: str = "struct_logs"
    LOG_LEVEL: str = "INFO"

    # HTTP settings
    CORS_ORIGINS: List[str] = ["http://localhost:5173", "http://127.0.0.1:5173"]

    class Config:
        env_file = ".env"


settings = Settings()
