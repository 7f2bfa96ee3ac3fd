from pathlib import Path
from typing import Optional

from src.app.config.settings import settings


def create_report_output_directories(base: Optional[str] = None) -> Path:
    """
    Create the report output directory tree if it doesn't exist.

    Layout: <base>/analyze for analysis reports, <base>/verify for suite runs.
    """
    root = Path(base or settings.REPORT_OUTPUT_DIR)
    for directory in (root, root / "analyze", root / "verify"):
        directory.mkdir(parents=True, exist_ok=True)
    return root
