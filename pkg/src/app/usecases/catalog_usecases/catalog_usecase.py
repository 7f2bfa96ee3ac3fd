import time
from typing import Any, Dict, Optional

from fastapi import Depends

from src.app.usecases.analyze_usecases.analyze_helper import AnalyzeHelper
from src.app.utils.logging_util import loggers


class CatalogUseCase:
    def __init__(self, analyze_helper: AnalyzeHelper = Depends(AnalyzeHelper)):
        self.catalog_service = analyze_helper.catalog_service
        self.report_service = analyze_helper.report_service

    async def execute(self, pattern: Optional[str] = None) -> Dict[str, Any]:
        start_time = time.time()
        fixtures = self.catalog_service.listing(pattern)
        payload = self.report_service.finalize(
            {"filter": pattern, "count": len(fixtures), "fixtures": fixtures}
        )
        loggers["time_tracker"].info(
            f"Processing time for catalog listing: "
            f"{time.time() - start_time:.2f} seconds"
        )
        return payload
