from typing import Any, Dict

from fastapi import Depends

from src.app.models.schemas.analysis_spec_schema import (
    AnalysisSpec,
    AnalyzeFileRequest,
)
from src.app.usecases.analyze_usecases.analyze_usecase import AnalyzeUseCase


class AnalyzeController:
    def __init__(self, analyze_usecase: AnalyzeUseCase = Depends(AnalyzeUseCase)):
        self.analyze_usecase = analyze_usecase

    async def analyze(self, spec: AnalysisSpec) -> Dict[str, Any]:
        return await self.analyze_usecase.execute({"spec": spec})

    async def analyze_file(self, request: AnalyzeFileRequest) -> Dict[str, Any]:
        schedule = request.schedule.model_dump() if request.schedule else None
        result = await self.analyze_usecase.execute(
            {
                "spec_path": request.spec_path,
                "at": request.at,
                "schedule": schedule,
                "tol": request.tol,
                "gamma": request.gamma,
            }
        )

        return result
