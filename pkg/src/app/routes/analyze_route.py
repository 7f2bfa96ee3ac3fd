import time

from fastapi import APIRouter, Depends, status
from fastapi.responses import JSONResponse

from src.app.controllers.analyze_controller import AnalyzeController
from src.app.models.schemas.analysis_spec_schema import (
    AnalysisSpec,
    AnalyzeFileRequest,
)
from src.app.utils.error_handler import handle_exceptions
from src.app.utils.logging_util import loggers

router = APIRouter()


def _envelope(data, detail: str, start_time: float) -> JSONResponse:
    time_taken = time.time() - start_time
    loggers["requests"].info(f"{detail} Time taken: {time_taken:.4f} seconds")
    return JSONResponse(
        content={
            "data": data,
            "statuscode": 200,
            "detail": detail,
            "error": "",
            "time_taken_seconds": round(time_taken, 4),
        },
        status_code=status.HTTP_200_OK,
    )


@router.post("/analyze")
@handle_exceptions
async def analyze_route(
    spec: AnalysisSpec,
    analyze_controller: AnalyzeController = Depends(AnalyzeController),
):
    start_time = time.time()
    loggers["requests"].info(f"Analyze request for {spec.kind} {spec.name!r}")

    response_data = await analyze_controller.analyze(spec)

    return _envelope(response_data, "Analysis completed successfully!", start_time)


@router.post("/analyze-file")
@handle_exceptions
async def analyze_file_route(
    request: AnalyzeFileRequest,
    analyze_controller: AnalyzeController = Depends(AnalyzeController),
):
    start_time = time.time()
    loggers["requests"].info(f"Analyze request for {request.spec_path!r}")

    response_data = await analyze_controller.analyze_file(request)

    return _envelope(response_data, "Analysis completed successfully!", start_time)
