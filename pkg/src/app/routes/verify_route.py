import time

from fastapi import APIRouter, Depends, status
from fastapi.responses import JSONResponse

from src.app.controllers.verify_controller import VerifyController
from src.app.models.schemas.analysis_spec_schema import VerifyRequest
from src.app.utils.error_handler import handle_exceptions
from src.app.utils.logging_util import loggers

router = APIRouter()


@router.post("/verify")
@handle_exceptions
async def verify_route(
    request: VerifyRequest,
    verify_controller: VerifyController = Depends(VerifyController),
):
    start_time = time.time()
    loggers["requests"].info(
        f"Verify request, filter={request.filter!r}, seed={request.seed}"
    )

    response_data = await verify_controller.verify(request)

    summary = response_data["report"]["summary"]
    status_message = (
        f"Property suite finished: {summary['passed']}/{summary['total']} passed"
    )
    time_taken = time.time() - start_time
    loggers["requests"].info(f"{status_message}. Time taken: {time_taken:.4f} seconds")

    return JSONResponse(
        content={
            "data": response_data,
            "statuscode": 200,
            "detail": status_message,
            "error": "",
            "time_taken_seconds": round(time_taken, 4),
        },
        status_code=status.HTTP_200_OK,
    )
