import time
from typing import Optional

from fastapi import APIRouter, Depends, status
from fastapi.responses import JSONResponse

from src.app.controllers.catalog_controller import CatalogController
from src.app.utils.error_handler import handle_exceptions
from src.app.utils.logging_util import loggers

router = APIRouter()


@router.get("/catalog")
@handle_exceptions
async def catalog_route(
    pattern: Optional[str] = None,
    catalog_controller: CatalogController = Depends(CatalogController),
):
    start_time = time.time()

    response_data = await catalog_controller.catalog(pattern)

    time_taken = time.time() - start_time
    loggers["requests"].info(
        f"Catalog listed {response_data['report']['count']} fixtures in "
        f"{time_taken:.4f} seconds"
    )

    return JSONResponse(
        content={
            "data": response_data,
            "statuscode": 200,
            "detail": "Catalog listed successfully!",
            "error": "",
            "time_taken_seconds": round(time_taken, 4),
        },
        status_code=status.HTTP_200_OK,
    )
