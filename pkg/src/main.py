import time

import uvicorn
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware

from src.app.config.settings import settings
from src.app.middlewares.path_validation_middleware import (
    PathValidationMiddleware,
)
from src.app.routes import analyze_route, catalog_route, verify_route
from src.app.utils.logging_util import loggers

app = FastAPI(
    title="Slope Lab",
    description="Slopes, error bounds and metric subregularity on sampled spaces.",
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    start_time = time.time()
    response = await call_next(request)

    loggers["requests"].info(
        f"{request.method} {request.url.path} -> {response.status_code}",
        extra={
            "client": request.client.host if request.client else None,
            "elapsed_seconds": round(time.time() - start_time, 4),
        },
    )
    return response


if settings.CORS_ORIGINS:
    app.add_middleware(
        CORSMiddleware,
        allow_origins=settings.CORS_ORIGINS,
        allow_credentials=True,
        allow_methods=["GET", "POST", "OPTIONS"],
        allow_headers=["*"],
    )

app.add_middleware(PathValidationMiddleware)

app.include_router(analyze_route.router, prefix="/api/v1", tags=["Analyze"])
app.include_router(verify_route.router, prefix="/api/v1", tags=["Verify"])
app.include_router(catalog_route.router, prefix="/api/v1", tags=["Catalog"])


@app.get("/")
async def root():
    return {"message": "Slope Lab: slopes, error bounds and metric subregularity"}


if __name__ == "__main__":
    uvicorn.run("src.main:app", host="0.0.0.0", port=8000, reload=True)
