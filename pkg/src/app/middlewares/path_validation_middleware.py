import json
import os

from fastapi import Request, status
from fastapi.responses import JSONResponse
from starlette.middleware.base import BaseHTTPMiddleware

from src.app.services.spec_loader_service import CATALOG_PREFIX
from src.app.utils.logging_util import loggers


class PathValidationMiddleware(BaseHTTPMiddleware):
    """
    Rejects spec paths that escape the working directory before the
    analyze-file endpoint opens them.
    """

    DANGEROUS_PATTERNS = ["..", "~", "\x00"]
    VALIDATED_ROUTES = ("analyze-file",)

    async def dispatch(self, request: Request, call_next):
        if request.method == "POST" and any(
            route in request.url.path for route in self.VALIDATED_ROUTES
        ):
            body = await request.body()
            try:
                data = json.loads(body) if body else None
            except json.JSONDecodeError:
                data = None  # the endpoint reports malformed JSON itself
            if isinstance(data, dict) and isinstance(data.get("spec_path"), str):
                problem = self._path_problem(data["spec_path"])
                if problem:
                    loggers["requests"].warning(
                        f"Rejected spec_path {data['spec_path']!r}: {problem}"
                    )
                    return JSONResponse(
                        status_code=status.HTTP_400_BAD_REQUEST,
                        content={
                            "data": {},
                            "statuscode": 400,
                            "detail": "Invalid spec path.",
                            "error": problem,
                        },
                    )

            async def receive():
                return {"type": "http.request", "body": body}

            request._receive = receive

        return await call_next(request)

    def _path_problem(self, path: str) -> str:
        """
        Args:
            path: a spec file path or ``catalog:<name>`` reference.

        Returns:
            A description of what is wrong, or "" when the path is acceptable.
        """
        if path.startswith(CATALOG_PREFIX):
            return ""
        for pattern in self.DANGEROUS_PATTERNS:
            if pattern in path:
                return f"path contains the disallowed pattern {pattern!r}"
        if os.path.isabs(path):
            normalized = os.path.normpath(path)
            root = os.path.abspath(os.getcwd())
            if os.path.commonpath([normalized, root]) != root:
                return "absolute paths must stay inside the working directory"
        return ""
