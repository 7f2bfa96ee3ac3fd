from functools import wraps
from typing import List, Optional

from fastapi import HTTPException, status
from fastapi.responses import JSONResponse


class NotEvaluableError(ValueError):
    """Raised when a quantity needs an oracle the fixture does not provide."""


class ImplicationViolationError(AssertionError):
    """Raised when a criteria audit finds a true antecedent with a false consequent."""

    def __init__(self, criteria: str, implication: str, detail: str = ""):
        self.criteria = criteria
        self.implication = implication
        message = f"{criteria}: implication {implication} violated"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class SpecSchemaError(ValueError):
    """Raised when an analysis spec does not match the documented schema."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        self.diagnostics = diagnostics or []
        full = message
        if self.diagnostics:
            full = message + "\n" + "\n".join(self.diagnostics)
        super().__init__(full)


EXIT_OK = 0
EXIT_EXPECTATION_MISMATCH = 1
EXIT_SCHEMA_ERROR = 2
EXIT_PROPERTY_FAILURE = 3


def exit_code_for(exc: BaseException) -> int:
    """Map an exception raised by a command to its process exit code."""
    if isinstance(exc, ImplicationViolationError):
        return EXIT_PROPERTY_FAILURE
    if isinstance(exc, ValueError):
        return EXIT_SCHEMA_ERROR
    return EXIT_PROPERTY_FAILURE


def handle_exceptions(func):
    """A decorator to catch exceptions and return a consistent JSON error response."""

    @wraps(func)
    async def wrapper(*args, **kwargs):
        try:
            result = await func(*args, **kwargs)
            return result
        except Exception as e:
            # If it's already a response, don't wrap it again
            if isinstance(e, HTTPException):
                raise e

            if isinstance(e, SpecSchemaError):
                return JSONResponse(
                    status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                    content={
                        "data": {"diagnostics": e.diagnostics},
                        "statuscode": 422,
                        "detail": "Analysis spec failed validation.",
                        "error": str(e),
                    },
                )

            if isinstance(e, NotEvaluableError):
                return JSONResponse(
                    status_code=status.HTTP_400_BAD_REQUEST,
                    content={
                        "data": {},
                        "statuscode": 400,
                        "detail": "Quantity is not evaluable for this fixture.",
                        "error": str(e),
                    },
                )

            return JSONResponse(
                status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
                content={
                    "data": {},
                    "statuscode": 500,
                    "detail": "An internal server error occurred.",
                    "error": str(e),
                },
            )

    return wrapper
