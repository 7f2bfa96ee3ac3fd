from fastapi import Depends

from src.app.models.schemas.analysis_spec_schema import VerifyRequest
from src.app.usecases.verify_usecases.verify_usecase import VerifyUseCase


class VerifyController:
    def __init__(self, verify_usecase: VerifyUseCase = Depends(VerifyUseCase)):
        self.verify_usecase = verify_usecase

    async def verify(self, request: VerifyRequest):
        result = await self.verify_usecase.execute(
            {"filter": request.filter, "seed": request.seed}
        )

        return result
