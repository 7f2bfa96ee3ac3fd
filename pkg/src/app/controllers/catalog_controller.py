from typing import Optional

from fastapi import Depends

from src.app.usecases.catalog_usecases.catalog_usecase import CatalogUseCase


class CatalogController:
    def __init__(self, catalog_usecase: CatalogUseCase = Depends(CatalogUseCase)):
        self.catalog_usecase = catalog_usecase

    async def catalog(self, pattern: Optional[str] = None):
        return await self.catalog_usecase.execute(pattern)
