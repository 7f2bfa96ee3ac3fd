import asyncio
import time
from typing import Any, Dict, List

from fastapi import Depends

from src.app.config.settings import settings
from src.app.usecases.verify_usecases.verify_helper import VerifyHelper
from src.app.utils.logging_util import loggers


class VerifyUseCase:
    def __init__(self, verify_helper: VerifyHelper = Depends(VerifyHelper)):
        self.verify_helper = verify_helper

    async def execute(self, request: Dict[str, Any]) -> Dict[str, Any]:
        """
        Run the property suite.

        Args:
            request: optional ``filter`` (substring of check names), ``seed``,
                ``output_dir`` and ``format``.
        """
        start_time = time.time()
        helper = self.verify_helper
        pattern = request.get("filter") or None
        seed = request.get("seed")
        seed = settings.VERIFY_SEED if seed is None else int(seed)

        names = helper.names(pattern)
        if not names:
            raise ValueError(f"no property check matches filter {pattern!r}")

        checks: List[Dict[str, Any]] = []
        for name in names:
            check_start = time.time()
            results = await asyncio.to_thread(helper.run, name, seed)
            checks.extend(r.to_dict() for r in results)
            loggers["verify"].info(
                f"{name}: {sum(r.passed for r in results)}/{len(results)} passed"
            )
            loggers["time_tracker"].info(
                f"Processing time for check {name}: "
                f"{time.time() - check_start:.2f} seconds"
            )

        summary = helper.summary(checks)
        payload = helper.analyze_helper.report_service.finalize(
            {
                "seed": seed,
                "filter": pattern,
                "checks": checks,
                "summary": summary,
                "passed": summary["failed"] == 0,
            }
        )
        if request.get("output_dir") is not None:
            payload["files"] = helper.analyze_helper.report_service.write(
                f"verify-seed{seed}",
                {"report": payload["report"], "digest": payload["digest"]},
                request.get("format", "json"),
                request["output_dir"],
                section="verify",
            )

        loggers["time_tracker"].info(
            f"Processing time for verify ({len(names)} checks): "
            f"{time.time() - start_time:.2f} seconds"
        )
        return payload
