import asyncio
import time
from typing import Any, Dict

from fastapi import Depends

from src.app.usecases.analyze_usecases.analyze_helper import AnalyzeHelper, report_name
from src.app.utils.logging_util import loggers


class AnalyzeUseCase:
    def __init__(self, analyze_helper: AnalyzeHelper = Depends(AnalyzeHelper)):
        self.analyze_helper = analyze_helper

    async def execute(self, request: Dict[str, Any]) -> Dict[str, Any]:
        """
        Load a spec, run the pipeline for its kind and return the digested report.

        Args:
            request: ``spec`` (dict or AnalysisSpec) or ``spec_path``, plus the
                optional overrides ``at``, ``schedule``, ``tol``, ``gamma`` and
                ``output_dir`` / ``format`` for writing report files.
        """
        start_time = time.time()
        helper = self.analyze_helper
        loaded = helper.load(request)
        schedule = helper.analysis_schedule(loaded)

        slopes = await asyncio.to_thread(helper.slope_report, loaded, schedule)

        criteria_task = asyncio.create_task(
            asyncio.to_thread(helper.criteria, loaded, schedule),
            name="criteria",
        )
        qualitative_task = asyncio.create_task(
            asyncio.to_thread(helper.qualitative, loaded, schedule),
            name="qualitative",
        )
        brute_force_task = asyncio.create_task(
            asyncio.to_thread(helper.brute_force, loaded, schedule),
            name="brute_force",
        )
        criteria, qualitative, brute_force = await asyncio.gather(
            criteria_task, qualitative_task, brute_force_task
        )

        body: Dict[str, Any] = {
            "spec": {
                "name": loaded.name,
                "kind": loaded.kind,
                "source": loaded.source,
            },
            "schedule": schedule.to_dict(),
            "tol": loaded.tol,
            "gamma": loaded.gamma,
            "slopes": slopes,
            "criteria": criteria,
            "qualitative": qualitative,
            "brute_force": brute_force,
        }
        body["truth_checks"] = [
            c.to_dict() for c in helper.truth_checks(loaded, body)
        ]
        body["verdict"] = helper.verdict(body)
        payload = helper.report_service.finalize(body)

        if request.get("output_dir") is not None:
            payload["files"] = helper.report_service.write(
                report_name(loaded.name),
                {"report": payload["report"], "digest": payload["digest"]},
                request.get("format", "json"),
                request["output_dir"],
                section="analyze",
            )

        loggers["time_tracker"].info(
            f"Processing time for analyze {loaded.name!r}: "
            f"{time.time() - start_time:.2f} seconds"
        )
        return payload
