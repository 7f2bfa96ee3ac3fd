import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.app.utils.generate_output_dirs import create_report_output_directories
from src.app.utils.hash_calculator import report_digest
from src.app.utils.logging_util import loggers

FORMATS = ("json", "table", "csv")
ROW_FIELDS = ("quantity", "reported", "monotone", "saturated", "holds", "flags")


class ReportService:
    """Digest, flatten and write analysis / verify reports."""

    @staticmethod
    def finalize(body: Dict[str, Any]) -> Dict[str, Any]:
        return {"report": body, "digest": report_digest(body)}

    # ------------------------------------------------------------------
    # flattening

    def rows(self, payload: Dict[str, Any]) -> List[Dict[str, Any]]:
        """One row per limit estimate, point estimate, condition or check."""
        out: List[Dict[str, Any]] = []
        self._walk(payload.get("report", payload), "", out)
        return out

    def _walk(self, node: Any, path: str, out: List[Dict[str, Any]]) -> None:
        if isinstance(node, dict):
            if "per_radius" in node and "reported" in node:
                out.append(
                    {
                        "quantity": path,
                        "reported": node["reported"],
                        "monotone": node["monotone"],
                        "saturated": node["saturated"],
                        "holds": "",
                        "flags": ";".join(node.get("flags", [])),
                    }
                )
                return
            if "holds" in node and "label" in node:
                out.append(
                    {
                        "quantity": f"{path} ({node['description']})",
                        "reported": node["value"],
                        "monotone": "",
                        "saturated": "",
                        "holds": node["holds"],
                        "flags": node.get("note", ""),
                    }
                )
                return
            if "passed" in node and "name" in node:
                out.append(
                    {
                        "quantity": node["name"],
                        "reported": node.get("detail", ""),
                        "monotone": "",
                        "saturated": "",
                        "holds": node["passed"],
                        "flags": "",
                    }
                )
                return
            if set(node) == {"value", "flags"}:
                out.append(
                    {
                        "quantity": path,
                        "reported": node["value"],
                        "monotone": "",
                        "saturated": "",
                        "holds": "",
                        "flags": ";".join(node["flags"]),
                    }
                )
                return
            for key in sorted(node):
                self._walk(node[key], f"{path}.{key}" if path else key, out)
        elif isinstance(node, list):
            for i, item in enumerate(node):
                if isinstance(item, (dict, list)):
                    self._walk(item, f"{path}[{i}]", out)

    # ------------------------------------------------------------------
    # rendering

    def render(self, payload: Dict[str, Any], fmt: str = "json") -> str:
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
        if fmt == "json":
            return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
        rows = self.rows(payload)
        if fmt == "csv":
            buffer = io.StringIO()
            writer = csv.DictWriter(buffer, fieldnames=ROW_FIELDS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
            return buffer.getvalue()
        return self._table(rows, payload.get("digest"))

    @staticmethod
    def _table(rows: List[Dict[str, Any]], digest: Optional[str]) -> str:
        cells = [[str(row[f]) for f in ROW_FIELDS] for row in rows]
        widths = [
            max([len(f)] + [len(c[i]) for c in cells])
            for i, f in enumerate(ROW_FIELDS)
        ]
        lines = [
            "  ".join(f.ljust(w) for f, w in zip(ROW_FIELDS, widths)),
            "  ".join("-" * w for w in widths),
        ]
        lines += ["  ".join(c.ljust(w) for c, w in zip(cell, widths)) for cell in cells]
        if digest:
            lines.append(f"digest: {digest}")
        return "\n".join(lines) + "\n"

    # ------------------------------------------------------------------

    def write(
        self,
        name: str,
        payload: Dict[str, Any],
        fmt: str = "json",
        output_dir: Optional[str] = None,
        section: str = "analyze",
    ) -> List[str]:
        """Write ``<name>.json`` plus ``<name>.txt`` (table) or ``<name>.csv``."""
        root = create_report_output_directories(output_dir) / section
        written = [root / f"{name}.json"]
        written[0].write_text(self.render(payload, "json") + "\n", encoding="utf-8")
        if fmt in ("table", "csv"):
            extra = root / f"{name}.{'txt' if fmt == 'table' else 'csv'}"
            extra.write_text(self.render(payload, fmt), encoding="utf-8")
            written.append(extra)
        loggers["main"].info(f"Wrote report files {[str(p) for p in written]}")
        return [str(Path(p)) for p in written]
