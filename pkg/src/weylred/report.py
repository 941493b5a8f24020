"""Check records and deterministic report emission (JSON always, CSV opt-in)."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional


@dataclass
class CheckRecord:
    name: str
    params: dict
    tolerance: Optional[float]
    passed: bool
    residual: Optional[float] = None
    exact: Optional[bool] = None
    wall_time_s: float = 0.0


@dataclass
class Report:
    suite: str
    records: List[CheckRecord] = field(default_factory=list)

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    @property
    def verdict(self) -> bool:
        return all(r.passed for r in self.records)


def report_to_dict(report: Report) -> dict:
    """JSON payload; deterministic (timings are kept out of it)."""
    return {
        "suite": report.suite,
        "verdict": "pass" if report.verdict else "fail",
        "records": [
            {
                "name": r.name,
                "params": r.params,
                "residual": r.residual,
                "exact": r.exact,
                "tolerance": r.tolerance,
                "pass": r.passed,
            }
            for r in report.records
        ],
    }


def emit_report(report: Report, out_dir, formats=("json",)) -> List[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    json_path = out / f"{report.suite}.json"
    json_path.write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    )
    written.append(json_path)
    if "csv" in formats:
        csv_path = out / f"{report.suite}.csv"
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["name", "residual", "exact", "tolerance", "pass", "wall_time_s"]
            )
            for r in report.records:
                writer.writerow(
                    [
                        r.name,
                        "" if r.residual is None else repr(r.residual),
                        "" if r.exact is None else r.exact,
                        "" if r.tolerance is None else repr(r.tolerance),
                        r.passed,
                        f"{r.wall_time_s:.3f}",
                    ]
                )
        written.append(csv_path)
    return written
