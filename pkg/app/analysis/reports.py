import csv
import io
import json
from typing import Any, Dict, Iterable, List, Optional, Union

from pydantic import BaseModel

from ..core.config import settings
from ..models.schemas import ExperimentReport

CSV_COLUMNS = [
    "name",
    "parameters",
    "trials",
    "estimate",
    "analytic",
    "std_error",
    "pass",
]

Payload = Union[BaseModel, List[BaseModel], Dict[str, Any]]


def _dump(payload: Payload) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json", by_alias=True)
    if isinstance(payload, list):
        return [_dump(item) for item in payload]
    return payload


def to_json(payload: Payload, seed: Optional[int] = None) -> str:
    """Versioned, key-sorted JSON document"""
    document = {"schema": settings.schema_version, "result": _dump(payload)}
    if seed is not None:
        document["seed"] = seed
    return json.dumps(document, indent=2, sort_keys=True)


def parse_report(text: str) -> ExperimentReport:
    document = json.loads(text)
    if document.get("schema") != settings.schema_version:
        raise ValueError(f"Unsupported schema {document.get('schema')!r}")
    return ExperimentReport.model_validate(document["result"])


def reports_to_csv(reports: Iterable[ExperimentReport]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        row = report.model_dump(mode="json", by_alias=True)
        writer.writerow(
            {
                "name": row["name"],
                "parameters": json.dumps(row["parameters"], sort_keys=True),
                "trials": row["trials"],
                "estimate": repr(row["estimate"]),
                "analytic": "" if row["analytic"] is None else repr(row["analytic"]),
                "std_error": repr(row["std_error"]),
                "pass": str(row["pass"]).lower(),
            }
        )
    return buffer.getvalue()


def format_report_text(report: ExperimentReport) -> str:
    analytic = "n/a" if report.analytic is None else f"{report.analytic:.6f}"
    status = "PASS" if report.passed else "FAIL"
    lines = [
        f"{report.name}: {status}",
        f"  estimate  {report.estimate:.6f} +/- {report.std_error:.6f}"
        f" ({report.trials} trials)",
        f"  analytic  {analytic}",
    ]
    lines += [f"  {key} = {value}" for key, value in sorted(report.parameters.items())]
    return "\n".join(lines)
