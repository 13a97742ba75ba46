"""CSV and JSON rendering of experiment results."""

from __future__ import annotations

import csv
import io
import json
import math

CSV_COLUMNS = ["n", "trial", "seed", "omega", "predictor", "within_one", "complete", "millis"]


def records_csv(records, timings: bool = False) -> str:
    """Frozen CSV schema; ``millis`` is 0 unless timings are requested, so output is reproducible."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row(timings))
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def result_json(result, timings: bool = False) -> str:
    rows = [dict(zip(CSV_COLUMNS, r.row(timings))) for r in result.records]
    return to_json({"records": rows, "summary": result.summary})
