"""SimReport assembly and JSON/CSV serialisation.

JSON report layout::

    {
      "experiment": "<name>",
      "config_version": 1,
      "generated_at": "<ISO-8601 UTC>",   # excluded by comparable()
      "seed": <int>,
      "config": {...resolved configuration...},
      "results": {...experiment-specific...},
      "performance": {...perfmodel.performance_summary()...},
      "passed": true | false | null
    }
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
from typing import Iterable, Optional, Sequence

from .config import plain

VOLATILE_KEYS = ("generated_at",)


def make_report(experiment: str, cfg: dict, results: dict, performance: Optional[dict] = None,
                passed: Optional[bool] = None) -> dict:
    return {
        "experiment": experiment,
        "config_version": cfg["config_version"],
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "seed": cfg["seed"],
        "config": plain(cfg),
        "results": plain(results),
        "performance": plain(performance) if performance is not None else None,
        "passed": passed,
    }


def comparable(report: dict) -> dict:
    """Report with volatile fields removed, for reproducibility checks."""
    return {k: v for k, v in report.items() if k not in VOLATILE_KEYS}


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
