import csv
import json
import logging
import platform
import socket
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any

import numpy as np
from jinja2 import Environment, FileSystemLoader

from weakjoint.schemas.report import ExperimentReport, Table

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent.parent / "templates"

VERSIONED_PACKAGES = ("weakjoint", "numpy", "scipy", "sympy", "pydantic")


def versions() -> dict[str, str]:
    """Installed versions of the packages whose numerics end up in a report."""
    found = {"python": platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            found[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            found[name] = "unknown"
    return found


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, complex numbers, enums and tuples into JSON-safe values.

    Complex numbers become [re, im] pairs, the same encoding operator spec files use.
    Non-finite floats become strings so the output stays strict JSON.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(float(value.real)), to_jsonable(float(value.imag))]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "value") and isinstance(value.value, str):
        return value.value
    return value


def _csv_name(report: ExperimentReport, table: Table, prefixed: bool) -> str:
    return f"{report.experiment}_{table.name}.csv" if prefixed else f"{table.name}.csv"


def _write_csv(path: Path, table: Table) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def render_summary(reports: list[ExperimentReport]) -> str:
    env = Environment(
        loader=FileSystemLoader(str(TEMPLATE_DIR)),
        autoescape=False,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    template = env.get_template("summary.md.j2")
    return template.render(reports=[to_jsonable(r.model_dump()) for r in reports])


def emit_report(reports: list[ExperimentReport], out_dir: str | Path) -> Path:
    """Write report.json, metadata.json, one CSV per table and summary.md into `out_dir`.

    report.json depends only on the reports, so identical runs give identical
    bytes; the timestamp and host go to metadata.json.

    Raises:
        OSError: If the directory or a file cannot be written; the message names the path
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(e.errno, f"cannot create output directory: {e.strerror}", str(out_dir)) from e

    payload = {"results": [to_jsonable(r.model_dump()) for r in reports]}
    meta = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "host": socket.gethostname(),
        "platform": platform.platform(),
        "experiments": [r.experiment for r in reports],
    }
    prefixed = len(reports) > 1
    written = []
    path = out_dir / "report.json"
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
        path = out_dir / "metadata.json"
        path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
        for report in reports:
            for table in report.tables:
                path = out_dir / _csv_name(report, table, prefixed)
                _write_csv(path, table)
                written.append(path)
        path = out_dir / "summary.md"
        path.write_text(render_summary(reports), encoding="utf-8")
        written.append(path)
    except OSError as e:
        raise OSError(e.errno, f"cannot write report file: {e.strerror}", str(path)) from e

    logger.info("Wrote %d report files to %s", len(written), out_dir)
    return out_dir
