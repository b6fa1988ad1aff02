"""
CSV and JSON result writers.

Numbers are formatted with a fixed rule so that reruns of the same config
produce byte-identical files. Run metadata (seed, command) is written as
leading ``#`` comment lines.
"""

import csv
import json
import logging
import math
import os
from typing import Dict, Iterable, List, Optional, Sequence

from ..core.errors import OutputError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".12g"


def format_value(value) -> str:
    """Deterministic text for one CSV cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, FLOAT_FORMAT)
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    return value


class ResultWriter:
    """
    Writes result tables into one output directory.

    Args:
        directory: Target directory, created on first write
        json_mirror: Also write ``<name>.json`` next to every CSV
        meta: Key/value pairs written as comment lines into every CSV
    """

    def __init__(self, directory: str, json_mirror: bool = False,
                 meta: Optional[Dict[str, object]] = None):
        self.directory = directory
        self.json_mirror = json_mirror
        self.meta = dict(meta or {})
        self.written: List[str] = []

    def _path(self, name: str, ext: str) -> str:
        return os.path.join(self.directory, f"{name}.{ext}")

    def write_table(self, name: str, columns: Sequence[str], rows: Iterable[dict]) -> str:
        """
        Write rows (dicts keyed by column) as ``<name>.csv``.

        Raises:
            OutputError: If the directory or file cannot be written
        """
        rows = list(rows)
        path = self._path(name, "csv")
        try:
            os.makedirs(self.directory, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as handle:
                for key in sorted(self.meta):
                    handle.write(f"# {key}={format_value(self.meta[key])}\n")
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(columns)
                for row in rows:
                    writer.writerow([format_value(row.get(col)) for col in columns])
            if self.json_mirror:
                payload = {"meta": self.meta, "columns": list(columns),
                           "rows": [{c: _json_safe(r.get(c)) for c in columns} for r in rows]}
                with open(self._path(name, "json"), "w", encoding="utf-8") as handle:
                    json.dump(payload, handle, indent=2, sort_keys=True)
                    handle.write("\n")
        except OSError as exc:
            raise OutputError(f"Cannot write {path}: {exc}")

        logger.info("wrote %d rows to %s", len(rows), path)
        self.written.append(path)
        return path
