"""
Shared helpers for the test modules.
"""

import csv
from typing import Dict, List


def read_table(path: str) -> List[Dict[str, str]]:
    """Read a CSV written by ResultWriter, skipping comment lines."""
    with open(path, newline="", encoding="utf-8") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))
