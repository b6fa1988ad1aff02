"""
Input validation utilities for the command line.

Covers value lists and ranges typed on the command line, worker counts,
seeds and file paths.
"""

import math
import os
from typing import List, Optional, Tuple

import numpy as np


class InputValidator:
    """Validates and parses command-line inputs."""

    @staticmethod
    def parse_values(text: str) -> Tuple[Optional[List[float]], str]:
        """
        Parse a list of reals.

        Accepts a comma list ``"1,2.5,4"``, a linear range ``"lo:hi:n"`` or a
        logarithmic range ``"lo:hi:n:log"``. An empty string is an empty list.

        Args:
            text: Text to parse

        Returns:
            tuple: (values or None, error_message)
        """
        if not isinstance(text, str):
            return None, "Value list must be a string"

        text = text.strip()
        if not text:
            return [], ""

        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4):
                return None, "Range must look like lo:hi:n or lo:hi:n:log"
            try:
                lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            except ValueError:
                return None, f"Range {text!r} has non-numeric parts"
            if n < 0:
                return None, "Range resolution must be nonnegative"
            if len(parts) == 4:
                if parts[3] != "log":
                    return None, f"Unknown range spacing: {parts[3]}"
                if lo <= 0 or hi <= 0:
                    return None, "Logarithmic ranges need positive bounds"
                return [float(x) for x in np.geomspace(lo, hi, n)], ""
            return [float(x) for x in np.linspace(lo, hi, n)], ""

        values = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                value = float(item)
            except ValueError:
                return None, f"Not a number: {item!r}"
            if not math.isfinite(value):
                return None, f"Not a finite number: {item!r}"
            values.append(value)
        return values, ""

    @staticmethod
    def parse_int_values(text: str) -> Tuple[Optional[List[int]], str]:
        """
        Parse a list of integers: ``"4,5,6"`` or an inclusive range ``"4..10"``.

        Returns:
            tuple: (values or None, error_message)
        """
        if not isinstance(text, str):
            return None, "Integer list must be a string"

        text = text.strip()
        if ".." in text:
            lo, _, hi = text.partition("..")
            try:
                return list(range(int(lo), int(hi) + 1)), ""
            except ValueError:
                return None, f"Range {text!r} must have integer bounds"

        try:
            return [int(item) for item in text.split(",") if item.strip()], ""
        except ValueError:
            return None, f"Integer list {text!r} has non-integer items"

    @staticmethod
    def validate_workers(workers: int) -> Tuple[bool, str]:
        """
        Validate a worker count.

        Returns:
            tuple: (is_valid, error_message)
        """
        if isinstance(workers, bool) or not isinstance(workers, int):
            return False, "Worker count must be an integer"

        if workers < 1:
            return False, "Worker count must be at least 1"

        if workers > 256:
            return False, "Worker count cannot exceed 256"

        return True, ""

    @staticmethod
    def validate_seed(seed: int) -> Tuple[bool, str]:
        """
        Validate an unsigned 64-bit seed.

        Returns:
            tuple: (is_valid, error_message)
        """
        if isinstance(seed, bool) or not isinstance(seed, int):
            return False, "Seed must be an integer"

        if not 0 <= seed < 2 ** 64:
            return False, "Seed must fit in an unsigned 64-bit integer"

        return True, ""

    @staticmethod
    def validate_config_path(path: str) -> Tuple[bool, str]:
        """
        Validate the path of a JSON run config.

        Returns:
            tuple: (is_valid, error_message)
        """
        if not isinstance(path, str) or not path:
            return False, "Config path cannot be empty"

        if not path.endswith(".json"):
            return False, "Config file must have a .json extension"

        if not os.path.isfile(path):
            return False, f"Config file not found: {path}"

        return True, ""

    @staticmethod
    def validate_output_dir(path: str) -> Tuple[bool, str]:
        """
        Validate an output directory; it may not exist yet.

        Returns:
            tuple: (is_valid, error_message)
        """
        if not isinstance(path, str) or not path:
            return False, "Output directory cannot be empty"

        if os.path.exists(path) and not os.path.isdir(path):
            return False, f"Output path exists and is not a directory: {path}"

        return True, ""
