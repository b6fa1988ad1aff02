#!/usr/bin/env python3
"""
Symmetry Breaking Suite - Main Entry Point

Exponent taxonomy, radial and cylindrical ground-state levels and
symmetry-breaking sweeps for -Lap u + A|x|^-alpha u = f(u).
"""

import os
import sys

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from src.cli import run


def main():
    """Main entry point for the application."""
    print("=" * 60)
    print("SYMMETRY BREAKING SUITE")
    print("=" * 60)

    try:
        code = run(sys.argv[1:])
    except KeyboardInterrupt:
        print("\nInterrupted by user")
        code = 130
    sys.exit(code)


if __name__ == "__main__":
    main()
