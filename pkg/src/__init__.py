"""
Symmetry Breaking Suite - Source Package
"""

__version__ = "1.0.0"
__description__ = "Radial and cylindrical ground states of -Lap u + A|x|^-alpha u = f(u)"
