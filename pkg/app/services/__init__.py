"""
Services package for the Tropical EP Analyzer.

This package contains the floating-point verification layer and the
readers/writers for input files and result artifacts.
"""

__all__ = [
    "numerics",
    "export"
]
