"""
Tools package for the Tropical EP Analyzer.

This package contains the exact algebra: Gaussian-rational polynomials,
characteristic polynomials, tropicalization and Newton polygons/amoebas.
"""

__all__ = [
    "poly",
    "charpoly",
    "tropical",
    "newton_amoeba"
]
