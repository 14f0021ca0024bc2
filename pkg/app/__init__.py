"""
Tropical EP Analyzer Package

This package classifies exceptional points of parametric non-Hermitian
Hamiltonians: it computes characteristic polynomials exactly, tropicalizes
them, builds Newton polygons and amoebas, and cross-checks the predicted EP
order with numeric eigenvalue splitting and holonomy loops.
"""

__version__ = "0.1.0"
