"""Numerical toolkit for matrix-product unitaries with finite-group symmetry.

Computes topological labels (chiral index, symmetry-protected indices,
refined indices, cohomology invariants) through independent routes, runs
entanglement-spectrum dynamics, and builds/validates two-dimensional
Floquet parents of one-dimensional edge walks.
"""

__version__ = "0.1.0"
