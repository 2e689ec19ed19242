"""Maxwell eigenvalues with vector Lagrange elements on Worsey-Farin splits."""

__version__ = "0.1.0"
