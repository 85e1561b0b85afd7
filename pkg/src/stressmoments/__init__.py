"""Exact moments of Lorentzian-smeared quadratic field operators and their moment problem."""

__version__ = "0.1.0"
