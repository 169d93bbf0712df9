"""Exact, enumerated and simulated CHSH/CH tests on qubit pairs selected from W-state trios."""

__version__ = "0.1.0"
