"""Evaluate, optimize and certify two-setting, two-outcome Bell inequality violations."""

__version__ = "0.1.0"
