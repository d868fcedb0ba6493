"""
Command facades

Each tool method returns a JSON-friendly dict with a "success" flag.
"""

from .experiment import ExperimentTools

__all__ = ["ExperimentTools"]
