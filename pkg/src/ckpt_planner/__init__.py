"""Checkpoint period planning for time and energy under failures."""

__version__ = "0.1.0"
