"""Scenario-based falsification of driving controllers in a 2D simulator."""

__version__ = "0.1.0"
