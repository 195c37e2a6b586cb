"""Discretized k-skeleton maximal operators and their delta-scaling."""

__version__ = "0.1.0"
