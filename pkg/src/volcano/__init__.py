"""Phase oscillators with low-rank binary random couplings: simulation and analysis."""

__version__ = "0.1.0"
