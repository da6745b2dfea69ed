"""Figure rendering for volcano-kit outputs; consumes only CSV/JSON files."""

__version__ = "0.1.0"
