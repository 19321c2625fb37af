"""Ensures the tests directory is importable (for the shared oracles)."""
