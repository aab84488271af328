"""Pytest root marker: keeps the project root importable as `src` and `venvi`."""
