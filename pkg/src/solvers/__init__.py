"""Solvers that run verification checks inside inspect-ai tasks."""
