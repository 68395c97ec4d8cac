"""Scorers for verification check outcomes."""
