"""Utility functions and configuration loaders."""
