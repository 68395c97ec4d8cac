"""Test mocks for the verification task."""
