"""Concordance invariants, independent oracles and property checks."""
