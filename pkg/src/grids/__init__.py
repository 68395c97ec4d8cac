"""Grid diagrams, their constructions and grid moves."""
