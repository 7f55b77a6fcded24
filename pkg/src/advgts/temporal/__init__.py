"""Temporal formulas over graph constraints and their model checkers."""
