"""Verification of graph transformation systems under adverse conditions."""
