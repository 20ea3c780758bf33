"""Exact Bayesian network structure learning over bounded-treewidth super-structures."""

__version__ = "0.1.0"
