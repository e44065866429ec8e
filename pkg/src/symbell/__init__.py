"""Symmetric two-body Bell inequalities for many parties.

Modules: :mod:`symbell.core` (types and the strategy-count map),
:mod:`symbell.polytope` (vertices and exact facets),
:mod:`symbell.inequalities` (classical bounds and analytic families),
:mod:`symbell.quantum` (Bell operators, Dicke states, LMG model),
:mod:`symbell.cli` (command-line entry point).
"""
__version__ = "1.0.0"
