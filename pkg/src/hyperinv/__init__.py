"""Hyperbolic tensor network toolkit.

Builds {7,3} and {5,4} bulk tilings, parameterized tensor families on
them, checks the defining isometry constraints, and computes scaling
spectra, reduced density matrices and correlators through causal-cone
superoperators.
"""

__version__ = "0.1.0"
