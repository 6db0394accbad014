"""curvemul: divisors on low-genus curves, bilinear multiplication
algorithms for finite-field extensions, intersecting Goppa codes, and exact
evaluators for the related numeric bounds."""

from .ff import field, extend, find_irreducible, Fraction

__all__ = ["field", "extend", "find_irreducible", "Fraction"]
__version__ = "0.1.0"
