"""Symbolic engine for the gauge theory of volume-preserving diffeomorphisms.

Exact tensor and graded algebras, momentum-space Feynman rules, one-loop
divergence tables, cutoff inner-space integrals, heat-kernel assembly,
beta functions and BRST checks, exposed through a FastAPI service and a
thin CLI client.
"""

__version__ = "0.1.0"
