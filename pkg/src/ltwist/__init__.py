"""ltwist: verification toolkit for additive twists of degree-2 L-functions.

Special functions, Dirichlet-character trig expansions, Maass-form data,
Dirichlet-series twists, gamma-factor functional equations, and certified
simple-zero scanning for completed L-functions, with a CLI front end.
"""

from .precision import ComplexParam, PrecisionContext, default_context

__version__ = "0.1.0"

__all__ = ["ComplexParam", "PrecisionContext", "default_context", "__version__"]
