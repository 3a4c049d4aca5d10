"""nodalab: caloric polynomials, frequency functions and nodal-set geometry
for parabolic equations."""

__version__ = "0.1.0"
