"""Critical exponents of discrete sets in the unit ball and the dimensions of their limit sets."""

__version__ = "0.1.0"
