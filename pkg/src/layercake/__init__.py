"""Layer-cake rearrangements, weighted Lorentz functionals and their checks."""
__version__ = "0.1.0"
