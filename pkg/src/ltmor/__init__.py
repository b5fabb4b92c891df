"""Laplace-domain reduced basis method for the scalar wave equation with a Ricker source."""

__version__ = "0.1.0"
