"""Finite higher-order Fourier analysis on finite abelian groups."""
__version__ = "0.1.0"
