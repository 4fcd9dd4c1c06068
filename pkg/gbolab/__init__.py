"""Numerical lab for the dispersion-generalized Benjamin-Ono family"""

__version__ = '0.1.0'
