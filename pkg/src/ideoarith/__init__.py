"""Exact arithmetic of diophantine approximation groups at desk scale."""

__version__ = "0.1.0"
SCHEMA = "ideoarith/1"
