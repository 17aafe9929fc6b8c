"""Sigma and wp functions on cyclotomic elliptic and genus-2 hyperelliptic
curves, plus a harness that verifies their multi-term addition formulae."""

__version__ = "0.1.0"
