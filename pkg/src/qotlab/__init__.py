"""Exact desk-scale simulation of bit-commitment-based quantum oblivious transfer."""

__version__ = "0.1.0"
