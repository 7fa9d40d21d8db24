"""Simulation and design toolkit for metamaterial backscatter sensing tags.

The package models split-ring-resonator (SRR) tags through an equivalent
circuit, searches tag geometries for a good sensing/range trade-off,
simulates the backscatter radio link and recovers the sensed humidity from
swept-frequency power measurements.
"""

__version__ = "0.1.0"
