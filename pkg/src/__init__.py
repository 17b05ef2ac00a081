"""
Euclidean t-spanner toolkit

Dilation measurement, classic spanner constructions, exact minimum-weight
spanner search at desk scale, and generation and verification of the
PARTITION -> low-weight spanner hardness instances.
"""

__version__ = "1.0.0"
__author__ = "Spanner Toolkit Team"
