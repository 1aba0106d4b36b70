"""Verification toolkit for the accelerated Collatz map in enumerated coordinates.

The odd positive integers are enumerated by (n+1)/2; all structural claims
(string partition, window recurrence laws, reverse tree growth, 3n+p cycles)
are checked empirically over explicit ranges.
"""

__version__ = "0.1.0"
