"""locality-kit: finite partial groups, localities and fusion systems, with
brute-force verification suites over a catalog of small instances."""

__version__ = "0.1.0"
