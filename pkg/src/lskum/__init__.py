"""Meshfree least-squares kinetic upwind (LSKUM) Euler solver with layout,
kernel-splitting and partitioned-execution benchmarking."""

__version__ = "0.1.0"
