"""Offload-aware deployment toolchain for heterogeneous CPU/GPU/FPGA clouds.

The package finds offloadable regions in C-like application sources by
token-level similarity against a pattern database, emits OpenCL-style
kernel sources for the matched regions, plans device-appropriate
placement on an inventory of cloud servers, and drives a simulated IaaS
controller through the provision / report / approve-or-reject lifecycle.
"""

__version__ = "0.1.0"
