"""Interpolatory and H2-optimal model reduction for heat-type systems with
function-valued inputs and outputs."""

__version__ = "0.1.0"
