"""Gradient-flow geometry lab for a smooth spiral counterexample.

A smooth cost function whose descent trajectory converges to the origin
while its unit secants wind around forever, together with underflow-safe
integration of the flow and numerical checks of every closed form involved.
"""

__version__ = "0.1.0"
