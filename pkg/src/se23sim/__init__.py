"""SE_2(3) numerics and spacecraft maneuver-tracking simulation.

Lie-group primitives for SO(3)/SE_2(3), the Newtonian and mixed-invariant
spacecraft models, the left-invariant log-error dynamics with the gravity
mismatch bound, dynamic-inversion control, dual propagation, and a
scenario-driven CLI reproducing the validation experiment.
"""

from ._backend import BACKEND, available_backends

__version__ = "0.1.0"

__all__ = ["BACKEND", "available_backends", "__version__"]
