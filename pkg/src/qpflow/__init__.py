"""Hybrid quantum-classical AC power flow toolkit.

Fast decoupled load flow whose linear solves run either through a direct
factorization or through an HHL circuit executed on an embedded,
noise-configurable statevector simulator.
"""

__version__ = "0.1.0"

from . import analysis, fdlf, hhl, netmodel, noise, qsim

__all__ = ["analysis", "fdlf", "hhl", "netmodel", "noise", "qsim", "__version__"]
