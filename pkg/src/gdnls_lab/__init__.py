"""gdnls-lab: a numerical laboratory for the function-space machinery of
derivative nonlinear Schroedinger equations on a periodic spectral grid."""

__version__ = "0.1.0"
