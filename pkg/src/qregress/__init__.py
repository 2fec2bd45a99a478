"""Markovianity tests for open qubit dynamics via multi-time correlators.

Submodules
----------
qalg
    Small-matrix algebra: Pauli operators, trace distance, damping bases.
quadrature
    Adaptive Gauss-Kronrod and composite Gauss-Legendre rules.
spectral
    Spectral densities and bath correlation integrals.
models
    Exact amplitudes, dynamical maps and exact correlators.
criteria
    Map-built correlators, relative change, BLP and RHP measures.
oracle
    Brute-force system-bath dilations used as ground truth.
cli
    Command-line sweeps.
"""

__version__ = "0.1.0"
