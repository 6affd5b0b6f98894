"""Pseudo-spectral toolkit for intermittent Beltrami flows on the 3-torus.

Builds divergence-free Beltrami waves modulated by directed Dirichlet
kernels, assembles one round of the stress-cancelling velocity
perturbation for the fractionally dissipative Navier-Stokes system, and
certifies the algebraic identities and norm-scaling laws of the
construction at desk scale.
"""

__version__ = "0.1.0"
