"""Statevector benchmark of variational vs. product-formula time evolution
for the 1D transverse-field Ising model."""

__version__ = "0.1.0"
