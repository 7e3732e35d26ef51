"""Entanglement dynamics of GHZ-type three-qubit states in local Pauli channels."""

__version__ = "0.1.0"
