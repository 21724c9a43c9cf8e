"""Perturbative series, Pade/Borel resummation and exact-diagonalization
oracles for the energy and quantum metric of anharmonic oscillators."""

__version__ = "0.1.0"
