"""Shareability of bipartite quantum states: symmetric-extension SDPs with
verifiable witnesses, spectral entanglement detectors, and the hidden-variable
models that extendibility guarantees."""

from . import bell, cli, entanglement, extendibility, linalg, sdp, states

__all__ = ["bell", "cli", "entanglement", "extendibility", "linalg", "sdp", "states"]
