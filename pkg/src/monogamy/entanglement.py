"""Spectral entanglement detectors: partial-transpose tests and Schmidt spectra.

For 2x2 and 2x3 systems positivity of the partial transpose is also
sufficient for separability, so these double as exact oracles there.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import linalg
from .states import DensityMatrix


def ppt_min_eigenvalue(rho: DensityMatrix, index: int = 1) -> float:
    """Minimum eigenvalue of the partial transpose; negative certifies entanglement."""
    pt = linalg.partial_transpose(rho.mat, rho.dims, index)
    return float(np.linalg.eigvalsh(pt)[0])


def negativity(rho: DensityMatrix, index: int = 1) -> float:
    """(||rho^{T_B}||_1 - 1) / 2, the absolute sum of negative PT eigenvalues."""
    pt = linalg.partial_transpose(rho.mat, rho.dims, index)
    eigs = np.linalg.eigvalsh(pt)  # trace norm from the spectrum: pt is Hermitian
    return max(0.0, float((np.abs(eigs).sum() - 1.0) / 2.0))


def schmidt_squares(vec, dims: Sequence[int]) -> np.ndarray:
    """Squared Schmidt coefficients of a bipartite pure state, descending.

    These are the eigenvalues of the reduced state on the first factor; they
    sum to 1 and the count above 1e-9 is the Schmidt rank.
    """
    d_a, d_b = (int(d) for d in dims)
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"state vector norm {norm!r} is off by {abs(norm - 1.0):.3e}")
    if vec.size != d_a * d_b:
        raise ValueError(f"vector length {vec.size} does not match dims ({d_a}, {d_b})")
    psi = vec.reshape(d_a, d_b)
    reduced = psi @ psi.conj().T
    return np.linalg.eigvalsh(reduced)[::-1].clip(min=0.0)


def schmidt_rank(vec, dims: Sequence[int], tol: float = 1e-9) -> int:
    return int((schmidt_squares(vec, dims) > tol).sum())
