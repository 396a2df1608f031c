"""Constructors and validation for density matrices on small multipartite systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg

PSD_TOL = 1e-9
TRACE_TOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite, unit-trace operator with a fixed tensor factorization.

    Validation rejects inputs violating Hermiticity (1e-10), positivity
    (min eigenvalue >= -1e-9) or normalization (|trace - 1| <= 1e-9), naming
    the broken invariant and its magnitude.
    """

    dims: tuple[int, ...]
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        dims = linalg.check_dims(self.dims, mat.shape[0] if mat.ndim == 2 else -1)
        defect = linalg.hermiticity_defect(mat)
        if defect > linalg.HERM_TOL:
            raise ValueError(f"not a density matrix: Hermiticity defect {defect:.3e} > {linalg.HERM_TOL:.1e}")
        trace = float(mat.trace().real)
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"not a density matrix: trace {trace!r} is off by {abs(trace - 1.0):.3e}")
        lam_min = float(np.linalg.eigvalsh(mat)[0])
        if lam_min < -PSD_TOL:
            raise ValueError(f"not a density matrix: min eigenvalue {lam_min:.3e} < -{PSD_TOL:.1e}")
        mat.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def partial_trace(self, traced) -> "DensityMatrix":
        reduced = linalg.partial_trace(self.mat, self.dims, traced)
        keep = tuple(d for i, d in enumerate(self.dims) if i not in set(traced))
        return DensityMatrix(keep if keep else (1,), reduced)

    def permute(self, perm: Sequence[int]) -> "DensityMatrix":
        out = linalg.permutation_conjugate(self.mat, self.dims, perm)
        return DensityMatrix(tuple(self.dims[p] for p in perm), out)


def pure_density(vec, dims: Sequence[int]) -> DensityMatrix:
    """Rank-1 projector |v><v| for a normalized state vector."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"state vector norm {norm!r} is off by {abs(norm - 1.0):.3e}")
    return DensityMatrix(tuple(dims), np.outer(vec, vec.conj()))


def max_entangled(d: int) -> DensityMatrix:
    """|Phi><Phi| with |Phi> = sum_i |ii> / sqrt(d) on dims [d, d]."""
    d = int(d)
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    vec = np.zeros(d * d, dtype=complex)
    vec[:: d + 1] = 1 / np.sqrt(d)
    return pure_density(vec, (d, d))


def werner(p: float) -> DensityMatrix:
    """Singlet/identity mixture p*|psi-><psi-| + (1-p)*I/4 on two qubits."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight must be in [0, 1], got {p!r}")
    singlet = np.zeros(4, dtype=complex)
    singlet[1], singlet[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    mat = p * np.outer(singlet, singlet.conj()) + (1 - p) * np.eye(4) / 4
    return DensityMatrix((2, 2), mat)


def bush_rumsfeld(epsilon: float) -> DensityMatrix:
    """Pure two-qubit state sqrt(1-eps)|00> + sqrt(eps)|11>; eps=1/2 is maximally entangled."""
    epsilon = float(epsilon)
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"weight must be in [0, 1], got {epsilon!r}")
    vec = np.array([np.sqrt(1 - epsilon), 0.0, 0.0, np.sqrt(epsilon)], dtype=complex)
    return pure_density(vec, (2, 2))


def bdsw_tripartite() -> DensityMatrix:
    """Three-qubit state (A,B,E) mixing 'Bob got the qubit' with 'Eve got it'.

    Equal mixture of Phi+ on AB with a random qubit at E, and Phi+ on AE with
    a random qubit at B; symmetric under swapping B and E while the AB
    marginal stays entangled.
    """
    phi = max_entangled(2).mat
    eye2 = np.eye(2) / 2
    ab_part = np.kron(phi, eye2)  # order A,B,E
    ae_part = linalg.permutation_conjugate(np.kron(phi, eye2), (2, 2, 2), (0, 2, 1))  # A,E,B -> A,B,E
    return DensityMatrix((2, 2, 2), 0.5 * ab_part + 0.5 * ae_part)


def random_density(dims, seed: int) -> DensityMatrix:
    """Hilbert-Schmidt random state G G^dag / Tr(G G^dag), deterministic per seed.

    `dims` may be a single dimension or a list of subsystem dimensions.
    """
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(d) for d in dims)
    d = int(np.prod(dims, dtype=np.int64))
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {dims}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    mat = g @ g.conj().T
    return DensityMatrix(dims, mat / mat.trace().real)


def random_pure(dims, seed: int) -> DensityMatrix:
    """Seeded Haar-like random pure state (normalized complex Gaussian vector)."""
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(d) for d in dims)
    d = int(np.prod(dims, dtype=np.int64))
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return pure_density(vec / np.linalg.norm(vec), dims)
