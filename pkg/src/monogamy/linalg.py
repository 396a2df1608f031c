"""Dense complex linear algebra on small multipartite operators.

Index convention: an operator on subsystems with dimensions ``dims = [d0, d1,
...]`` acts on a space of side ``D = d0*d1*...``. Factor 0 is the leftmost
tensor factor and is most significant in the row index. For ``dims = [2, 2]``
the basis states order as |00>, |01>, |10>, |11>, i.e. row index
``r = 2*i0 + i1`` where ``i0`` labels factor 0. ``kron(A, B)`` then satisfies
``kron(A, B)[r, c] = A[i0, j0] * B[i1, j1]``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

HERM_TOL = 1e-10


def _as_matrix(a) -> np.ndarray:
    mat = np.asarray(a, dtype=complex)
    if mat.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat.real)) or not np.all(np.isfinite(mat.imag)):
        raise ValueError("matrix has non-finite entries")
    return mat


def check_dims(dims: Sequence[int], side: int) -> tuple[int, ...]:
    """Validate a subsystem dimension list against a matrix side."""
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"subsystem dimensions must be >= 1, got {dims}")
    if int(np.prod(dims, dtype=np.int64)) != side:
        raise ValueError(f"dims {dims} do not multiply to matrix side {side}")
    return dims


def hermiticity_defect(mat: np.ndarray) -> float:
    """Max-norm distance from the adjoint, ||M - M^dag||_max."""
    mat = np.asarray(mat)
    return float(np.abs(mat - mat.conj().T).max()) if mat.size else 0.0


def require_hermitian(mat: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Reject (do not symmetrize) matrices that are not Hermitian within tol."""
    mat = _as_matrix(mat)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    defect = hermiticity_defect(mat)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian: ||M - M^dag||_max = {defect:.3e} > {tol:.1e}")
    return mat


def kron(a, b) -> np.ndarray:
    """Kronecker product; factor `a` is most significant."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def partial_trace(mat: np.ndarray, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the subsystems listed in `traced`.

    Returns the operator on the remaining factors (in their original order);
    tracing every factor yields a 1x1 matrix holding the full trace.
    """
    mat = _as_matrix(mat)
    dims = check_dims(dims, mat.shape[0])
    n = len(dims)
    traced = sorted(set(int(i) for i in traced))
    if traced and (traced[0] < 0 or traced[-1] >= n):
        raise IndexError(f"traced indices {traced} out of range for {n} subsystems")
    keep = [i for i in range(n) if i not in traced]

    tensor = mat.reshape(dims + dims)
    # contract bra/ket axis pairs of each traced factor, most significant first
    for count, i in enumerate(traced):
        ax = i - count  # earlier contractions removed one axis pair before position i
        tensor = np.trace(tensor, axis1=ax, axis2=ax + (n - count))
    d_keep = int(np.prod([dims[i] for i in keep], dtype=np.int64))
    return tensor.reshape(d_keep, d_keep)


def partial_transpose(mat: np.ndarray, dims: Sequence[int], index: int) -> np.ndarray:
    """Transpose the chosen tensor factor; involutive and trace preserving."""
    mat = _as_matrix(mat)
    dims = check_dims(dims, mat.shape[0])
    n = len(dims)
    if not 0 <= index < n:
        raise IndexError(f"subsystem index {index} out of range for {n} subsystems")
    axes = list(range(2 * n))
    axes[index], axes[n + index] = axes[n + index], axes[index]
    return mat.reshape(dims + dims).transpose(axes).reshape(mat.shape)


def hermitian_eig(mat: np.ndarray, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Non-Hermitian input (beyond `tol`) is rejected to surface caller bugs.
    """
    mat = require_hermitian(mat, tol)
    w, v = np.linalg.eigh(mat)
    return w, v


def permutation_matrix(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Unitary P reordering tensor factors so slot i of the output carries
    input factor perm[i]. Permuted slots must have equal dimensions."""
    dims = tuple(int(d) for d in dims)
    perm = list(int(p) for p in perm)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm {perm} is not a permutation of 0..{n - 1}")
    for i, p in enumerate(perm):
        if dims[i] != dims[p]:
            raise ValueError(f"cannot move factor {p} (dim {dims[p]}) into slot {i} (dim {dims[i]})")
    d_total = int(np.prod(dims, dtype=np.int64))
    ident = np.eye(d_total)
    # row r of P is the basis vector whose multi-index is the permuted one
    tensor = ident.reshape(dims * 2).transpose(perm + list(range(n, 2 * n)))
    return tensor.reshape(d_total, d_total).astype(complex)


def permutation_conjugate(mat: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Return P M P^dag where P reorders tensor factors according to perm."""
    mat = _as_matrix(mat)
    dims = check_dims(dims, mat.shape[0])
    perm = list(int(p) for p in perm)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm {perm} is not a permutation of 0..{n - 1}")
    for i, p in enumerate(perm):
        if dims[i] != dims[p]:
            raise ValueError(f"cannot move factor {p} (dim {dims[p]}) into slot {i} (dim {dims[i]})")
    axes = perm + [p + n for p in perm]
    return mat.reshape(dims + dims).transpose(axes).reshape(mat.shape)


def real_embedding(mat: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Embed Hermitian H = A + iB as the real symmetric [[A, -B], [B, A]].

    The embedding is PSD iff H is, and each eigenvalue of H appears twice.
    """
    mat = require_hermitian(mat, tol)
    a, b = mat.real, mat.imag
    return np.block([[a, -b], [b, a]])


def real_unembedding(emb: np.ndarray) -> np.ndarray:
    """Invert `real_embedding`, averaging the redundant blocks."""
    emb = np.asarray(emb, dtype=float)
    if emb.ndim != 2 or emb.shape[0] != emb.shape[1] or emb.shape[0] % 2 != 0:
        raise ValueError(f"expected a square matrix of even side, got shape {emb.shape}")
    d = emb.shape[0] // 2
    a = (emb[:d, :d] + emb[d:, d:]) / 2
    b = (emb[d:, :d] - emb[:d, d:]) / 2
    h = a + 1j * b
    return (h + h.conj().T) / 2


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis of d x d operators (generalized Gell-Mann).

    Fixed ordering: normalized identity, the d-1 diagonal traceless elements,
    then for each i < j the symmetric and antisymmetric off-diagonal pair.
    Orthonormal under the Hilbert-Schmidt inner product Tr(G_a G_b).
    """
    d = int(d)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for l in range(1, d):
        g = np.zeros((d, d), dtype=complex)
        g[range(l), range(l)] = 1.0
        g[l, l] = -l
        basis.append(g / np.sqrt(l * (l + 1)))
    for i in range(d):
        for j in range(i + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[i, j] = sym[j, i] = 1 / np.sqrt(2)
            basis.append(sym)
            skew = np.zeros((d, d), dtype=complex)
            skew[i, j] = -1j / np.sqrt(2)
            skew[j, i] = 1j / np.sqrt(2)
            basis.append(skew)
    return basis
