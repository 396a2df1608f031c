"""Symmetric-extension feasibility: SDP construction, verdicts, hierarchy sweeps.

A state rho on A x B is k-extendible when some (k+1)-party state rho' on
A x B_1 ... B_k reduces to rho on the A B_i pairs. Two symmetry notions are
supported: "perm" additionally demands invariance of rho' under permuting the
B parties (one marginal equality then suffices, transpositions (B_1 B_j)
generate the rest); "marginals" only demands the k marginal equalities.

The SDP variable is the real embedding of the candidate extension, with
explicit equalities tying the embedding blocks together so it represents a
Hermitian matrix; Hermitian-operator equalities are expanded over the
orthonormal product basis built from generalized Gell-Mann matrices in a
fixed ordering, so constraint counts are reproducible.
"""

from __future__ import annotations

import itertools
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg, sdp
from .states import DensityMatrix, bush_rumsfeld, werner

VARIANT_PERMUTATION = "perm"
VARIANT_MARGINALS = "marginals"
_VARIANTS = (VARIANT_PERMUTATION, VARIANT_MARGINALS)

DEFAULT_DIM_CAP = 256
MARGINAL_TOL = 1e-7

FAMILIES: dict[str, Callable[[float], DensityMatrix]] = {
    "werner": werner,
    "bush_rumsfeld": bush_rumsfeld,
}


def dimension_cap() -> int:
    """Dimension cap for the extension variable; MONOGAMY_MAX_DIM overrides."""
    raw = os.environ.get("MONOGAMY_MAX_DIM")
    return int(raw) if raw else DEFAULT_DIM_CAP


def _check_variant(variant: str) -> str:
    if variant not in _VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {_VARIANTS}")
    return variant


@dataclass(frozen=True)
class ExtensionProblem:
    rho: DensityMatrix
    k: int
    variant: str = VARIANT_PERMUTATION
    cap: Optional[int] = None

    def __post_init__(self):
        if len(self.rho.dims) != 2:
            raise ValueError(f"state must be bipartite, got dims {self.rho.dims}")
        d_a, d_b = self.rho.dims
        if d_a < 2 or d_b < 2:
            raise ValueError(f"subsystem dimensions must be >= 2, got {self.rho.dims}")
        if self.k < 2:
            raise ValueError(f"extension count k must be >= 2, got {self.k}")
        _check_variant(self.variant)
        cap = self.cap if self.cap is not None else dimension_cap()
        if self.total_dim > cap:
            raise ValueError(
                f"extension dimension {d_a}*{d_b}^{self.k} = {self.total_dim} exceeds cap {cap}"
            )
        object.__setattr__(self, "cap", cap)

    @property
    def total_dim(self) -> int:
        d_a, d_b = self.rho.dims
        return d_a * d_b**self.k

    @property
    def extension_dims(self) -> tuple[int, ...]:
        d_a, d_b = self.rho.dims
        return (d_a,) + (d_b,) * self.k


@dataclass(frozen=True)
class ExtendibilityResult:
    status: str
    margin: float
    k: int
    variant: str
    extension: Optional[DensityMatrix] = field(default=None, repr=False)
    certificate: Optional[np.ndarray] = field(default=None, repr=False)
    iterations: int = 0


def _hermitian_constraint(g: np.ndarray, value: float):
    """Encode Tr(g H) = value for Hermitian g, H over the real embedding X=R(H):
    Tr(R(g) R(H)) = 2 Tr(g H), so the constraint matrix is R(g)/2."""
    return linalg.real_embedding(g) / 2.0, float(value)


def _structural_constraints(dc: int):
    """Equalities making a real symmetric 2dc x 2dc matrix represent A + iB
    Hermitian: equal diagonal blocks and an antisymmetric off-diagonal block."""
    out = []
    dr = 2 * dc
    for i in range(dc):
        for j in range(i, dc):
            a = np.zeros((dr, dr))
            half = 1.0 if i == j else 0.5
            a[i, j] += half
            a[j, i] += half
            a[dc + i, dc + j] -= half
            a[dc + j, dc + i] -= half
            out.append((a, 0.0))
    for i in range(dc):
        for j in range(i, dc):
            a = np.zeros((dr, dr))
            a[i, dc + j] += 0.5
            a[dc + j, i] += 0.5
            if i != j:
                a[j, dc + i] += 0.5
                a[dc + i, j] += 0.5
            out.append((a, 0.0))
    return out


def _lifted_pair_basis(d_a: int, d_b: int, k: int, slot: int):
    """Product-basis elements g_A (x) g_B placed on factors (A, B_slot),
    identity elsewhere, yielding the functionals of the A B_slot marginal."""
    basis_a = linalg.hermitian_basis(d_a)
    basis_b = linalg.hermitian_basis(d_b)
    eye_b = np.eye(d_b, dtype=complex)
    for g_a in basis_a:
        for g_b in basis_b:
            factors = [g_a] + [g_b if j == slot else eye_b for j in range(1, k + 1)]
            yield g_a, g_b, linalg.kron_all(factors)


def build_extension_sdp(problem: ExtensionProblem) -> sdp.SdpProblem:
    """Assemble the feasibility SDP for an extension problem.

    Variable: real embedding (side 2*dA*dB^k) of the candidate extension.
    Constraints: unit trace; the variant's marginal equalities (and, for the
    permutation variant, invariance under the transpositions (B_1 B_j));
    the structural Hermitian-embedding equalities.
    """
    d_a, d_b = problem.rho.dims
    k = problem.k
    dc = problem.total_dim
    dims = problem.extension_dims
    constraints = [_hermitian_constraint(np.eye(dc, dtype=complex), 1.0)]

    basis_a = linalg.hermitian_basis(d_a)
    basis_b = linalg.hermitian_basis(d_b)

    if problem.variant == VARIANT_PERMUTATION:
        # invariance under (B_1 B_j): expand H - P H P^dag = 0 over the product
        # basis; conjugating a product operator just swaps its factors, and the
        # (l, swapped l) index pairs give each constraint twice, so keep l < swapped.
        n_b = len(basis_b)
        for j in range(2, k + 1):
            for labels in itertools.product(range(n_b), repeat=k):
                swapped = list(labels)
                swapped[0], swapped[j - 1] = swapped[j - 1], swapped[0]
                if labels >= tuple(swapped):
                    continue
                for a_label in range(len(basis_a)):
                    g = linalg.kron_all([basis_a[a_label]] + [basis_b[l] for l in labels])
                    g_sw = linalg.kron_all([basis_a[a_label]] + [basis_b[l] for l in swapped])
                    constraints.append(_hermitian_constraint(g - g_sw, 0.0))
        marginal_slots = [1]
    else:
        marginal_slots = list(range(1, k + 1))

    for slot in marginal_slots:
        for g_a, g_b, lifted in _lifted_pair_basis(d_a, d_b, k, slot):
            target = np.tensordot(linalg.kron(g_a, g_b).conj(), problem.rho.mat)
            constraints.append(_hermitian_constraint(lifted, target.real))

    constraints.extend(_structural_constraints(dc))
    return sdp.SdpProblem(2 * dc, constraints)


def verify_extension(
    rho_prime: DensityMatrix,
    rho: DensityMatrix,
    k: int,
    variant: str = VARIANT_PERMUTATION,
    marginal_tol: float = MARGINAL_TOL,
) -> bool:
    """Check that rho_prime is a valid extension witness for (rho, k, variant)."""
    _check_variant(variant)
    d_a, d_b = rho.dims
    expected = (d_a,) + (d_b,) * k
    if tuple(rho_prime.dims) != expected:
        raise ValueError(f"extension dims {rho_prime.dims} do not match expected {expected}")
    try:  # revalidate: callers may hand in matrices that bypassed construction
        DensityMatrix(rho_prime.dims, rho_prime.mat)
    except ValueError:
        return False
    slots = [1] if variant == VARIANT_PERMUTATION else list(range(1, k + 1))
    for slot in slots:
        traced = [j for j in range(1, k + 1) if j != slot]
        marg = linalg.partial_trace(rho_prime.mat, rho_prime.dims, traced)
        if float(np.abs(marg - rho.mat).max()) > marginal_tol:
            return False
    if variant == VARIANT_PERMUTATION:
        for j in range(2, k + 1):
            perm = list(range(k + 1))
            perm[1], perm[j] = perm[j], perm[1]
            swapped = linalg.permutation_conjugate(rho_prime.mat, rho_prime.dims, perm)
            if float(np.abs(swapped - rho_prime.mat).max()) > marginal_tol:
                return False
    return True


def _witness_to_extension(x: np.ndarray, problem: ExtensionProblem) -> Optional[DensityMatrix]:
    """Map an SDP point back to a density matrix, rounding boundary cases.

    Alternates a PSD projection with re-imposition of the exact marginals so
    that near-feasible points (margin ~ 0) still yield a verifiable witness.
    """
    h = linalg.real_unembedding(x)
    dims = problem.extension_dims
    for _ in range(8):
        lam, vec = np.linalg.eigh(h)
        if lam[0] >= -1e-12:
            break
        h = (vec * lam.clip(min=0.0)) @ vec.conj().T
        h = h / h.trace().real
        h = _reimpose_marginals(h, problem)
        h = (h + h.conj().T) / 2
    try:
        candidate = DensityMatrix(dims, h)
    except ValueError:
        return None
    if verify_extension(candidate, problem.rho, problem.k, problem.variant):
        return candidate
    return None


def _reimpose_marginals(h: np.ndarray, problem: ExtensionProblem) -> np.ndarray:
    """Orthogonal projection of h onto the affine set of the extension problem."""
    d_a, d_b = problem.rho.dims
    k = problem.k
    dc = problem.total_dim
    if problem.variant == VARIANT_PERMUTATION:
        h = symmetrize_b_parties(h, problem.extension_dims)
        slots = [1]
    else:
        slots = list(range(1, k + 1))
    for slot in slots:
        for g_a, g_b, lifted in _lifted_pair_basis(d_a, d_b, k, slot):
            target = float(np.tensordot(linalg.kron(g_a, g_b).conj(), problem.rho.mat).real)
            current = float(np.tensordot(lifted.conj(), h).real)
            # lifted = g (x) I has squared HS norm d_b^(k-1)
            h = h + (target - current) * lifted / (d_b ** (k - 1))
    return h


def symmetrize_b_parties(mat: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Twirl over all permutations of the B parties (factors 1..k)."""
    n = len(dims)
    out = np.zeros_like(mat, dtype=complex)
    perms = list(itertools.permutations(range(1, n)))
    for perm in perms:
        out += linalg.permutation_conjugate(mat, dims, [0] + list(perm))
    return out / len(perms)


def check_extendible(
    rho: DensityMatrix,
    k: int,
    variant: str = VARIANT_PERMUTATION,
    cap: Optional[int] = None,
) -> ExtendibilityResult:
    """Build and solve the extension SDP; witnesses and certificates are verified.

    A borderline SDP margin with a point that still rounds to a verified
    extension (states on the boundary of the extendible set, e.g. pure product
    states with their unique rank-deficient extension) is reported feasible.
    """
    problem = ExtensionProblem(rho, k, variant, cap)
    instance = build_extension_sdp(problem)
    sol = sdp.solve_feasibility(instance)
    if sol.status == sdp.INFEASIBLE:
        return ExtendibilityResult(
            sdp.INFEASIBLE, sol.margin, k, variant, certificate=sol.certificate, iterations=sol.iterations
        )
    extension = _witness_to_extension(sol.witness, problem) if sol.witness is not None else None
    if extension is not None and (sol.status == sdp.FEASIBLE or sol.margin > -sdp.MARGIN_TOL):
        return ExtendibilityResult(
            sdp.FEASIBLE, sol.margin, k, variant, extension=extension, iterations=sol.iterations
        )
    return ExtendibilityResult(sdp.BORDERLINE, sol.margin, k, variant, iterations=sol.iterations)


def hierarchy(
    rho: DensityMatrix,
    k_max: int,
    variant: str = VARIANT_PERMUTATION,
    cap: Optional[int] = None,
) -> list[ExtendibilityResult]:
    """Run check_extendible for k = 2..k_max; any infeasible level certifies
    entanglement. Levels beyond the dimension cap are dropped with a warning."""
    if k_max < 2:
        raise ValueError(f"k_max must be >= 2, got {k_max}")
    results = []
    limit = cap if cap is not None else dimension_cap()
    d_a, d_b = rho.dims
    for k in range(2, k_max + 1):
        if d_a * d_b**k > limit:
            warnings.warn(
                f"hierarchy truncated at k={k}: dimension {d_a * d_b ** k} exceeds cap {limit}",
                stacklevel=2,
            )
            break
        results.append(check_extendible(rho, k, variant, cap))
    return results


def extendibility_threshold(
    family,
    k: int,
    p_lo: float,
    p_hi: float,
    variant: str = VARIANT_PERMUTATION,
    width: float = 1e-4,
    decide: Optional[Callable[[DensityMatrix], str]] = None,
) -> float:
    """Bisect the largest feasible parameter of a one-parameter state family.

    `family` is a registered name or a callable p -> DensityMatrix. The
    decision defaults to check_extendible at level k; pass `decide` to swap in
    another oracle (e.g. a PPT test). Borderline verdicts count as feasible
    and are logged. The bracket must satisfy feasible(p_lo), infeasible(p_hi).
    """
    if isinstance(family, str):
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}, expected one of {sorted(FAMILIES)}")
        make = FAMILIES[family]
    else:
        make = family
    if decide is None:
        decide = lambda state: check_extendible(state, k, variant).status

    def feasible_side(p: float) -> bool:
        status = decide(make(p))
        if status == sdp.BORDERLINE:
            warnings.warn(f"borderline verdict at p={p!r}, treated as feasible", stacklevel=3)
            return True
        return status == sdp.FEASIBLE

    lo, hi = float(p_lo), float(p_hi)
    if not feasible_side(lo):
        raise ValueError(f"bracket violated: family({lo!r}) is not feasible at k={k}")
    if feasible_side(hi):
        raise ValueError(f"bracket violated: family({hi!r}) is not infeasible at k={k}")
    while hi - lo > width:
        mid = (lo + hi) / 2
        if feasible_side(mid):
            lo = mid
        else:
            hi = mid
    return lo
