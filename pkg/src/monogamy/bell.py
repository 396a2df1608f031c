"""Joint probability tables, LHV models from symmetric extensions, CHSH tools.

The hidden-variable construction: given an extension rho' of rho to k copies
of Bob's side and one measurement per copy, all of Bob's measurements can be
applied at once to rho'. The outcome tuple (b_1, ..., b_m) is the hidden
variable; its probability is the weight, Bob answers setting y
deterministically with b_y, and Alice answers from the conditional state her
side is left in. Because each A B_y marginal of rho' equals rho, the model
reproduces the quantum table of rho for those measurements, so such states
cannot violate any Bell inequality with m settings on Bob's side.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg, sdp
from .states import DensityMatrix

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

POVM_TOL = 1e-9
TABLE_TOL = 1e-9


@dataclass(frozen=True)
class Measurement:
    """POVM on one subsystem: PSD elements summing to the identity."""

    elements: tuple

    def __init__(self, elements):
        packed = []
        for idx, el in enumerate(elements):
            el = np.asarray(el, dtype=complex)
            defect = linalg.hermiticity_defect(el)
            if defect > POVM_TOL:
                raise ValueError(f"POVM element {idx} not Hermitian: defect {defect:.3e}")
            lam_min = float(np.linalg.eigvalsh(el)[0])
            if lam_min < -POVM_TOL:
                raise ValueError(f"POVM element {idx} not PSD: min eigenvalue {lam_min:.3e}")
            el.setflags(write=False)
            packed.append(el)
        if not packed:
            raise ValueError("a measurement needs at least one element")
        total = sum(packed)
        gap = float(np.abs(total - np.eye(packed[0].shape[0])).max())
        if gap > POVM_TOL:
            raise ValueError(f"POVM elements do not sum to identity: deviation {gap:.3e}")
        object.__setattr__(self, "elements", tuple(packed))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class Scenario:
    alice: tuple
    bob: tuple

    def __init__(self, alice, bob):
        alice, bob = tuple(alice), tuple(bob)
        if not alice or not bob:
            raise ValueError("scenario needs at least one measurement per side")
        if len({m.dim for m in alice}) != 1 or len({m.dim for m in bob}) != 1:
            raise ValueError("measurement dimensions inconsistent within a side")
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)

    @property
    def dims(self) -> tuple[int, int]:
        return self.alice[0].dim, self.bob[0].dim


@dataclass(frozen=True)
class ProbabilityTable:
    """p(a, b | x, y) stored as probs[x, y, a, b], zero-padded to the largest
    outcome count; validated nonnegative, normalized and no-signaling."""

    probs: np.ndarray = field(repr=False)
    alice_outcomes: tuple
    bob_outcomes: tuple

    def __init__(self, probs, alice_outcomes=None, bob_outcomes=None):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 4:
            raise ValueError(f"expected a 4-d table p[x, y, a, b], got shape {probs.shape}")
        nx, ny, na, nb = probs.shape
        alice_outcomes = tuple(alice_outcomes) if alice_outcomes is not None else (na,) * nx
        bob_outcomes = tuple(bob_outcomes) if bob_outcomes is not None else (nb,) * ny
        low = float(probs.min())
        if low < -1e-12:
            raise ValueError(f"table has negative entry {low:.3e}")
        sums = probs.sum(axis=(2, 3))
        worst = float(np.abs(sums - 1.0).max())
        if worst > TABLE_TOL:
            raise ValueError(f"table not normalized: worst deviation {worst:.3e}")
        marg_a = probs.sum(axis=3)  # p(a | x, y)
        gap_a = float(np.abs(marg_a - marg_a[:, :1]).max())
        marg_b = probs.sum(axis=2)
        gap_b = float(np.abs(marg_b - marg_b[:1]).max())
        if max(gap_a, gap_b) > TABLE_TOL:
            raise ValueError(f"table is signaling: deviation {max(gap_a, gap_b):.3e}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "alice_outcomes", alice_outcomes)
        object.__setattr__(self, "bob_outcomes", bob_outcomes)

    @property
    def settings(self) -> tuple[int, int]:
        return self.probs.shape[0], self.probs.shape[1]

    def is_dichotomic_2x2(self) -> bool:
        return (
            self.settings == (2, 2)
            and all(o == 2 for o in self.alice_outcomes)
            and all(o == 2 for o in self.bob_outcomes)
        )


@dataclass(frozen=True)
class LhvModel:
    """Finite hidden-variable model: the variables are Bob's outcome tuples.

    Alice's stochastic responses are derived lazily, per requested
    measurement, from the stored conditional states, so any finite set of
    Alice measurements is served by one model. Branches below the weight
    floor keep a uniform conditional so the model stays well-formed.
    """

    lambdas: tuple
    weights: np.ndarray = field(repr=False)
    alice_states: tuple = field(repr=False)
    bob_outcomes: tuple

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        total = float(weights.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"hidden-variable weights sum to {total!r}, off by {abs(total - 1.0):.3e}")
        if float(weights.min()) < -1e-12:
            raise ValueError(f"negative hidden-variable weight {float(weights.min()):.3e}")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "lambdas", tuple(tuple(l) for l in self.lambdas))
        object.__setattr__(self, "alice_states", tuple(self.alice_states))

    @property
    def dim_alice(self) -> int:
        return self.alice_states[0].shape[0]

    def alice_response(self, measurement: Measurement) -> np.ndarray:
        """Stochastic response table p(a | lambda) for one Alice measurement."""
        rows = np.empty((len(self.lambdas), measurement.outcomes))
        for i, state in enumerate(self.alice_states):
            rows[i] = [float(np.tensordot(el.conj(), state).real) for el in measurement.elements]
        return rows.clip(min=0.0)

    def bob_response(self, y: int, lam: Sequence[int]) -> int:
        """Deterministic: setting y is answered with the y-th entry of lambda."""
        return int(lam[y])


def qubit_projective(theta: float, phi: float = 0.0) -> Measurement:
    """Projective qubit measurement along the Bloch direction (theta, phi)."""
    direction = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    obs = sum(c * p for c, p in zip(direction, PAULI))
    return Measurement(((np.eye(2) + obs) / 2, (np.eye(2) - obs) / 2))


def basis_measurement(d: int) -> Measurement:
    return Measurement(tuple(np.diag(row).astype(complex) for row in np.eye(d)))


def joint_table(rho: DensityMatrix, scenario: Scenario) -> ProbabilityTable:
    """Quantum table p(a, b | x, y) = Tr[(M^x_a (x) N^y_b) rho]."""
    d_a, d_b = scenario.dims
    if tuple(rho.dims) != (d_a, d_b):
        raise ValueError(f"state dims {rho.dims} do not match scenario dims {(d_a, d_b)}")
    na = max(m.outcomes for m in scenario.alice)
    nb = max(m.outcomes for m in scenario.bob)
    probs = np.zeros((len(scenario.alice), len(scenario.bob), na, nb))
    for x, mx in enumerate(scenario.alice):
        for y, ny_ in enumerate(scenario.bob):
            for a, ma in enumerate(mx.elements):
                for b, nb_ in enumerate(ny_.elements):
                    probs[x, y, a, b] = float(np.tensordot(np.kron(ma, nb_).conj(), rho.mat).real)
    return ProbabilityTable(
        probs,
        tuple(m.outcomes for m in scenario.alice),
        tuple(m.outcomes for m in scenario.bob),
    )


def lhv_from_extension(rho_prime: DensityMatrix, scenario: Scenario, weight_floor: float = 1e-14) -> LhvModel:
    """Hidden-variable model for the reduced state, from a verified extension.

    Requires one Bob measurement per extension copy (m = k). The branch for
    outcome tuple lam carries weight Tr[(I (x) N^1_{lam_1} ... N^m_{lam_m}) rho']
    and Alice's normalized conditional state.
    """
    from .extendibility import VARIANT_MARGINALS, verify_extension

    dims = rho_prime.dims
    k = len(dims) - 1
    d_a = dims[0]
    if k < 2:
        raise ValueError(f"extension must have at least two B parties, got dims {dims}")
    if len(scenario.bob) != k:
        raise ValueError(f"need one Bob measurement per copy: m={len(scenario.bob)} but k={k}")
    if scenario.dims != (d_a, dims[1]):
        raise ValueError(f"scenario dims {scenario.dims} do not match extension dims {dims}")
    rho = rho_prime.partial_trace(range(2, k + 1))
    if not verify_extension(rho_prime, rho, k, VARIANT_MARGINALS):
        raise ValueError("rho_prime is not a valid equal-marginals extension of its own reduction")

    d_bk = int(np.prod(dims[1:]))
    tensor = rho_prime.mat.reshape(d_a, d_bk, d_a, d_bk)
    lambdas, weights, states = [], [], []
    for lam in itertools.product(*(range(m.outcomes) for m in scenario.bob)):
        big = linalg.kron_all([scenario.bob[y].elements[lam[y]] for y in range(k)])
        conditional = np.einsum("bc,icjb->ij", big, tensor)
        weight = float(conditional.trace().real)
        lambdas.append(lam)
        weights.append(max(weight, 0.0))
        if weight < weight_floor:
            states.append(np.eye(d_a, dtype=complex) / d_a)
        else:
            state = conditional / weight
            states.append((state + state.conj().T) / 2)
    weights = np.array(weights)
    return LhvModel(tuple(lambdas), weights / weights.sum(), tuple(states), tuple(m.outcomes for m in scenario.bob))


def lhv_table(model: LhvModel, scenario: Scenario) -> ProbabilityTable:
    """Table generated by the model: sum_lam w(lam) p(a|x,lam) [b = lam_y]."""
    if tuple(m.outcomes for m in scenario.bob) != model.bob_outcomes:
        raise ValueError(
            f"Bob scenario shape {tuple(m.outcomes for m in scenario.bob)} "
            f"does not match model shape {model.bob_outcomes}"
        )
    if scenario.dims[0] != model.dim_alice:
        raise ValueError(f"Alice dimension {scenario.dims[0]} does not match model ({model.dim_alice})")
    na = max(m.outcomes for m in scenario.alice)
    nb = max(model.bob_outcomes)
    probs = np.zeros((len(scenario.alice), len(scenario.bob), na, nb))
    for x, mx in enumerate(scenario.alice):
        response = model.alice_response(mx)  # |lambda| x outcomes
        for i, lam in enumerate(model.lambdas):
            w = model.weights[i]
            for y in range(len(scenario.bob)):
                probs[x, y, : mx.outcomes, model.bob_response(y, lam)] += w * response[i]
    return ProbabilityTable(probs, tuple(m.outcomes for m in scenario.alice), model.bob_outcomes)


def _require_2x2(table: ProbabilityTable):
    if not table.is_dichotomic_2x2():
        raise ValueError(
            f"need 2 settings and 2 outcomes per side, got settings {table.settings}, "
            f"outcomes {table.alice_outcomes} / {table.bob_outcomes}"
        )


def chsh_value(table: ProbabilityTable) -> float:
    """S = E00 + E01 + E10 - E11 with E_xy the +-1-outcome correlators."""
    _require_2x2(table)
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    corr = np.tensordot(table.probs, signs, axes=([2, 3], [0, 1]))
    return float(corr[0, 0] + corr[0, 1] + corr[1, 0] - corr[1, 1])


def correlation_matrix(rho: DensityMatrix) -> np.ndarray:
    """3x3 two-qubit correlation matrix T_ij = Tr[rho (sigma_i (x) sigma_j)]."""
    if tuple(rho.dims) != (2, 2):
        raise ValueError(f"need a two-qubit state, got dims {rho.dims}")
    t = np.empty((3, 3))
    for i, si in enumerate(PAULI):
        for j, sj in enumerate(PAULI):
            t[i, j] = float(np.tensordot(np.kron(si, sj).conj(), rho.mat).real)
    return t


def chsh_max_2qubit(rho: DensityMatrix) -> float:
    """Largest CHSH value over all measurement choices: 2*sqrt(t1^2 + t2^2)
    from the two largest singular values of the correlation matrix."""
    sing = np.linalg.svd(correlation_matrix(rho), compute_uv=False)
    return float(2.0 * np.sqrt(sing[0] ** 2 + sing[1] ** 2))


def deterministic_strategies() -> list[np.ndarray]:
    """The 16 deterministic 2x2 dichotomic tables, ordered by (a0, a1, b0, b1)."""
    out = []
    for a0, a1, b0, b1 in itertools.product(range(2), repeat=4):
        probs = np.zeros((2, 2, 2, 2))
        for x, y in itertools.product(range(2), repeat=2):
            probs[x, y, (a0, a1)[x], (b0, b1)[y]] = 1.0
        out.append(probs)
    return out


def local_2x2_membership(table: ProbabilityTable) -> bool:
    """Membership of the table in the local polytope, by feasibility of the
    convex-combination weights (a diagonal PSD variable); decided rather than
    read off facets. Borderline verdicts (boundary tables) report False with
    a warning."""
    _require_2x2(table)
    strategies = deterministic_strategies()
    n = len(strategies)
    constraints = []
    for i in range(n):
        for j in range(i + 1, n):
            a = np.zeros((n, n))
            a[i, j] = a[j, i] = 0.5
            constraints.append((a, 0.0))
    for x, y, a_out, b_out in itertools.product(range(2), repeat=4):
        diag = np.diag([s[x, y, a_out, b_out] for s in strategies])
        constraints.append((diag, float(table.probs[x, y, a_out, b_out])))
    sol = sdp.solve_feasibility(sdp.SdpProblem(n, constraints))
    if sol.status == sdp.BORDERLINE:
        warnings.warn(
            f"local-membership test is borderline (margin {sol.margin:.2e}); reporting non-membership",
            stacklevel=2,
        )
    return sol.status == sdp.FEASIBLE
