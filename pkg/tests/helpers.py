"""Shared test utilities: seeded random objects and independent oracles."""

import numpy as np

# Werner two-extendibility threshold from the first bisection run (width 1e-4),
# kept as a regression constant; it must reproduce exactly on every run.
WERNER_K2_THRESHOLD = 0.66668701171875

from monogamy import sdp
from monogamy.bell import Measurement, Scenario, chsh_value, correlation_matrix, joint_table, PAULI
from monogamy.states import DensityMatrix, pure_density, random_density


def haar_unitary(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def bloch_measurement(direction):
    obs = sum(c * p for c, p in zip(direction, PAULI))
    return Measurement(((np.eye(2) + obs) / 2, (np.eye(2) - obs) / 2))


def random_qubit_projective(rng):
    theta = np.arccos(rng.uniform(-1, 1))
    phi = rng.uniform(0, 2 * np.pi)
    direction = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    return bloch_measurement(direction)


def random_scenario(seed, n_alice, n_bob=2):
    rng = np.random.default_rng(seed)
    return Scenario(
        [random_qubit_projective(rng) for _ in range(n_alice)],
        [random_qubit_projective(rng) for _ in range(n_bob)],
    )


def product_pure(seed):
    rng = np.random.default_rng(seed)
    va = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    vb = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return pure_density(np.kron(va / np.linalg.norm(va), vb / np.linalg.norm(vb)), (2, 2))


def separable_mixture(seed, n_terms=3, d=2):
    """Explicit separable state sum_i p_i rhoA_i (x) rhoB_i with its components."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(n_terms))
    comps = []
    for w in weights:
        a = random_density(d, int(rng.integers(0, 2**31)))
        b = random_density(d, int(rng.integers(0, 2**31)))
        comps.append((float(w), a, b))
    mat = sum(w * np.kron(a.mat, b.mat) for w, a, b in comps)
    return DensityMatrix((d, d), mat), comps


def hand_extension(comps, k):
    """The explicit extension sum_i p_i rhoA_i (x) rhoB_i^(x k) of a mixture."""
    mat = 0
    for w, a, b in comps:
        term = a.mat
        for _ in range(k):
            term = np.kron(term, b.mat)
        mat = mat + w * term
    d_a = comps[0][1].dim
    d_b = comps[0][2].dim
    return DensityMatrix((d_a,) + (d_b,) * k, mat)


def chsh_grid_max(rho, points=20, zooms=4):
    """Direct maximization of chsh_value over measurement angles.

    Optimal observables lie in the planes of the top two singular directions
    of the correlation matrix; a zooming grid over the four plane angles finds
    them, and the winner is re-measured through joint_table/chsh_value.
    """
    t = correlation_matrix(rho)
    u_vecs, sing, vt = np.linalg.svd(t)
    v_vecs = vt.T
    centers = np.zeros(4)
    width = np.pi
    for _ in range(zooms):
        grids = [np.linspace(c - width, c + width, points) for c in centers]

        def corr(al, be):
            return sing[0] * np.outer(np.cos(al), np.cos(be)) + sing[1] * np.outer(np.sin(al), np.sin(be))

        e_ab, e_abp = corr(grids[0], grids[2]), corr(grids[0], grids[3])
        e_apb, e_apbp = corr(grids[1], grids[2]), corr(grids[1], grids[3])
        s = (
            e_ab[:, None, :, None]
            + e_abp[:, None, None, :]
            + e_apb[None, :, :, None]
            - e_apbp[None, :, None, :]
        )
        idx = np.unravel_index(np.abs(s).argmax(), s.shape)
        centers = np.array([grids[0][idx[0]], grids[1][idx[1]], grids[2][idx[2]], grids[3][idx[3]]])
        width *= 2.5 / points
    alice = [bloch_measurement(np.cos(a) * u_vecs[:, 0] + np.sin(a) * u_vecs[:, 1]) for a in centers[:2]]
    bob = [bloch_measurement(np.cos(b) * v_vecs[:, 0] + np.sin(b) * v_vecs[:, 1]) for b in centers[2:]]
    return abs(chsh_value(joint_table(rho, Scenario(alice, bob))))


def chsh_all_sign_forms(table):
    """All eight sign-symmetric CHSH expressions of a 2x2 dichotomic table."""
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    corr = np.tensordot(table.probs, signs, axes=([2, 3], [0, 1]))
    values = []
    for flip in range(4):
        coeff = np.ones((2, 2))
        coeff[flip // 2, flip % 2] = -1.0
        s = float((coeff * corr).sum())
        values.extend([s, -s])
    return values


def assert_solution_verified(solution, problem):
    """Every feasible/infeasible return must carry a verified witness/certificate."""
    if solution.status == sdp.FEASIBLE:
        assert solution.witness is not None
        assert sdp.verify_primal(solution.witness, problem)
    elif solution.status == sdp.INFEASIBLE:
        assert solution.certificate is not None
        assert sdp.verify_farkas(solution.certificate, problem)
