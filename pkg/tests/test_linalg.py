import numpy as np
import pytest

from monogamy import linalg

from helpers import random_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def test_kron_identity_and_scalar():
    a = np.arange(4).reshape(2, 2).astype(complex)
    assert np.array_equal(linalg.kron(np.eye(1), a), a)
    assert np.array_equal(linalg.kron([[2.0]], a), 2 * a)


def test_kron_sigma_x_identity_placement():
    out = linalg.kron(SX, np.eye(2))
    want = np.zeros((4, 4))
    for i, j in [(0, 2), (1, 3), (2, 0), (3, 1)]:
        want[i, j] = 1.0
    assert np.allclose(out, want)


def test_kron_rejects_nonfinite():
    with pytest.raises(ValueError, match="finite"):
        linalg.kron([[np.nan]], np.eye(2))


def test_partial_trace_product_state():
    rng = np.random.default_rng(11)
    a, b = random_hermitian(2, rng), random_hermitian(3, rng)
    out = linalg.partial_trace(np.kron(a, b), (2, 3), [1])
    assert np.allclose(out, np.trace(b) * a)


def test_partial_trace_maximally_entangled_marginal():
    phi = np.zeros(4)
    phi[[0, 3]] = 1 / np.sqrt(2)
    rho = np.outer(phi, phi)
    assert np.allclose(linalg.partial_trace(rho, (2, 2), [1]), np.eye(2) / 2)
    assert np.allclose(linalg.partial_trace(rho, (2, 2), [0]), np.eye(2) / 2)


def test_partial_trace_everything_gives_full_trace():
    rng = np.random.default_rng(3)
    m = random_hermitian(8, rng)
    out = linalg.partial_trace(m, (2, 2, 2), [0, 1, 2])
    assert out.shape == (1, 1)
    assert abs(out[0, 0] - np.trace(m)) < 1e-12


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(4)
    m = random_hermitian(12, rng)
    for traced in ([0], [1], [2], [0, 2]):
        out = linalg.partial_trace(m, (2, 3, 2), traced)
        assert abs(np.trace(out) - np.trace(m)) < 1e-10


def test_partial_trace_index_out_of_range():
    with pytest.raises(IndexError):
        linalg.partial_trace(np.eye(4), (2, 2), [2])


def test_partial_transpose_involution():
    rng = np.random.default_rng(5)
    m = random_hermitian(6, rng)
    assert np.allclose(linalg.partial_transpose(linalg.partial_transpose(m, (2, 3), 1), (2, 3), 1), m)


def test_partial_transpose_of_product_stays_psd():
    rng = np.random.default_rng(6)
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a = g @ g.conj().T
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = g @ g.conj().T
    pt = linalg.partial_transpose(np.kron(a, b), (2, 3), 1)
    assert np.allclose(pt, np.kron(a, b.T))
    assert np.linalg.eigvalsh(pt)[0] > -1e-12


def test_partial_transpose_spectrum_of_phi_plus():
    # PT of the maximally entangled projector is half the swap operator,
    # so the spectrum is -1/2 once and +1/2 three times
    phi = np.zeros(4)
    phi[[0, 3]] = 1 / np.sqrt(2)
    pt = linalg.partial_transpose(np.outer(phi, phi), (2, 2), 1)
    assert np.allclose(np.linalg.eigvalsh(pt), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_partial_transpose_everywhere_is_full_transpose():
    rng = np.random.default_rng(7)
    m = random_hermitian(8, rng)
    out = m
    for idx in range(3):
        out = linalg.partial_transpose(out, (2, 2, 2), idx)
    assert np.allclose(out, m.T)


def test_hermitian_eig_paulis():
    w, _ = linalg.hermitian_eig(SZ)
    assert np.allclose(w, [-1, 1])
    w, _ = linalg.hermitian_eig(np.eye(5))
    assert np.allclose(w, np.ones(5))
    w, v = linalg.hermitian_eig(SX)
    assert np.allclose(w, [-1, 1])
    minus = np.array([1, -1]) / np.sqrt(2)
    assert min(np.linalg.norm(v[:, 0] - minus), np.linalg.norm(v[:, 0] + minus)) < 1e-9


def test_hermitian_eig_reconstruction_and_orthonormality():
    rng = np.random.default_rng(8)
    for _ in range(10):
        m = random_hermitian(9, rng)
        w, v = linalg.hermitian_eig(m)
        assert np.all(np.diff(w) >= -1e-12)
        assert np.abs((v * w) @ v.conj().T - m).max() < 1e-9
        assert np.abs(v.conj().T @ v - np.eye(9)).max() < 1e-9


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        linalg.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_permutation_conjugate_identity_and_swap():
    rng = np.random.default_rng(9)
    a, b, c = (random_hermitian(2, rng) for _ in range(3))
    full = linalg.kron_all([a, b, c])
    assert np.allclose(linalg.permutation_conjugate(full, (2, 2, 2), (0, 1, 2)), full)
    swapped = linalg.permutation_conjugate(full, (2, 2, 2), (0, 2, 1))
    assert np.allclose(swapped, linalg.kron_all([a, c, b]))
    assert np.allclose(linalg.permutation_conjugate(swapped, (2, 2, 2), (0, 2, 1)), full)


def test_permutation_conjugate_preserves_spectrum():
    rng = np.random.default_rng(10)
    m = random_hermitian(8, rng)
    out = linalg.permutation_conjugate(m, (2, 2, 2), (2, 0, 1))
    assert np.abs(np.linalg.eigvalsh(out) - np.linalg.eigvalsh(m)).max() < 1e-9
    assert abs(np.trace(out) - np.trace(m)) < 1e-12


def test_permutation_conjugate_rejects_unequal_dims():
    with pytest.raises(ValueError, match="dim"):
        linalg.permutation_conjugate(np.eye(6), (2, 3), (1, 0))


def test_real_embedding_real_input_is_block_diagonal():
    h = np.array([[2.0, 1.0], [1.0, 0.0]])
    emb = linalg.real_embedding(h)
    assert np.allclose(emb, np.block([[h, np.zeros((2, 2))], [np.zeros((2, 2)), h]]))


def test_real_embedding_sigma_y_spectrum():
    emb = linalg.real_embedding(SY)
    assert np.allclose(np.linalg.eigvalsh(emb), [-1, -1, 1, 1])
    assert np.abs(emb - emb.T).max() == 0.0


def test_real_embedding_round_trip():
    rng = np.random.default_rng(12)
    h = random_hermitian(5, rng)
    assert np.abs(linalg.real_unembedding(linalg.real_embedding(h)) - h).max() < 1e-12


def test_real_embedding_psd_iff():
    rng = np.random.default_rng(13)
    for _ in range(10):
        h = random_hermitian(4, rng)
        lam_h = np.linalg.eigvalsh(h)[0]
        lam_e = np.linalg.eigvalsh(linalg.real_embedding(h))[0]
        assert (lam_h >= -1e-9) == (lam_e >= -1e-9)
        assert abs(lam_h - lam_e) < 1e-10
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        psd = g @ g.conj().T
        assert np.linalg.eigvalsh(linalg.real_embedding(psd))[0] > -1e-9


def test_real_embedding_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        linalg.real_embedding(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_partial_trace_of_kron_property():
    rng = np.random.default_rng(14)
    for _ in range(5):
        a, b = random_hermitian(3, rng), random_hermitian(2, rng)
        lhs = linalg.partial_trace(np.kron(a, b), (3, 2), [1])
        assert np.abs(lhs - np.trace(b) * a).max() < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4])
def test_hermitian_basis_orthonormal_and_complete(d):
    basis = linalg.hermitian_basis(d)
    assert len(basis) == d * d
    gram = np.array([[np.tensordot(g1.conj(), g2).real for g2 in basis] for g1 in basis])
    assert np.abs(gram - np.eye(d * d)).max() < 1e-12
    rng = np.random.default_rng(d)
    h = random_hermitian(d, rng)
    coeffs = [np.tensordot(g.conj(), h).real for g in basis]
    rebuilt = sum(c * g for c, g in zip(coeffs, basis))
    assert np.abs(rebuilt - h).max() < 1e-12
