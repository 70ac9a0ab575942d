import numpy as np
import pytest

from mpuc.errors import NumericalError
from mpuc.numerics import (
    dominant_fixed_point,
    eig_normal,
    gauge_fix_phase,
    hs_inner,
    matrix_rank,
    nearest_kronecker,
    operator_schmidt,
    polar_unitary,
    random_unitary,
    snap_to_root_of_unity,
    unitary_log,
)

SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)


def test_matrix_rank_relative_cutoff():
    M = np.diag([1.0, 1e-3, 1e-12])
    assert matrix_rank(M) == 2
    assert matrix_rank(np.zeros((3, 3))) == 0


def test_eig_normal_orthonormal_on_degenerate_spectrum():
    # projector with a 2-fold degenerate eigenvalue; numpy.linalg.eig may
    # return non-orthogonal vectors here, the Schur route must not
    rng = np.random.default_rng(0)
    U = random_unitary(4, rng)
    M = U @ np.diag([1.0, 1.0, -1.0, 0.5]) @ U.conj().T
    w, V = eig_normal(M)
    assert np.abs(V.conj().T @ V - np.eye(4)).max() < 1e-10
    assert np.abs((V * w) @ V.conj().T - M).max() < 1e-10


def test_eig_normal_rejects_non_normal():
    with pytest.raises(NumericalError):
        eig_normal(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_unitary_log_branch():
    U = np.diag([1.0, 1j, -1.0])
    h = unitary_log(U)
    # eigenphases on the principal branch (-pi, pi]: 0, pi/2, and +pi (not -pi)
    assert np.abs(np.sort(np.linalg.eigvalsh(h)) - [0.0, np.pi / 2, np.pi]).max() < 1e-12
    from scipy.linalg import expm

    assert np.abs(expm(1j * h) - U).max() < 1e-12


def test_unitary_log_path_stays_unitary():
    rng = np.random.default_rng(1)
    U = random_unitary(5, rng)
    h = unitary_log(U)
    assert np.abs(h - h.conj().T).max() < 1e-10
    from scipy.linalg import expm

    for lam in np.linspace(0, 1, 5):
        Ul = expm(1j * lam * h)
        assert np.abs(Ul @ Ul.conj().T - np.eye(5)).max() < 1e-10
    assert np.abs(expm(1j * h) - U).max() < 1e-10


def test_operator_schmidt_swap_has_four_equal_coefficients():
    s, A, B = operator_schmidt(SWAP, (2, 2))
    assert s.shape == (4,)
    assert np.abs(s - 1.0).max() < 1e-12
    # orthonormal factors and faithful reconstruction
    G = np.array([[hs_inner(A[i], A[j]) for j in range(4)] for i in range(4)])
    assert np.abs(G - np.eye(4)).max() < 1e-12
    rec = sum(s[k] * np.kron(A[k], B[k]) for k in range(4))
    assert np.abs(rec - SWAP).max() < 1e-12


def test_operator_schmidt_product_operator_is_rank_one():
    rng = np.random.default_rng(2)
    A = random_unitary(2, rng)
    B = random_unitary(3, rng)
    s, _, _ = operator_schmidt(np.kron(A, B), (2, 3))
    assert s.size == 1


def test_nearest_kronecker_exact_recovery():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    B = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    M = np.kron(A, B)
    A2, B2, resid = nearest_kronecker(M, (3, 2), (2, 4))
    assert resid < 1e-12
    assert np.abs(np.kron(A2, B2) - M).max() < 1e-10


def test_dominant_fixed_point_depolarizing():
    d, p = 3, 0.3

    def chan(X):
        return (1 - p) * X + p * np.trace(X) * np.eye(d) / d

    X = dominant_fixed_point(chan, d)
    assert np.abs(X - np.eye(d) / d).max() < 1e-10


def test_dominant_fixed_point_unitary_kraus():
    rng = np.random.default_rng(4)
    U1, U2 = random_unitary(3, rng), random_unitary(3, rng)

    def chan(X):
        return 0.5 * (U1 @ X @ U1.conj().T + U2 @ X @ U2.conj().T)

    X = dominant_fixed_point(chan, 3)
    assert np.abs(chan(X) - X).max() < 1e-9
    assert abs(np.trace(X) - 1) < 1e-12


def test_dominant_fixed_point_detects_degeneracy():
    with pytest.raises(NumericalError, match="degenerate"):
        dominant_fixed_point(lambda X: X, 3)


def test_polar_unitary():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    u = polar_unitary(M)
    assert np.abs(u @ u.conj().T - np.eye(4)).max() < 1e-10
    H = u.conj().T @ M  # remaining factor must be positive semidefinite hermitian
    assert np.abs(H - H.conj().T).max() < 1e-9
    assert np.linalg.eigvalsh(H).min() > -1e-9


def test_snap_to_root_of_unity():
    assert snap_to_root_of_unity(np.exp(2j * np.pi / 3) * (1 + 1e-9), 3) == 1
    assert snap_to_root_of_unity(1.0 + 0j, 5) == 0
    with pytest.raises(NumericalError):
        snap_to_root_of_unity(np.exp(1j * 0.3), 4)


def test_gauge_fix_phase():
    M = np.array([[0.0, -1j], [1.0, 0.0]])
    G = gauge_fix_phase(M)
    assert abs(G[0, 1] - 1.0) < 1e-12
