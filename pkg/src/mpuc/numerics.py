"""Dense linear-algebra helpers shared by the toolkit.

Thin deterministic layers over numpy/scipy: rank decisions, normal-matrix
eigendecompositions with orthonormal eigenvectors, operator Schmidt /
nearest-Kronecker factorizations, channel fixed points by power iteration,
and principal logarithms of unitaries.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

from .conventions import TOL
from .errors import NumericalError

Array = np.ndarray


def dagger(M: Array) -> Array:
    return M.conj().T


def hs_inner(A: Array, B: Array) -> complex:
    """Hilbert-Schmidt inner product Tr(A† B)."""
    return complex(np.tensordot(A.conj(), B, axes=B.ndim))


def kron_all(mats: list[Array]) -> Array:
    out = mats[0]
    for M in mats[1:]:
        out = np.kron(out, M)
    return out


def fourier_matrix(d: int) -> Array:
    """Unitary with columns the shifted-clock eigenbasis: F[k, a] = w^{a k} / sqrt(d)."""
    return scipy.linalg.dft(d).conj() / np.sqrt(d)


def assert_unitary(M: Array, tol: float | None = None, what: str = "matrix") -> None:
    tol = TOL.unitarity if tol is None else tol
    n, m = M.shape
    if n != m:
        raise NumericalError(f"{what} is not square: {M.shape}")
    err = np.abs(M @ dagger(M) - np.eye(n)).max()
    if err > tol:
        raise NumericalError(f"{what} is not unitary: residual {err:.3e} > {tol:.1e}")


def matrix_rank(M: Array, rel_tol: float | None = None) -> int:
    """Rank with a cutoff relative to the largest singular value."""
    rel_tol = TOL.rank if rel_tol is None else rel_tol
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def eig_normal(M: Array, tol: float = 1e-9) -> tuple[Array, Array]:
    """Eigendecomposition of a normal matrix with orthonormal eigenvectors.

    Returns (w, V) with M = V diag(w) V† and V unitary (valid also for
    degenerate eigenvalues, where numpy.linalg.eig may lose orthogonality).
    """
    normal_err = np.abs(M @ dagger(M) - dagger(M) @ M).max()
    scale = max(np.abs(M).max(), 1.0)
    if normal_err > 1e-8 * scale:
        raise NumericalError(f"matrix is not normal: [M,M†] residual {normal_err:.3e}")
    T, Z = scipy.linalg.schur(M, output="complex")
    off = np.abs(T - np.diag(np.diag(T))).max()
    if off > tol * scale:
        raise NumericalError(f"Schur form not diagonal: off-diagonal {off:.3e}")
    return np.diag(T).copy(), Z


def unitary_log(U: Array) -> Array:
    """Hermitian h with U = exp(i h), eigenphases taken in (-pi, pi]."""
    assert_unitary(U, what="unitary_log input")
    w, V = eig_normal(U)
    phases = np.angle(w)  # numpy returns values in (-pi, pi]
    phases[phases <= -np.pi + 1e-14] = np.pi
    return (V * phases) @ dagger(V)


def operator_schmidt(
    O: Array, dims: tuple[int, int], rel_tol: float | None = None
) -> tuple[Array, list[Array], list[Array]]:
    """Operator Schmidt decomposition of O acting on C^dA ⊗ C^dB.

    O = sum_k s_k A_k ⊗ B_k with s descending and the A_k (resp. B_k)
    orthonormal in Hilbert-Schmidt inner product.  Terms below the relative
    cutoff are dropped.
    """
    rel_tol = TOL.rank if rel_tol is None else rel_tol
    dA, dB = dims
    if O.shape != (dA * dB, dA * dB):
        raise NumericalError(f"operator_schmidt: shape {O.shape} != {(dA*dB, dA*dB)}")
    R = O.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)
    u, s, vh = np.linalg.svd(R, full_matrices=False)
    keep = s > (rel_tol * s[0] if s.size and s[0] > 0 else 0)
    s = s[keep]
    A = [u[:, k].reshape(dA, dA) for k in range(s.size)]
    B = [vh[k, :].reshape(dB, dB) for k in range(s.size)]
    return s, A, B


def nearest_kronecker(
    M: Array, shape_a: tuple[int, int], shape_b: tuple[int, int]
) -> tuple[Array, Array, float]:
    """Best rank-one Kronecker factorization M ≈ A ⊗ B.

    Returns (A, B, rel_residual) where rel_residual is the ratio of the
    second to the first singular value of the reshuffled matrix (0 for an
    exact Kronecker product).
    """
    ma, na = shape_a
    mb, nb = shape_b
    if M.shape != (ma * mb, na * nb):
        raise NumericalError(f"nearest_kronecker: shape {M.shape} != {(ma*mb, na*nb)}")
    R = M.reshape(ma, mb, na, nb).transpose(0, 2, 1, 3).reshape(ma * na, mb * nb)
    u, s, vh = np.linalg.svd(R, full_matrices=False)
    if s[0] == 0.0:
        raise NumericalError("nearest_kronecker: zero matrix")
    A = np.sqrt(s[0]) * u[:, 0].reshape(ma, na)
    B = np.sqrt(s[0]) * vh[0, :].reshape(mb, nb)
    resid = float(s[1] / s[0]) if s.size > 1 else 0.0
    return A, B, resid


def polar_unitary(M: Array) -> Array:
    """Unitary factor of the polar decomposition (requires full rank)."""
    u, _ = scipy.linalg.polar(M)
    if matrix_rank(M) < min(M.shape):
        raise NumericalError("polar_unitary: input is rank deficient")
    return u


def dominant_fixed_point(
    apply_channel: Callable[[Array], Array],
    dim: int,
    constraint: Callable[[Array], complex] | None = None,
    max_iter: int = 2000,
    check_unique: bool = True,
) -> Array:
    """Fixed point of a linear superoperator by power iteration.

    Seeds with the identity matrix (deterministic).  ``constraint`` maps an
    iterate to the scalar used for normalization (default: trace); the
    returned X satisfies constraint(X) == 1.  A second, deflated power
    iteration estimates the subleading eigenvalue and raises if it sits
    within ``TOL.fixed_point_gap`` of 1 (non-unique fixed point).
    """
    if constraint is None:
        constraint = lambda X: complex(np.trace(X))  # noqa: E731

    def normalize(X: Array) -> Array:
        c = constraint(X)
        if abs(c) < 1e-14:
            raise NumericalError("fixed-point normalization constraint vanished")
        return X / c

    X = normalize(np.eye(dim, dtype=complex))
    for _ in range(max_iter):
        Xn = normalize(apply_channel(X))
        if np.abs(Xn - X).max() <= TOL.fixed_point * max(1.0, np.abs(Xn).max()):
            X = Xn
            break
        X = Xn
    else:
        raise NumericalError(f"fixed point did not converge in {max_iter} iterations")

    if check_unique:
        # Deflated growth-rate estimate for the subleading eigenvalue.  The
        # channels produced by simple MPU tensors have all non-unit
        # eigenvalues nilpotent, so the deflated iterate collapses fast.
        rng = np.random.default_rng(7)
        Xhat = X / np.sqrt(np.abs(hs_inner(X, X)))
        Y = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        Y -= hs_inner(Xhat, Y) * Xhat
        norm_prev = None
        rate = 0.0
        for _ in range(4 * dim + 20):
            Y = apply_channel(Y)
            Y -= hs_inner(Xhat, Y) * Xhat
            norm = float(np.linalg.norm(Y))
            if norm < 1e-300:
                rate = 0.0
                break
            if norm_prev is not None:
                rate = norm / norm_prev
            if norm > 1e100:  # keep the iterate in floating range
                Y /= norm
                norm = 1.0
            norm_prev = norm
        if abs(rate - 1.0) < TOL.fixed_point_gap:
            raise NumericalError(
                f"degenerate fixed point: subleading eigenvalue {rate:.12f} ~ 1"
            )
    return X


def random_unitary(n: int, rng: np.random.Generator) -> Array:
    """Haar-random unitary from a QR decomposition with phase fixing."""
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def snap_to_root_of_unity(z: complex, order: int, tol: float | None = None) -> int:
    """Exponent k with z ~= exp(2 pi i k / order), or raise if too far."""
    tol = TOL.phase_snap if tol is None else tol
    if abs(abs(z) - 1.0) > tol:
        raise NumericalError(f"phase has non-unit modulus |z|={abs(z):.6f}")
    k = int(round(np.angle(z) * order / (2 * np.pi))) % order
    snapped = np.exp(2j * np.pi * k / order)
    if abs(z - snapped) > tol:
        raise NumericalError(
            f"phase {z:.8f} is {abs(z - snapped):.2e} from the nearest "
            f"{order}-th root of unity (tol {tol:.1e})"
        )
    return k


def gauge_fix_phase(M: Array) -> Array:
    """Rescale by a phase so the first nonzero entry (row-major) is real > 0."""
    flat = M.ravel()
    idx = np.flatnonzero(np.abs(flat) > 1e-12)
    if idx.size == 0:
        raise NumericalError("gauge_fix_phase: zero matrix")
    ph = flat[idx[0]] / abs(flat[idx[0]])
    return M / ph
