"""Model-zoo regressions: constructions, hand identities, frozen labels."""

import numpy as np
import pytest
from itertools import product
from math import cos, log, pi
from scipy.linalg import expm

from mpuc.errors import ValidationError
from mpuc.groups import cocycle_invariant
from mpuc.models import (
    available_models,
    build_cocycle_mpu,
    instantiate,
    zdzd_generator_cocycle,
)
from mpuc.mpu import brickwork_unitary, build_full_unitary, verify_standard_form
from mpuc.numerics import assert_unitary, fourier_matrix


def test_registry_and_validation():
    names = [name for name, _, _ in available_models()]
    assert sorted(names) == [
        "bilayer-swap",
        "cocycle-mpu",
        "identity",
        "shift",
        "z2-d8",
        "z3-refined",
        "zdzd-floquet-perturbed",
        "zdzd-spt",
    ]
    with pytest.raises(ValidationError):
        instantiate("no-such-model")
    with pytest.raises(ValidationError):
        instantiate("bilayer-swap")  # n is required
    with pytest.raises(ValidationError):
        instantiate("bilayer-swap", n=1)
    with pytest.raises(ValidationError):
        instantiate("zdzd-spt", d=1)
    with pytest.raises(ValidationError):
        instantiate("identity", q=5)
    with pytest.raises(ValidationError):
        instantiate("cocycle-mpu", d=4)  # |G| = 16 > 12


SMALL_INSTANCES = [
    ("identity", {"d": 2}),
    ("identity", {"d": 3}),
    ("shift", {"d": 2}),
    ("shift", {"d": 3}),
    ("bilayer-swap", {"n": 2}),
    ("bilayer-swap", {"n": 3}),
    ("bilayer-swap", {"n": 5}),
    ("z3-refined", {}),
    ("zdzd-spt", {"d": 2}),
    ("zdzd-spt", {"d": 3}),
    ("zdzd-floquet-perturbed", {"d": 2, "h": 0.3}),
    ("cocycle-mpu", {"d": 2}),
    ("cocycle-mpu", {"d": 3}),
]


@pytest.mark.parametrize("name,params", SMALL_INSTANCES)
def test_zoo_gates_unitary_and_reconstruct(name, params):
    m = instantiate(name, **params)
    assert_unitary(m.sf.u, tol=1e-9, what="u")
    assert_unitary(m.sf.v, tol=1e-9, what="v")
    assert m.sf.residual < 1e-8
    assert abs(m.sf.index - m.expected["ind"]) < 1e-9


def _apply_sitewise(op, psi, sites):
    m = op.shape[0]
    out = psi.reshape([m] * sites)
    for s in range(sites):
        out = np.moveaxis(np.tensordot(op, out, axes=([1], [s])), 0, s)
    return out.reshape(-1)


@pytest.mark.parametrize("name,params", SMALL_INSTANCES)
def test_zoo_ring_symmetric(name, params):
    # [U^(L), rho^(x L)] = 0 on two standard-form cells for every element
    m = instantiate(name, **params)
    N = 2
    dim = m.sf.m ** (2 * N)
    if dim <= 4096:
        U = brickwork_unitary(m.sf, N)
        for g in m.group.elements():
            R = np.array([[1.0 + 0j]])
            for _ in range(2 * N):
                R = np.kron(R, m.rep[g])
            assert np.abs(U @ R - R @ U).max() < 1e-9, f"element {g}"
    else:
        from mpuc.mpu import brickwork_apply

        rng = np.random.default_rng(3)
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        for g in m.group.elements():
            lhs = brickwork_apply(m.sf, _apply_sitewise(m.rep[g], psi, 2 * N), N)
            rhs = _apply_sitewise(m.rep[g], brickwork_apply(m.sf, psi, N), 2 * N)
            assert np.abs(lhs - rhs).max() < 1e-9, f"element {g}"


def test_bilayer_is_counter_translation():
    m = instantiate("bilayer-swap", n=3)
    L = 3
    U = build_full_unitary(m.tensor, L)
    dim = 4**L
    # out a_s = in a_{s+1}, out b_s = in b_{s-1}
    P = np.zeros((dim, dim))
    for bits in product(range(2), repeat=2 * L):
        a = bits[0::2]
        b = bits[1::2]
        outa = tuple(a[(s + 1) % L] for s in range(L))
        outb = tuple(b[(s - 1) % L] for s in range(L))
        obits = [x for pair in zip(outa, outb) for x in pair]
        P[int("".join(map(str, obits)), 2), int("".join(map(str, bits)), 2)] = 1
    assert np.abs(U - P).max() < 1e-12


def test_bilayer_equals_two_swap_layers():
    # depth-2 circuit: swap within each site, then swap a_t with b_{t+1}
    m = instantiate("bilayer-swap", n=4)
    L = 3
    n_q = 2 * L

    def swap_qubits(i, j):
        S = np.zeros((2**n_q, 2**n_q))
        for bits in product(range(2), repeat=n_q):
            o = list(bits)
            o[i], o[j] = o[j], o[i]
            S[int("".join(map(str, o)), 2), int("".join(map(str, bits)), 2)] = 1
        return S

    layer1 = np.eye(2**n_q)
    for t in range(L):
        layer1 = swap_qubits(2 * t, 2 * t + 1) @ layer1
    layer2 = np.eye(2**n_q)
    for t in range(L):
        layer2 = swap_qubits(2 * t, (2 * t + 3) % n_q) @ layer2
    assert np.abs(layer2 @ layer1 - build_full_unitary(m.tensor, L)).max() < 1e-12


def test_bilayer_symmetry_factorization_exact():
    for n in (2, 3, 5):
        m = instantiate("bilayer-swap", n=n)
        w = np.exp(2j * np.pi / n)
        rho = m.rep[1]
        lhs = m.sf.u @ np.kron(rho, rho) @ m.sf.u.conj().T
        y = np.kron(np.diag([1, w]), np.diag([1, w]))
        assert np.abs(lhs - np.kron(np.eye(4), y)).max() < 1e-12


def test_bilayer_expected_matches_cos_formula():
    for n in (2, 3, 4, 5, 6):
        m = instantiate("bilayer-swap", n=n)
        if n == 2:
            assert m.expected["spi"][1] is None  # character vanishes
        else:
            assert abs(m.expected["spi"][1] - log(abs(cos(pi / n)))) < 1e-12


def test_z3_gate_cycle_table():
    m = instantiate("z3-refined")
    gate = m.sf.u

    def ket(i, j):
        e = np.zeros(9, dtype=complex)
        e[3 * i + j] = 1.0
        return e

    # the gate walks each |i j> one step along its orbit
    for (i, j), (a, b) in [((0, 1), (1, 2)), ((1, 2), (0, 2)), ((0, 0), (0, 0)), ((2, 0), (2, 2))]:
        assert np.abs(gate @ ket(i, j) - ket(a, b)).max() < 1e-12


def test_z3_symmetry_both_sides():
    m = instantiate("z3-refined")
    rho = m.rep[1]
    x = rho @ rho
    lhs = m.sf.u @ np.kron(rho, rho) @ m.sf.u.conj().T
    assert np.abs(lhs - np.kron(x, x)).max() < 1e-12
    # v side: (rho x rho) v = v (y x x)
    lhs_v = np.kron(rho, rho) @ m.sf.v
    rhs_v = m.sf.v @ np.kron(x, x)
    assert np.abs(lhs_v - rhs_v).max() < 1e-12


def test_z2d8_ring_is_unitary_symmetric_and_matches_tensor():
    m = instantiate("z2-d8")
    U = brickwork_unitary(m.sf, 2)  # 4 sites of dim 8
    dim = 8**4
    assert np.abs(U @ U.conj().T - np.eye(dim)).max() < 1e-9
    Ut = build_full_unitary(m.tensor, 2)  # 2 cells = same 4 sites
    assert np.abs(U - Ut).max() < 1e-9
    R = np.array([[1.0 + 0j]])
    for _ in range(4):
        R = np.kron(R, m.rep[1])
    assert np.abs(U @ R - R @ U).max() < 1e-9


def test_z2d8_symmetry_factorization():
    m = instantiate("z2-d8")
    rho = m.rep[1]
    M = m.sf.u @ np.kron(rho, rho) @ m.sf.u.conj().T
    # rank-1 across the virtual split, with |Tr x| * |Tr y| = chi^2 = 16
    R = M.reshape(8, 8, 8, 8).transpose(0, 2, 1, 3).reshape(64, 64)
    s = np.linalg.svd(R, compute_uv=False)
    assert s[0] > 1e-6 and s[1] < 1e-9 * s[0]
    U8, _, Vh8 = np.linalg.svd(R)
    x = U8[:, 0].reshape(8, 8)
    y = Vh8[0].reshape(8, 8)
    assert abs(abs(np.trace(x) * np.trace(y)) * s[0] - 16) < 1e-8


@pytest.mark.parametrize("d", [2, 3])
def test_zdzd_gates_equal_tensor_route(d):
    # dense at two cells, stochastic at three; both must agree to precision
    m = instantiate("zdzd-spt", d=d)
    res = verify_standard_form(m.sf, m.tensor)
    assert res < 1e-12
    if d == 2:
        U_b = brickwork_unitary(m.sf, 2)
        U_t = build_full_unitary(m.tensor, 4)
        assert np.abs(U_b - U_t).max() < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_zdzd_matches_exponential_formula(d):
    # ring of 4 qudits; diagonal in the shifted-Fourier basis with
    # alternating-sign nearest-neighbour products
    m = instantiate("zdzd-spt", d=d)
    U_t = build_full_unitary(m.tensor, 2)
    w = np.exp(2j * np.pi / d)
    F = fourier_matrix(d)
    nq = 4
    ph = np.zeros([d] * nq, dtype=complex)
    for xs in product(range(d), repeat=nq):
        e = sum((-1) ** q * xs[q] * xs[(q + 1) % nq] for q in range(nq))
        ph[xs] = w**e
    Wn = np.array([[1.0 + 0j]])
    for _ in range(nq):
        Wn = np.kron(Wn, F)
    U_o = Wn @ np.diag(ph.reshape(-1)) @ Wn.conj().T
    assert np.abs(U_t - U_o).max() < 1e-12
    # same thing as the exponential of the commuting two-body pieces
    NX = F @ np.diag(np.arange(d).astype(complex)) @ F.conj().T
    H = np.zeros((d**nq, d**nq), dtype=complex)
    for q in range(nq):
        ops = [np.eye(d, dtype=complex)] * nq
        ops[q] = NX
        ops[(q + 1) % nq] = NX
        M1 = np.array([[1.0 + 0j]])
        for o in ops:
            M1 = np.kron(M1, o)
        H += (-1) ** (q + 1) * M1
    assert np.abs(U_t - expm(-1j * (2 * np.pi / d) * H)).max() < 1e-11


def test_zdzd_floquet_is_kicked_spt():
    d, h = 2, 0.25
    m0 = instantiate("zdzd-spt", d=d)
    m1 = instantiate("zdzd-floquet-perturbed", d=d, h=h)
    P1 = np.diag(np.exp(-1j * h * np.arange(d)))
    kick = np.kron(P1, P1)
    U0 = build_full_unitary(m0.tensor, 2)
    U1 = build_full_unitary(m1.tensor, 2)
    K = np.kron(kick, kick)
    assert np.abs(U1 - K @ U0).max() < 1e-12
    # kick is symmetric, labels unchanged
    assert m1.expected == m0.expected


def test_cocycle_mpu_explicit_virtual_action():
    m = instantiate("cocycle-mpu", d=2)
    G, theta = zdzd_generator_cocycle(2)
    n = G.size
    u = m.sf.u
    for g in G.elements():
        R = np.kron(m.rep[g], m.rep[g])
        x = np.zeros((n, n), dtype=complex)
        for k in G.elements():
            x[k, G.mul(G.inv(g), k)] = np.exp(1j * theta[G.inv(k), g])
        assert np.abs(u @ R @ u.conj().T - np.kron(x, x.conj())).max() < 1e-12


def test_cocycle_mpu_coboundary_gauge_independence():
    G, theta = zdzd_generator_cocycle(3)
    rng = np.random.default_rng(7)
    mu = rng.uniform(0, 2 * np.pi, G.size)
    mu[0] = 0.0
    theta2 = np.array(
        [[theta[i, j] + mu[i] + mu[j] - mu[G.mul(i, j)] for j in range(G.size)] for i in range(G.size)]
    )
    m1 = build_cocycle_mpu(group=G, theta=theta)
    m2 = build_cocycle_mpu(group=G, theta=theta2)
    inv1 = cocycle_invariant(G, np.exp(1j * theta))
    inv2 = cocycle_invariant(G, np.exp(1j * theta2))
    assert inv1 == inv2
    assert not inv1.is_trivial()
    assert m1.expected["cocycle_nontrivial"] and m2.expected["cocycle_nontrivial"]
    assert m1.sf.residual < 1e-8 and m2.sf.residual < 1e-8


def test_cocycle_mpu_rejects_non_cocycle_table():
    G, theta = zdzd_generator_cocycle(2)
    bad = theta.copy()
    bad[1, 2] += 0.7
    with pytest.raises(ValidationError):
        build_cocycle_mpu(group=G, theta=bad)


def test_expected_labels_are_consistent():
    m = instantiate("shift", d=3)
    assert abs(m.expected["spi"][0] - m.expected["ind"]) < 1e-12
    m = instantiate("z3-refined")
    assert m.expected["rind"][1] == -1 and m.expected["rind"][2] == -1
    m = instantiate("z2-d8")
    assert abs(m.expected["spi"][1] - log(2)) < 1e-12
    assert m.expected["rind"][1] == 4
    m = instantiate("zdzd-spt", d=3)
    (pair, order) = m.expected["cocycle_pair"]
    assert pair == (3, 1) and order == 3
    assert m.group.element_tuples[pair[0]] == (1, 0)
    assert m.group.element_tuples[pair[1]] == (0, 1)
