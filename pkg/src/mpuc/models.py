"""Zoo of symmetric matrix-product unitaries with analytically known labels.

Each model bundles a brickwork standard form (the primary object for
classification), a ring tensor where affordable, the on-site symmetry
representation (one unitary per group element, dimension equal to the
standard-form site), and a frozen dict of expected label values used by
regression tests.  Builders are deterministic; bad parameters raise
ValidationError.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import gcd, log
from typing import Callable

import numpy as np

from .errors import ValidationError
from .groups import (
    FiniteGroup,
    Representation,
    cocycle_invariant,
    product_cyclic,
    regular_representation,
)
from .mpu import (
    MpuTensor,
    StandardForm,
    standard_form_from_gates,
    tensor_from_gates,
)
from .numerics import Array, fourier_matrix


@dataclass
class Model:
    """A concrete symmetric MPU with its expected classification labels.

    ``rep`` acts on one standard-form site (``rep.dim == sf.m``).  ``tensor``
    is the ring tensor; for gate-defined models its site is one brickwork
    cell (two standard-form sites).  ``expected`` holds frozen labels:

        ind                 chiral index
        spi                 {element: symmetry-protected index or None}
        rind                {element: refined index or None}
        cocycle_nontrivial  whether the virtual factor set is cohomologically
                            nontrivial
        cocycle_pair        optional ((g, h), order): the commuting-pair
                            invariant phase at (g, h) has exactly this
                            multiplicative order
    """

    name: str
    params: dict
    group: FiniteGroup
    rep: Representation
    sf: StandardForm
    tensor: MpuTensor | None
    expected: dict
    notes: str = ""

    @property
    def tensor_is_cell(self) -> bool:
        """True when the tensor groups two standard-form sites per site."""
        return self.tensor is not None and self.tensor.site_dim == self.sf.m**2


# ---------------------------------------------------------------------------
# small shared pieces


def _clock(d: int, power: int = 1) -> Array:
    w = np.exp(2j * np.pi / d)
    return np.diag(np.array([w ** (power * k) for k in range(d)], dtype=complex))


def _qudit_shift(d: int) -> Array:
    """X with X|k> = |k-1 mod d>."""
    X = np.zeros((d, d), dtype=complex)
    for k in range(d):
        X[(k - 1) % d, k] = 1.0
    return X


def _int_param(params: dict, key: str, minimum: int, default: int | None = None) -> int:
    if key not in params:
        if default is None:
            raise ValidationError(f"model parameter {key!r} is required")
        return default
    val = params[key]
    if isinstance(val, bool) or not isinstance(val, (int, np.integer)):
        raise ValidationError(f"model parameter {key!r} must be an integer, got {val!r}")
    if val < minimum:
        raise ValidationError(f"model parameter {key!r} must be >= {minimum}, got {val}")
    return int(val)


def _float_param(params: dict, key: str, default: float) -> float:
    val = params.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float, np.floating)):
        raise ValidationError(f"model parameter {key!r} must be a real number, got {val!r}")
    return float(val)


def _reject_unknown(params: dict, allowed: tuple[str, ...]) -> None:
    extra = set(params) - set(allowed)
    if extra:
        raise ValidationError(f"unknown model parameters {sorted(extra)}; allowed: {list(allowed)}")


# ---------------------------------------------------------------------------
# trivial reference points


def build_identity(**params) -> Model:
    _reject_unknown(params, ("d",))
    d = _int_param(params, "d", 2, default=2)
    T = np.zeros((d, d, 1, 1), dtype=complex)
    T[np.arange(d), np.arange(d), 0, 0] = 1.0
    A = MpuTensor(T, elem_dim=d, sites=1)
    eye = np.eye(d * d, dtype=complex)
    sf = standard_form_from_gates(eye, eye.copy(), l=d, r=d, source=A)
    G = product_cyclic([1])
    return Model(
        name="identity",
        params={"d": d},
        group=G,
        rep=Representation(G, np.eye(d, dtype=complex)[None, :, :], check=False),
        sf=sf,
        tensor=A,
        expected={
            "ind": 0.0,
            "spi": {0: 0.0},
            "rind": {0: 1.0 + 0j},
            "cocycle_nontrivial": False,
        },
        notes="does nothing; every label sits at its reference value",
    )


def build_shift(**params) -> Model:
    _reject_unknown(params, ("d",))
    d = _int_param(params, "d", 2, default=2)
    # right-mover: out_s = in_{s-1}; both gates are identity matrices, all
    # the transport happens in the (l, r) = (1, d^2) split
    T = np.zeros((d, d, d, d), dtype=complex)
    for i, j in product(range(d), repeat=2):
        T[i, j, i, j] = 1.0
    A = MpuTensor(T, elem_dim=d, sites=1)
    eye = np.eye(d * d, dtype=complex)
    sf = standard_form_from_gates(eye, eye.copy(), l=1, r=d * d, source=A)
    G = product_cyclic([1])
    return Model(
        name="shift",
        params={"d": d},
        group=G,
        rep=Representation(G, np.eye(d, dtype=complex)[None, :, :], check=False),
        sf=sf,
        tensor=A,
        expected={
            "ind": log(d),
            "spi": {0: log(d)},
            "rind": {0: complex(d)},
            "cocycle_nontrivial": False,
        },
        notes="translation by one site; chiral index log d",
    )


# ---------------------------------------------------------------------------
# two counter-propagating qubit layers


def build_bilayer_swap(**params) -> Model:
    _reject_unknown(params, ("n",))
    n = _int_param(params, "n", 2)
    w = np.exp(2j * np.pi / n)
    # site = (a, b) qubit pair, a is the left-mover, b the right-mover;
    # bond carries one qubit of each layer
    T = np.zeros((4, 4, 4, 4), dtype=complex)
    for ia, ib, ja, jb, aa, ab in product(range(2), repeat=6):
        if ib == ab and aa == ja:
            T[ia * 2 + ib, ja * 2 + jb, aa * 2 + ab, ia * 2 + jb] = 1.0
    A = MpuTensor(T, elem_dim=2, sites=2)
    # u riffles (a1,b1,a2,b2) -> (a1,a2 | b1,b2); v reassembles shifted pairs
    u = np.zeros((16, 16), dtype=complex)
    for a1, b1, a2, b2 in product(range(2), repeat=4):
        u[a1 * 8 + a2 * 4 + b1 * 2 + b2, a1 * 8 + b1 * 4 + a2 * 2 + b2] = 1.0
    v = np.zeros((16, 16), dtype=complex)
    for b1, b2, a3, a4 in product(range(2), repeat=4):
        v[a3 * 8 + b1 * 4 + a4 * 2 + b2, b1 * 8 + b2 * 4 + a3 * 2 + a4] = 1.0
    sf = standard_form_from_gates(u, v, l=4, r=4, source=A)
    G = product_cyclic([n])
    mats = np.stack([np.kron(np.eye(2, dtype=complex), np.diag([1.0, w**j])) for j in range(n)])
    rep = Representation(G, mats)
    spi: dict[int, float | None] = {}
    rind: dict[int, complex | None] = {}
    for j in range(n):
        chi_factor = 1 + w**j
        if abs(chi_factor) < 1e-12:
            spi[j] = None
            rind[j] = None
        else:
            spi[j] = log(abs(chi_factor) / 2)
            rind[j] = complex((chi_factor / 2) ** (n // gcd(n, j)))
    return Model(
        name="bilayer-swap",
        params={"n": n},
        group=G,
        rep=rep,
        sf=sf,
        tensor=A,
        expected={
            "ind": 0.0,
            "spi": spi,
            "rind": rind,
            "cocycle_nontrivial": False,
        },
        notes=(
            "counter-propagating qubit layers; the clock acts on the right-moving "
            "layer only, so y = clock x clock on the right bond while x = 1"
        ),
    )


# ---------------------------------------------------------------------------
# qutrit model with a nontrivial refined index


def build_z3_refined(**params) -> Model:
    _reject_unknown(params, ())
    d = 3
    X = _qudit_shift(d)
    W1 = sum(
        np.kron(np.diag([1.0 if m == j else 0.0 for m in range(d)]).astype(complex),
                np.linalg.matrix_power(X, (-j) % d))
        for j in range(d)
    )
    W2 = sum(
        np.kron(np.linalg.matrix_power(X, (-k) % d),
                np.diag([1.0 if m == k else 0.0 for m in range(d)]).astype(complex))
        for k in range(d)
    )
    gate = W1 @ W2
    sf = StandardForm(u=gate, v=gate.copy(), l=d, r=d, m=d, k=1, elem_dim=d)
    A = tensor_from_gates(sf)
    G = product_cyclic([3])
    rep = Representation(G, np.stack([np.linalg.matrix_power(_z3_rho(), j) for j in range(3)]))
    return Model(
        name="z3-refined",
        params={},
        group=G,
        rep=rep,
        sf=sf,
        tensor=A,
        expected={
            "ind": 0.0,
            "spi": {0: 0.0, 1: 0.0, 2: 0.0},
            "rind": {0: 1.0 + 0j, 1: -1.0 + 0j, 2: -1.0 + 0j},
            "cocycle_nontrivial": False,
        },
        notes=(
            "plain indices all vanish (x = y = rho^2) but the refined index of "
            "both generators is -1: the cube of (1+2w^2)/(1+2w)"
        ),
    )


def _z3_rho() -> Array:
    w = np.exp(2j * np.pi / 3)
    return np.diag([1.0, w, w]).astype(complex)


# ---------------------------------------------------------------------------
# three-qubit-site model with spi = log 2


def build_z2_d8(**params) -> Model:
    _reject_unknown(params, ())
    I2 = np.eye(2, dtype=complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    P0 = np.diag([1.0, 0.0]).astype(complex)
    P1 = np.diag([0.0, 1.0]).astype(complex)
    SW = np.zeros((4, 4), dtype=complex)
    for a, b in product(range(2), repeat=2):
        SW[b * 2 + a, a * 2 + b] = 1.0
    # controlled block on qubit positions 1,2 (controls) and 3,4 (targets):
    #   controls 01 -> swap targets, 11 -> flip target 3 iff target 4 is 0
    blocks = [np.eye(4, dtype=complex), SW, np.eye(4, dtype=complex), np.kron(X, P0) + np.kron(I2, P1)]
    gate4 = sum(
        np.kron(np.kron(P0 if c1 == 0 else P1, P0 if c2 == 0 else P1), blocks[2 * c1 + c2])
        for c1 in range(2)
        for c2 in range(2)
    )
    gate = np.kron(gate4, np.eye(4, dtype=complex))
    # wire permutation (input wire -> output position, 1-indexed):
    # 1->1, 2->3, 3->5, 4->2, 5->4, 6->6
    dest = (1, 3, 5, 2, 4, 6)
    perm = np.zeros((64, 64), dtype=complex)
    for bits in product(range(2), repeat=6):
        out = [0] * 6
        for wire, b in enumerate(bits):
            out[dest[wire] - 1] = b
        r = int("".join(map(str, out)), 2)
        c = int("".join(map(str, bits)), 2)
        perm[r, c] = 1.0
    # gate-after-permutation is the unique order of the two factors for
    # which u (rho x rho) u† factorizes over the virtual split
    u = gate @ perm
    S = np.zeros((64, 64), dtype=complex)
    for a, b in product(range(8), repeat=2):
        S[b * 8 + a, a * 8 + b] = 1.0
    v = S @ u.conj().T @ S
    sf = StandardForm(u=u, v=v, l=8, r=8, m=8, k=1, elem_dim=8)
    A = tensor_from_gates(sf)
    G = product_cyclic([2])
    cz = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    rep = Representation(G, np.stack([np.eye(8, dtype=complex), np.kron(cz, I2)]))
    return Model(
        name="z2-d8",
        params={},
        group=G,
        rep=rep,
        sf=sf,
        tensor=A,
        expected={
            "ind": 0.0,
            "spi": {0: 0.0, 1: log(2.0)},
            "rind": {0: 1.0 + 0j, 1: 4.0 + 0j},
            "cocycle_nontrivial": False,
        },
        notes="site of three qubits; x has character 5-3 while y is the identity",
    )


# ---------------------------------------------------------------------------
# diagonal SPT circuits for Z_d x Z_d


def _zdzd_parts(d: int) -> tuple[MpuTensor, Array, Array]:
    """Ring tensor (Z basis) and brickwork gates of the clock-pair SPT circuit.

    Everything is diagonal in the shifted-Fourier basis; the tensor stores
    one two-qudit site and a d-dimensional bond.
    """
    w = np.exp(2j * np.pi / d)
    F = fourier_matrix(d)
    AX = np.zeros((d * d, d * d, d, d), dtype=complex)
    for a1, a2, beta in product(range(d), repeat=3):
        AX[a1 * d + a2, a1 * d + a2, a1, beta] = w ** (a1 * a2 - a2 * beta)
    W2 = np.kron(F, F)
    AZ = np.einsum("Ii,ijab,Jj->IJab", W2, AX, W2.conj())
    ph_u = np.zeros(d**4, dtype=complex)
    ph_v = np.zeros(d**4, dtype=complex)
    for j1, j2, j3, j4 in product(range(d), repeat=4):
        idx = ((j1 * d + j2) * d + j3) * d + j4
        ph_u[idx] = w ** (j1 * j2 - j2 * j3 + j3 * j4)
        ph_v[idx] = w ** (-j2 * j3)
    W4 = np.kron(W2, W2)
    u = np.diag(ph_u) @ W4.conj().T
    v = W4 @ np.diag(ph_v)
    return MpuTensor(AZ, elem_dim=d, sites=2), u, v


def _zdzd_rep(G: FiniteGroup, d: int) -> Representation:
    Z = _clock(d)
    mats = []
    for m_, n_ in G.element_tuples:
        mats.append(np.kron(np.linalg.matrix_power(Z, m_), np.linalg.matrix_power(Z, n_)))
    return Representation(G, np.stack(mats))


def _zdzd_expected(G: FiniteGroup, d: int) -> dict:
    spi: dict[int, float | None] = {g: None for g in G.elements()}
    spi[0] = 0.0
    # a nontrivial class obstructs linearizing the bond rep, so the refined
    # index is undefined for every element, the identity included
    rind: dict[int, complex | None] = {g: None for g in G.elements()}
    return {
        "ind": 0.0,
        "spi": spi,
        "rind": rind,
        "cocycle_nontrivial": True,
        # elements are lexicographic tuples, so (1,0) sits at index d and
        # (0,1) at index 1; the invariant phase there is a primitive d-th root
        "cocycle_pair": ((d, 1), d),
    }


def build_zdzd_spt(**params) -> Model:
    _reject_unknown(params, ("d",))
    d = _int_param(params, "d", 2, default=2)
    A, u, v = _zdzd_parts(d)
    sf = standard_form_from_gates(u, v, l=d * d, r=d * d, source=A)
    G = product_cyclic([d, d])
    return Model(
        name="zdzd-spt",
        params={"d": d},
        group=G,
        rep=_zdzd_rep(G, d),
        sf=sf,
        tensor=A,
        expected=_zdzd_expected(G, d),
        notes=(
            "alternating-sign clock-clock phases in the shifted-Fourier basis; "
            "all characters away from the identity vanish, the cohomology "
            "class alone is nontrivial"
        ),
    )


def build_zdzd_floquet_perturbed(**params) -> Model:
    _reject_unknown(params, ("d", "h"))
    d = _int_param(params, "d", 2, default=2)
    h = _float_param(params, "h", 0.1)
    A, u, v = _zdzd_parts(d)
    P1 = np.diag(np.exp(-1j * h * np.arange(d))).astype(complex)
    Psite = np.kron(P1, P1)
    AZ = np.einsum("ik,kjab->ijab", Psite, A.T)
    Ap = MpuTensor(AZ, elem_dim=d, sites=2)
    # the on-site kick commutes with the symmetry, so it can be absorbed in
    # the v gate (all physical outputs emerge there)
    vp = np.kron(Psite, Psite) @ v
    sf = standard_form_from_gates(u, vp, l=d * d, r=d * d, source=Ap)
    G = product_cyclic([d, d])
    return Model(
        name="zdzd-floquet-perturbed",
        params={"d": d, "h": h},
        group=G,
        rep=_zdzd_rep(G, d),
        sf=sf,
        tensor=Ap,
        expected=_zdzd_expected(G, d),
        notes="clock-pair SPT circuit followed by a symmetric on-site kick of strength h",
    )


# ---------------------------------------------------------------------------
# group-algebra MPU built from a 2-cocycle


def zdzd_generator_cocycle(d: int) -> tuple[FiniteGroup, np.ndarray]:
    """The Z_d x Z_d phase table theta((m,n),(m',n')) = (2 pi / d) n m'."""
    G = product_cyclic([d, d])
    theta = np.zeros((G.size, G.size))
    for i, j in product(range(G.size), repeat=2):
        theta[i, j] = (2 * np.pi / d) * G.element_tuples[i][1] * G.element_tuples[j][0]
    return G, theta


def validate_cocycle(G: FiniteGroup, theta: np.ndarray) -> None:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (G.size, G.size):
        raise ValidationError(f"cocycle table must be shape {(G.size, G.size)}, got {theta.shape}")
    for i, j, k in product(range(G.size), repeat=3):
        lhs = theta[i, j] + theta[G.mul(i, j), k]
        rhs = theta[j, k] + theta[i, G.mul(j, k)]
        if abs(np.exp(1j * (lhs - rhs)) - 1) > 1e-8:
            raise ValidationError(f"table violates the 2-cocycle condition at {(i, j, k)}")


def build_cocycle_mpu(**params) -> Model:
    _reject_unknown(params, ("d", "group", "theta"))
    if "group" in params or "theta" in params:
        if not ("group" in params and "theta" in params):
            raise ValidationError("custom cocycle models need both 'group' and 'theta'")
        G = params["group"]
        if not isinstance(G, FiniteGroup):
            raise ValidationError("'group' must be a FiniteGroup")
        theta = np.asarray(params["theta"], dtype=float)
        label = "custom"
    else:
        d = _int_param(params, "d", 2, default=2)
        G, theta = zdzd_generator_cocycle(d)
        label = d
    if G.size > 12:
        raise ValidationError(f"cocycle models are limited to |G| <= 12, got {G.size}")
    validate_cocycle(G, theta)
    n = G.size
    A = np.zeros((n, n, n, n), dtype=complex)
    for i, b in product(range(n), repeat=2):
        A[i, i, i, b] = np.exp(-1j * theta[G.mul(G.inv(i), b), G.inv(b)])
    tensor = MpuTensor(A, elem_dim=n, sites=1)
    ph = np.zeros(n * n, dtype=complex)
    for gl, gr in product(range(n), repeat=2):
        ph[gl * n + gr] = np.exp(-1j * theta[G.mul(G.inv(gl), gr), G.inv(gr)])
    gate = np.diag(ph)
    sf = standard_form_from_gates(gate, gate.copy(), l=n, r=n, source=tensor)
    # the factor set of the left virtual action is e^{i theta} itself
    c = np.exp(1j * theta)
    inv = cocycle_invariant(G, c)
    spi: dict[int, float | None] = {g: None for g in G.elements()}
    spi[G.identity] = 0.0
    rind: dict[int, complex | None] = {g: None for g in G.elements()}
    if inv.is_trivial():
        rind[G.identity] = 1.0 + 0j
    expected = {
        "ind": 0.0,
        "spi": spi,
        "rind": rind,
        "cocycle_nontrivial": not inv.is_trivial(),
    }
    return Model(
        name="cocycle-mpu",
        params={"d": label} if label != "custom" else {"group": "custom", "theta": "custom"},
        group=G,
        rep=regular_representation(G),
        sf=sf,
        tensor=tensor,
        expected=expected,
        notes="diagonal phases on the group algebra; carries the class of e^{i theta}",
    )


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class ModelInfo:
    builder: Callable[..., Model]
    params_help: str
    description: str


REGISTRY: dict[str, ModelInfo] = {
    "identity": ModelInfo(build_identity, "d>=2 (default 2)", "does nothing; all labels trivial"),
    "shift": ModelInfo(build_shift, "d>=2 (default 2)", "translation by one site, chiral index log d"),
    "bilayer-swap": ModelInfo(
        build_bilayer_swap, "n>=2 (required)", "counter-propagating qubit layers with a Z_n clock"
    ),
    "zdzd-spt": ModelInfo(
        build_zdzd_spt, "d>=2 (default 2)", "clock-pair SPT circuit, nontrivial cohomology class"
    ),
    "zdzd-floquet-perturbed": ModelInfo(
        build_zdzd_floquet_perturbed,
        "d>=2 (default 2), h (default 0.1)",
        "SPT circuit followed by a symmetric on-site kick",
    ),
    "cocycle-mpu": ModelInfo(
        build_cocycle_mpu,
        "d>=2 (default 2); or group=FiniteGroup, theta=table",
        "group-algebra MPU carrying the class of a chosen 2-cocycle",
    ),
    "z3-refined": ModelInfo(
        build_z3_refined, "(none)", "qutrit model whose refined index distinguishes it"
    ),
    "z2-d8": ModelInfo(build_z2_d8, "(none)", "three-qubit sites with spi = log 2"),
}


def instantiate(name: str, **params) -> Model:
    if name not in REGISTRY:
        known = ", ".join(sorted(REGISTRY))
        raise ValidationError(f"unknown model {name!r}; available: {known}")
    return REGISTRY[name].builder(**params)


def available_models() -> list[tuple[str, str, str]]:
    return [(name, info.params_help, info.description) for name, info in sorted(REGISTRY.items())]
