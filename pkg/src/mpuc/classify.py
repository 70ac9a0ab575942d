"""Topological labels of symmetric matrix-product unitaries.

A symmetric MPU carries an on-site group action that the ring operator
commutes with.  Pushing that action through the two-layer gate form splits
it into virtual operators x_g (left leg) and y_g (right leg); a third
operator z_g acts on the tensor's bond.  From these the module computes

  * the chiral index ind = (1/2) log(r/l),
  * symmetry-protected indices ind_g = (1/2) log|Tr y_g / Tr x_g|,
  * refined (complex) indices from a linear lift of y,
  * the cohomology class of the x factor set,

and cross-checks ind_g along three independent routes (virtual traces,
edge operators, bond-channel fixed points) plus a swap-test interferometer.
A homotopy constructor contracts index-zero, class-trivial MPUs to the
identity through symmetric gates, after padding with regular-representation
ancillas.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.linalg

from .conventions import TOL
from .errors import NumericalError, ObstructionError, ValidationError
from .groups import (
    CocycleInvariant,
    FiniteGroup,
    Representation,
    all_1d_characters,
    cocycle_invariant,
    find_intertwiner,
    lift_to_linear,
    regular_representation,
)
from .mpu import (
    MAX_SITE_POWER,
    MpuTensor,
    StandardForm,
    apply_local_operator,
    apply_to_state,
    brickwork_apply,
    brickwork_unitary,
    build_full_unitary,
    dense_ring_feasible,
)
from .numerics import (
    Array,
    assert_unitary,
    dagger,
    gauge_fix_phase,
    hs_inner,
    kron_all,
    operator_schmidt,
    polar_unitary,
    unitary_log,
)

_DENSE_RING = 1 << 10       # largest ring operator compared densely here
_STATES = 3                 # stochastic probes per ring check
MAX_INTERFEROMETRY_BOND = 6  # transfer contraction is O(L * bond^8)


# ---------------------------------------------------------------------------
# symmetric MPU container


@dataclass
class SymmetricMpu:
    """An MPU together with an on-site symmetry it commutes with.

    ``rep`` acts on one standard-form site (dim m).  ``tensor`` is optional;
    when present its site is either one standard-form site or a cell of two
    (the latter happens for gate-built models), and the per-tensor-site
    action is ``rep`` or ``rep ⊗ rep`` accordingly.
    """

    sf: StandardForm
    group: FiniteGroup
    rep: Representation
    tensor: MpuTensor | None = None
    check: bool = True

    def __post_init__(self):
        if self.rep.group.size != self.group.size:
            raise ValidationError("representation group does not match")
        if self.rep.dim != self.sf.m:
            raise ValidationError(
                f"rep dim {self.rep.dim} != standard-form site {self.sf.m}"
            )
        if self.tensor is not None and self.tensor.site_dim not in (
            self.sf.m,
            self.sf.m**2,
        ):
            raise ValidationError("tensor site is neither one sf site nor a cell")
        if self.check:
            worst, g = symmetry_violation(self)
            if worst > TOL.symmetry:
                raise NumericalError(
                    f"asymmetric MPU: element {g} has commutator norm {worst:.3e}"
                )

    @property
    def tensor_rep(self) -> Representation:
        if self.tensor is None:
            raise ValidationError("no tensor form attached")
        if self.tensor.site_dim == self.sf.m:
            return self.rep
        return self.rep.tensor(self.rep)


def from_model(model) -> SymmetricMpu:
    """SymmetricMpu view of a model-zoo entry (anything with sf/group/rep/tensor)."""
    return SymmetricMpu(
        sf=model.sf, group=model.group, rep=model.rep, tensor=model.tensor
    )


def _ring_commutator(U_apply, R_ops: list[Array], dim: int, m: int, L: int,
                     rng: np.random.Generator) -> float:
    """max |R U psi - U R psi| over a few random states (R = ⊗ R_ops)."""
    worst = 0.0
    for _ in range(_STATES):
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        a = U_apply(psi)
        for s, op in enumerate(R_ops):
            a = apply_local_operator(a, op, (s,), m, L)
        b = psi
        for s, op in enumerate(R_ops):
            b = apply_local_operator(b, op, (s,), m, L)
        b = U_apply(b)
        worst = max(worst, float(np.abs(a - b).max()))
    return worst


def symmetry_violation(s: SymmetricMpu) -> tuple[float, int]:
    """Worst commutator norm of the on-site action with small ring operators.

    Brickwork rings with 1 and 2 cells are always checked; when a tensor is
    attached, rings of 2 and 3 tensor sites are checked as well (odd site
    counts only exist at the tensor level).  Dense comparison below a size
    cutoff, random states above it.
    """
    rng = np.random.default_rng(23)
    worst, worst_g = 0.0, 0
    for g in s.group.elements():
        resid = 0.0
        for N in (1, 2):
            L, m = 2 * N, s.sf.m
            dim = m**L
            if dim <= _DENSE_RING:
                U = brickwork_unitary(s.sf, N)
                R = kron_all([s.rep[g]] * L)
                resid = max(resid, float(np.abs(R @ U - U @ R).max()))
            else:
                resid = max(
                    resid,
                    _ring_commutator(
                        lambda p: brickwork_apply(s.sf, p, N),
                        [s.rep[g]] * L, dim, m, L, rng,
                    ),
                )
        if s.tensor is not None:
            A, rho = s.tensor, s.tensor_rep
            for L in (2, 3):
                dim = A.site_dim**L
                if dim > MAX_SITE_POWER:
                    continue
                if dim <= _DENSE_RING and dense_ring_feasible(A, L):
                    U = build_full_unitary(A, L)
                    R = kron_all([rho[g]] * L)
                    resid = max(resid, float(np.abs(R @ U - U @ R).max()))
                else:
                    resid = max(
                        resid,
                        _ring_commutator(
                            lambda p: apply_to_state(A, p, L),
                            [rho[g]] * L, dim, A.site_dim, L, rng,
                        ),
                    )
        if resid > worst:
            worst, worst_g = resid, g
    return worst, worst_g


def verify_symmetry(s: SymmetricMpu) -> bool:
    """True iff every group element commutes with the small ring operators."""
    worst, _ = symmetry_violation(s)
    return worst <= TOL.symmetry


# ---------------------------------------------------------------------------
# virtual symmetry operators


@dataclass
class VirtualSymmetry:
    """Projective actions on the virtual legs, in a fixed phase gauge.

    The gate relation is u (rho_g ⊗ rho_g) u† = x_g ⊗ y_g.  The phase of
    x_g makes its first nonzero entry (row-major) real positive and y_g
    absorbs the conjugate phase, so the product is gauge-free.  z_g (bond
    action of the tensor form, when available) satisfies
    rho_g 𝒰 rho_g† = z_g† 𝒰 z_g and shares the cocycle class of x.
    """

    x: Representation
    y: Representation
    site_rep: Representation
    z: Representation | None = None
    gauge_note: str = (
        "u-side relation; x_g first nonzero entry real positive, y_g carries "
        "the conjugate phase; v-side relation holds with the inverse factor set"
    )

    def characters(self) -> Array:
        return self.site_rep.characters()


def extract_xy(s: SymmetricMpu) -> VirtualSymmetry:
    """Split u (rho_g ⊗ rho_g) u† into x_g ⊗ y_g across the virtual legs."""
    sf = s.sf
    l, r = sf.l, sf.r
    xs = np.empty((s.group.size, l, l), dtype=complex)
    ys = np.empty((s.group.size, r, r), dtype=complex)
    for g in s.group.elements():
        R2 = np.kron(s.rep[g], s.rep[g])
        w = sf.u @ R2 @ dagger(sf.u)
        sing, A, _ = operator_schmidt(w, (l, r))
        if sing.size != 1:
            raise NumericalError(
                f"virtual action of element {g} is not a product across l|r "
                f"(operator Schmidt values {sing[:4]})"
            )
        x = gauge_fix_phase(polar_unitary(A[0]))
        # y from the overlap; unitarity then certifies the rank-1 split
        y = np.einsum("ab,acbd->cd", x.conj(), w.reshape(l, r, l, r)) / l
        assert_unitary(x, tol=1e-8, what=f"x[{g}]")
        assert_unitary(y, tol=1e-8, what=f"y[{g}]")
        if np.abs(np.kron(x, y) - w).max() > 1e-8:
            raise NumericalError(f"x ⊗ y does not reproduce the virtual action ({g})")
        xs[g], ys[g] = x, y
    vs = VirtualSymmetry(
        x=Representation(s.group, xs, check=False),
        y=Representation(s.group, ys, check=False),
        site_rep=s.rep,
    )
    cx, cy = vs.x.factor_set(), vs.y.factor_set()
    if np.abs(cx * cy - 1.0).max() > 1e-8:
        raise NumericalError("x and y factor sets are not inverse to each other")
    return vs


def extract_z(s: SymmetricMpu) -> Representation:
    """Bond action z_g of the tensor form: rho_g 𝒰 rho_g† = z_g† 𝒰 z_g.

    z_g spans the unique magnitude-one eigenvector of the mixed transfer
    map M_g(X) = (1/m) Σ (rho_g)_{ii'} (rho_g*)_{jj'} 𝒰_{i'j'} X 𝒰_{ij}†.
    A leading modulus strictly below one means the symmetry is broken on
    the virtual level.
    """
    if s.tensor is None:
        raise ValidationError("extract_z needs the tensor form")
    A, rho = s.tensor, s.tensor_rep
    m, D = A.site_dim, A.bond
    zs = np.empty((s.group.size, D, D), dtype=complex)
    for g in s.group.elements():
        S = np.einsum(
            "iI,jJ,IJab,ijcd->acbd",
            rho[g], rho[g].conj(), A.T, A.T.conj(), optimize=True,
        ).reshape(D * D, D * D) / m
        vals, vecs = np.linalg.eig(S)
        order = np.argsort(-np.abs(vals))
        vals, vecs = vals[order], vecs[:, order]
        if abs(vals[0]) < 1.0 - 1e-8:
            raise NumericalError(
                f"symmetry broken on the virtual level: element {g} has "
                f"leading mixed-transfer modulus {abs(vals[0]):.12f}"
            )
        if vals.size > 1 and abs(vals[1]) > 1.0 - TOL.fixed_point_gap:
            raise NumericalError(
                f"mixed transfer of element {g} has a degenerate leading space"
            )
        # eigenvector is z_g† up to scale and phase
        z = gauge_fix_phase(dagger(polar_unitary(vecs[:, 0].reshape(D, D))))
        lhs = np.einsum("iI,IJab,jJ->ijab", rho[g], A.T, rho[g].conj())
        rhs = np.einsum("ax,ijxy,yb->ijab", dagger(z), A.T, z)
        resid = float(np.abs(lhs - rhs).max())
        if resid > 1e-8:
            raise NumericalError(
                f"bond action of element {g} fails its defining relation "
                f"(residual {resid:.2e})"
            )
        zs[g] = z
    return Representation(s.group, zs, check=False)


# ---------------------------------------------------------------------------
# indices along the trace route


def spi(vs: VirtualSymmetry, g: int) -> float | None:
    """ind_g = (1/2) log|Tr y_g / Tr x_g|; None where the character vanishes."""
    chi = vs.characters()[g]
    if abs(chi) <= TOL.char_zero:
        return None
    tx = np.trace(vs.x[g])
    ty = np.trace(vs.y[g])
    # Tr x * Tr y = chi^2, so a vanishing factor here means broken extraction
    if min(abs(tx), abs(ty)) < 1e-12:
        raise NumericalError(f"virtual trace vanished at element {g} despite chi != 0")
    return float(0.5 * np.log(abs(ty / tx)))


def refined_spi(vs: VirtualSymmetry, g: int) -> complex | None:
    """(Tr y_g / chi_g)^order(g) computed from a linear lift of y.

    Requires a cohomologically trivial factor set; the power kills the
    lift's residual one-dimensional-character freedom, which is verified
    by redressing with explicit characters.
    """
    chi = vs.characters()[g]
    if abs(chi) <= TOL.char_zero:
        return None
    try:
        ylin = lift_to_linear(vs.y)
    except NumericalError as exc:
        raise NumericalError(
            "refined index not defined: cohomology class is nontrivial"
        ) from exc
    G = vs.y.group
    d_g = G.element_order(g)
    val = complex((np.trace(ylin[g]) / chi) ** d_g)
    for _, char in all_1d_characters(G)[:3]:
        redressed = complex((char[g] * np.trace(ylin[g]) / chi) ** d_g)
        if abs(redressed - val) > 1e-9:
            raise NumericalError("refined index depends on the character redress")
    return val


# ---------------------------------------------------------------------------
# edge-operator route


def edge_operators(sf: StandardForm, vs: VirtualSymmetry, g: int) -> tuple[Array, Array]:
    """(L_g, R_g) = (u†(x_e ⊗ y_g)u, u†(x_g ⊗ y_e)u): the string-edge dressings."""
    x_e = np.eye(sf.l, dtype=complex)
    y_e = np.eye(sf.r, dtype=complex)
    L = dagger(sf.u) @ np.kron(x_e, vs.y[g]) @ sf.u
    R = dagger(sf.u) @ np.kron(vs.x[g], y_e) @ sf.u
    assert_unitary(L, tol=1e-9, what="left edge operator")
    assert_unitary(R, tol=1e-9, what="right edge operator")
    chi = vs.characters()[g]
    prod = np.trace(L) * np.trace(R)
    target = sf.m**2 * chi**2
    if abs(prod - target) > 1e-7 * max(abs(target), sf.m**2 * 1e-4):
        raise NumericalError(
            f"edge trace product {prod:.6e} != m^2 chi^2 = {target:.6e} at {g}"
        )
    return L, R


def edge_route_spi(sf: StandardForm, vs: VirtualSymmetry, g: int) -> float | None:
    """ind_g from edge traces: ind + (1/2) log|Tr L_g / Tr R_g|."""
    chi = vs.characters()[g]
    if abs(chi) <= TOL.char_zero:
        return None
    L, R = edge_operators(sf, vs, g)
    return float(sf.index + 0.5 * np.log(abs(np.trace(L) / np.trace(R))))


def _split_half_covered_v(sf: StandardForm, rho: Array) -> tuple[Array, Array]:
    """v†(rho ⊗ 1)v = Q_A ⊗ Q_B across the (r, l) legs of a v gate.

    This is the factorization a string edge needs when it stops on a cell
    boundary: the last site of the string covers only the first output of
    one v.  Rank above one breaks the edge locality and raises.
    """
    r, l, m = sf.r, sf.l, sf.m
    big = dagger(sf.v) @ np.kron(rho, np.eye(m, dtype=complex)) @ sf.v
    M = big.reshape(r, l, r, l).transpose(0, 2, 1, 3).reshape(r * r, l * l)
    u_, sv, vh_ = np.linalg.svd(M, full_matrices=False)
    if sv.size > 1 and sv[1] > 1e-8 * sv[0]:
        raise NumericalError(
            f"half-covered v gate does not split (second singular value "
            f"{sv[1]:.2e})"
        )
    QA = (u_[:, 0] * sv[0]).reshape(r, r)
    QB = vh_[0].reshape(l, l)
    return QA, QB


def string_evolution_check(
    s: SymmetricMpu, g: int, L: int, N: int, states: int = 4
) -> float:
    """Residual of (string of rho_g on N sites)·U = U·(factorized operator).

    Sites count standard-form sites and the string occupies sites 1..N, so
    its left end is always inside the u-cell (0,1), where the backward
    evolved operator carries L_g.  For even N the right end is inside a
    u-cell too and carries R_g on (N, N+1).  For odd N the string stops on
    a cell boundary; the half-covered v gate there splits as
    v†(rho ⊗ 1)v = Q_A ⊗ Q_B, and the boundary ends as u†(x_g ⊗ Q_A)u on
    (N-1, N) and u†(Q_B ⊗ 1)u on (N+1, N+2).  Needs L - N >= 2 (even N)
    or >= 3 (odd N).  A residual above 1e-7 raises.
    """
    sf = s.sf
    if L % 2 or N < 2 or L - N < 2 + (N % 2):
        raise ValidationError(
            "need even L, N >= 2, and L - N >= 2 (even N) or 3 (odd N)"
        )
    dim = sf.m**L
    if dim > MAX_SITE_POWER:
        raise ValidationError(f"ring dimension {sf.m}**{L} exceeds the state budget")
    vs = extract_xy(s)
    Lg, _ = edge_operators(sf, vs, g)
    rho = s.rep[g]
    if N % 2 == 0:
        _, Rg = edge_operators(sf, vs, g)
        pieces = [(Lg, (0, 1)), (Rg, (N, N + 1))]
        bulk = range(2, N)
    else:
        QA, QB = _split_half_covered_v(sf, rho)
        E1 = dagger(sf.u) @ np.kron(vs.x[g], QA) @ sf.u
        E2 = dagger(sf.u) @ np.kron(QB, np.eye(sf.r, dtype=complex)) @ sf.u
        pieces = [(Lg, (0, 1)), (E1, (N - 1, N)), (E2, (N + 1, N + 2))]
        bulk = range(2, N - 1)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(states):
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        # left side: apply U then the bare string
        lhs = brickwork_apply(sf, psi, L // 2)
        for site in range(1, N + 1):
            lhs = apply_local_operator(lhs, rho, (site,), sf.m, L)
        # right side: apply the factorized operator, then U
        rhs = psi
        for op, sites in pieces:
            rhs = apply_local_operator(rhs, op, sites, sf.m, L)
        for site in bulk:
            rhs = apply_local_operator(rhs, rho, (site,), sf.m, L)
        rhs = brickwork_apply(sf, rhs, L // 2)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    if worst > 1e-7:
        raise NumericalError(f"string factorization violated (residual {worst:.2e})")
    return worst


# ---------------------------------------------------------------------------
# bond-channel (fixed point) route


def _channel_fixed_point(S: Array, what: str) -> tuple[Array, Array]:
    """(right, left) unit fixed points of a transfer matrix, via null vectors
    of S - 1.  eig() is avoided on purpose: the rest of the spectrum of these
    channels is one large nilpotent block, which wrecks its eigenvectors.
    """
    DD = S.shape[0]
    u_, sv, vh = np.linalg.svd(S - np.eye(DD))
    if sv[-1] > 1e-8:
        raise NumericalError(
            f"{what} has no unit fixed point (residual {sv[-1]:.3e})"
        )
    if DD > 1 and sv[-2] <= 1e-8:
        raise NumericalError(f"{what} has a degenerate fixed point")
    return vh[-1].conj(), u_[:, -1].conj()


def _bond_intertwiner(T4: Array, rho_g: Array) -> Array:
    """Invertible Y with 𝒰_IJ Y = Y (ρ_g 𝒰 ρ_g†)_IJ over two blocked sites.

    A one-site solve can be under-determined when the tensor only becomes
    injective after blocking, so the least-squares kernel is assembled for
    the two-site equation; chaining Gram factors keeps every intermediate
    D² x D².  Scale is fixed by |det Y| = 1, the only choice stable under
    similarity (it continues the unitary-z normalization to gauges where no
    unitary solution exists).
    """
    D = T4.shape[2]
    B4 = np.einsum("iI,IJab,jJ->ijab", rho_g, T4, rho_g.conj(), optimize=True)
    cross = np.einsum(
        "ijxy,ijuv->yvxu", T4.conj(), B4, optimize=True
    ).reshape(D * D, D * D)
    own = np.einsum(
        "ijey,ijfw->ywef", T4.conj(), T4, optimize=True
    ).reshape(D * D, D * D)
    twin = np.einsum(
        "ijvf,ijug->vufg", B4.conj(), B4, optimize=True
    ).reshape(D * D, D * D)
    X = cross @ cross
    left_gram = np.einsum("yxcc->yx", (own @ own).reshape(D, D, D, D))
    right_gram = np.einsum("vucc->vu", (twin @ twin).reshape(D, D, D, D))
    K = np.kron(left_gram, np.eye(D)) + np.kron(np.eye(D), right_gram)
    K -= X + dagger(X)
    evals, evecs = np.linalg.eigh(K)
    scale = max(float(evals[-1]), 1.0)
    if evals[0] > 1e-8 * scale:
        raise NumericalError("no bond intertwiner (tensor not symmetric?)")
    if D > 1 and evals[1] < 1e-8 * scale:
        raise NumericalError("bond intertwiner not unique (tensor not normal?)")
    Y = evecs[:, 0].reshape(D, D)
    sign, logdet = np.linalg.slogdet(Y)
    if sign == 0:
        raise NumericalError("bond intertwiner is singular")
    return Y / np.exp(logdet / D)


def sigma_route(s: SymmetricMpu, g: int) -> float | None:
    """ind_g - ind from the rho_g-inserted bond channel's fixed point.

    E_g(X) = chi_g^{-1} Σ (rho_g)_{ii'} 𝒰_{i'j} X 𝒰_{ij}† has Tr E_g^N = 1
    for every ring length N (unitarity of the ring operator), hence a unique
    fixed point Σ_g.  Pairing it against the untwisted left fixed point W
    and the bond intertwiner Y,

        ind_g - ind = log |Tr(Wᵀ Σ_g) / Tr(Wᵀ Y Σ_g)|,

    every factor is similarity-covariant, so the value is gauge independent.
    In the gauge where both channel unitalities are flat this is the usual
    prescription: W = 1, Y = z_g unitary, and Σ_g is normalized by
    Tr(z_g Σ_g) = 1.  Some models (large-bond gate splits) admit no such
    gauge in any blocking, and only this covariant form ties their three
    routes together.  None when chi_g = 0.
    """
    if s.tensor is None:
        raise ValidationError("sigma route needs the tensor form")
    A, rho = s.tensor, s.tensor_rep
    D = A.bond
    chi = np.trace(rho[g])
    if abs(chi) <= TOL.char_zero:
        return None
    E = np.einsum(
        "ijab,ijcd->acbd", A.T, A.T.conj(), optimize=True
    ).reshape(D * D, D * D) / A.site_dim
    S = np.einsum(
        "iI,Ijab,ijcd->acbd", rho[g], A.T, A.T.conj(), optimize=True
    ).reshape(D * D, D * D) / chi
    _, w = _channel_fixed_point(E, "bond channel")
    sig, _ = _channel_fixed_point(S, f"inserted channel of element {g}")
    W = w.reshape(D, D)
    Sigma = sig.reshape(D, D)
    Y = _bond_intertwiner(A.T, rho[g])
    num = np.trace(W.T @ Sigma)
    den = np.trace(W.T @ Y @ Sigma)
    if abs(den) < 1e-10 or abs(num) < 1e-10:
        raise NumericalError(
            f"fixed point pairing degenerate at element {g} "
            f"(|num|={abs(num):.3e}, |den|={abs(den):.3e})"
        )
    return float(np.log(abs(num / den)))


# ---------------------------------------------------------------------------
# interferometric route


def interferometry(
    s: SymmetricMpu, g: int, k: int, vs: VirtualSymmetry | None = None
) -> float | None:
    """Swap-test signal <X> for a 2k-site window across the left string edge.

    <X> = Tr[W S W† S] / (d_A^2 d_B) with W the evolved string operator and
    S the swap between the window A and an equal ancilla copy.  The trace
    identity collapses to Tr_B[N N†] with N = Tr_A W, which contracts as a
    single transfer ring of bond D^4 -- no replicated state is ever built.
    Satisfies ind_g - ind = (1/2) log<X> + k log(d / |chi_g|); for the
    identity circuit <X> = (|chi_g| / d)^{2k}.  None where chi_g = 0.
    """
    if s.tensor is None:
        raise ValidationError("interferometry needs the tensor form")
    if k < 1:
        raise ValidationError("window half-width k must be >= 1")
    A, rho_rep = s.tensor, s.tensor_rep
    m, D = A.site_dim, A.bond
    if D > MAX_INTERFEROMETRY_BOND:
        raise ValidationError(
            f"bond dimension {D} exceeds the interferometry budget "
            f"({MAX_INTERFEROMETRY_BOND})"
        )
    rho = rho_rep[g]
    chi = complex(np.trace(rho))
    if abs(chi) <= TOL.char_zero:
        return None
    # geometry: string on sites 1..N, window A centered on the wall at 0|1
    N = k + 1 + ((k + 1) % 2)
    L = N + k + 4 + ((N + k) % 2)
    string = set(range(1, N + 1))
    window = {(1 - k + i) % L for i in range(2 * k)}
    eye = np.eye(m, dtype=complex)
    T = np.empty(0)
    transfer = None
    for site in range(L):
        O = rho if site in string else eye
        C = np.einsum(
            "IiAB,IJ,Jjab->ijAaBb", A.T.conj(), O, A.T, optimize=True
        ).reshape(m, m, D * D, D * D)
        if site in window:
            M = np.einsum("iiab->ab", C)
            E = np.kron(M, M.conj())
        else:
            E = np.einsum("ijab,ijcd->acbd", C, C.conj(), optimize=True).reshape(
                D**4, D**4
            )
        transfer = E if transfer is None else transfer @ E
    val = complex(np.trace(transfer))
    dA2_dB = float(m) ** (4 * k) * float(m) ** (L - 2 * k)
    X = val / dA2_dB
    if abs(X.imag) > 1e-9 * max(abs(X.real), 1e-12):
        raise NumericalError(f"swap signal has a stray imaginary part ({X:.3e})")
    X = float(X.real)
    if vs is not None:
        rel = spi(vs, g)
        if rel is not None:
            rel -= s.sf.index
            lhs = 0.5 * np.log(X) + k * np.log(m / abs(chi))
            if abs(lhs - rel) > 1e-6:
                raise NumericalError(
                    f"interferometric signal off by {abs(lhs - rel):.2e} at {g}"
                )
    return X


def interferometry_fit(
    s: SymmetricMpu, g: int, k_max: int = 3
) -> tuple[float, float]:
    """(slope, intercept) of (1/2) log<X> against the window half-width k.

    Exactly linear for a clean string factorization:
    slope = -log(d / |chi_g|) and intercept = ind_g - ind.
    """
    chi = abs(s.tensor_rep.characters()[g])
    ks = np.arange(1, k_max + 1, dtype=float)
    ys = []
    for k in range(1, k_max + 1):
        X = interferometry(s, g, k)
        if X is None:
            raise ValidationError("interferometry undefined: character vanishes")
        ys.append(0.5 * np.log(X))
    slope, intercept = np.polyfit(ks, np.array(ys), 1)
    return float(slope), float(intercept)


# ---------------------------------------------------------------------------
# report assembly


@dataclass
class ClassificationReport:
    ind: float
    spi: dict[int, float | None]
    rind: dict[int, complex | None]
    cocycle: CocycleInvariant
    routes: dict[str, dict[int, float | None]]
    lr_bound: float
    gauge_note: str = ""


def lr_lower_bound(report: ClassificationReport, rep: Representation) -> float:
    """max_g |ind_g| / log(d / |chi_g|): sites any implementation must couple."""
    chis = rep.characters()
    d = rep.dim
    best = 0.0
    for g, val in report.spi.items():
        if val is None or g == rep.group.identity:
            continue
        denom = np.log(d / abs(chis[g]))
        if denom < 1e-12:
            continue
        best = max(best, abs(val) / denom)
    return float(best)


def classify(s: SymmetricMpu) -> ClassificationReport:
    """Full label set with pairwise agreement of all defined routes."""
    ind = s.sf.index
    vs = extract_xy(s)
    coc = cocycle_invariant(s.group, vs.x.factor_set())
    spi_d: dict[int, float | None] = {}
    trace_route: dict[int, float | None] = {}
    edge_route: dict[int, float | None] = {}
    for g in s.group.elements():
        spi_d[g] = spi(vs, g)
        trace_route[g] = spi_d[g]
        edge_route[g] = edge_route_spi(s.sf, vs, g)
    rind_d: dict[int, complex | None] = {g: None for g in s.group.elements()}
    if coc.is_trivial():
        for g in s.group.elements():
            rind_d[g] = refined_spi(vs, g)
    sigma: dict[int, float | None] = {g: None for g in s.group.elements()}
    if s.tensor is not None:
        z = extract_z(s)
        vs.z = z
        z_coc = cocycle_invariant(s.group, z.factor_set())
        if z_coc != coc:
            raise NumericalError("bond action and x disagree on the cocycle class")
        for g in s.group.elements():
            rel = sigma_route(s, g)
            sigma[g] = None if rel is None else float(ind + rel)
    routes = {"trace": trace_route, "edge": edge_route, "sigma": sigma}
    for g in s.group.elements():
        defined = [
            (name, vals[g]) for name, vals in routes.items() if vals[g] is not None
        ]
        for (na, va), (nb, vb) in combinations(defined, 2):
            if abs(va - vb) > TOL.agreement:
                raise NumericalError(
                    f"route disagreement at element {g}: "
                    f"{na}={va:.12f} vs {nb}={vb:.12f}"
                )
    report = ClassificationReport(
        ind=float(ind),
        spi=spi_d,
        rind=rind_d,
        cocycle=coc,
        routes=routes,
        lr_bound=0.0,
        gauge_note=vs.gauge_note,
    )
    report.lr_bound = lr_lower_bound(report, s.rep)
    return report


# ---------------------------------------------------------------------------
# quantization of the indices


def quantized_spi_residual(vs: VirtualSymmetry, g: int) -> float | None:
    """Distance from ind_g to the nearest log(|Σ n_j ω^j| / |chi_g|).

    The y eigenvalues of a lift are order(g)-th roots of unity, so Tr y_g
    is a cyclotomic integer with coefficient sum r.  Enumerates all
    compositions of r into order(g) parts.
    """
    val = spi(vs, g)
    if val is None:
        return None
    G = vs.y.group
    d_g = G.element_order(g)
    r = vs.y.dim
    chi = abs(vs.characters()[g])
    omega = np.exp(2j * np.pi / d_g)
    best = np.inf
    # stars and bars: bars at positions b give counts n_j
    for bars in combinations(range(r + d_g - 1), d_g - 1):
        edges = (-1,) + bars + (r + d_g - 1,)
        n = [edges[j + 1] - edges[j] - 1 for j in range(d_g)]
        tot = abs(sum(nj * omega**j for j, nj in enumerate(n)))
        if tot < 1e-12:
            continue
        best = min(best, abs(val - np.log(tot / chi)))
    return float(best)


# ---------------------------------------------------------------------------
# homotopy to the identity


@dataclass
class HomotopyPath:
    """Sampled symmetric gate pairs joining a padded MPU to the identity."""

    lambdas: Array
    gates: list[StandardForm]
    rep: Representation  # on-site action of the padded models
    ancilla_dim: int


def pad_gates_with_ancilla(sf: StandardForm, n: int) -> StandardForm:
    """Same circuit on sites C^m ⊗ C^n with the ancillas untouched."""
    m, l, r = sf.m, sf.l, sf.r
    eye = np.eye(n, dtype=complex)
    u4 = sf.u.reshape(l, r, m, m)
    u = np.einsum("LRxy,ap,bq->LaRbxpyq", u4, eye, eye).reshape(
        l * n * r * n, (m * n) ** 2
    )
    v4 = sf.v.reshape(m, m, r, l)
    v = np.einsum("xyRL,ap,bq->xaybRpLq", v4, eye, eye).reshape(
        (m * n) ** 2, r * n * l * n
    )
    return StandardForm(
        u=u, v=v, l=l * n, r=r * n, m=m * n, k=1, elem_dim=m * n,
        residual=sf.residual,
    )


def homotopy_path(s: SymmetricMpu, samples: int = 11) -> HomotopyPath:
    """Symmetric contraction of an index-zero, class-trivial MPU to identity.

    Obstructions (nonzero index or nontrivial cocycle class) raise.  The
    construction lifts x and y to linear representations (conjugate phases
    cancel in x ⊗ y), pads each site with a regular-representation ancilla
    so both lifts become equivalent to the on-site action, rotates the
    gates by the intertwiners, and follows exp of the scaled gate
    logarithms.  Every emitted sample is itself verified symmetric.
    lambda = 0 is the (ancilla-padded) input circuit; lambda = 1 is the
    identity.
    """
    if samples < 2:
        raise ValidationError("need at least the two endpoint samples")
    sf = s.sf
    if abs(sf.index) > 1e-9:
        raise ObstructionError(
            "nonzero chiral index obstructs any contraction",
            {"ind": float(sf.index)},
        )
    vs = extract_xy(s)
    coc = cocycle_invariant(s.group, vs.x.factor_set())
    if not coc.is_trivial():
        raise ObstructionError(
            "nontrivial cohomology class obstructs a symmetric contraction",
            {"cocycle_order": coc.order, "cocycle": dict(coc.exponents)},
        )
    G = s.group
    xlin = lift_to_linear(vs.x)
    # push the conjugate lift phases onto y: keeps x_g ⊗ y_g and linearizes y
    alphas = np.array(
        [hs_inner(vs.x[g], xlin[g]) / vs.x.dim for g in G.elements()]
    )
    ylin = Representation(G, vs.y.mats / alphas[:, None, None], check=False)
    if not ylin.is_linear(tol=1e-8):
        raise NumericalError("y lift failed after phase transfer")
    reg = regular_representation(G)
    n = G.size
    site = s.rep.tensor(reg)          # rho ⊗ regular, dim m*n
    x_pad = xlin.tensor(reg)
    y_pad = ylin.tensor(reg)
    X = find_intertwiner(x_pad, site)  # x_pad = X site X†
    Y = find_intertwiner(y_pad, site)
    padded = pad_gates_with_ancilla(sf, n)
    u1 = np.kron(dagger(X), dagger(Y)) @ padded.u
    v1 = padded.v @ np.kron(Y, X)
    # both gates now commute with the padded on-site action
    for g in G.elements():
        R2 = np.kron(site[g], site[g])
        if max(
            np.abs(u1 @ R2 - R2 @ u1).max(), np.abs(v1 @ R2 - R2 @ v1).max()
        ) > 1e-8:
            raise NumericalError("gauged gates fail to commute with the padded action")
    hu = unitary_log(u1)
    hv = unitary_log(v1)
    lambdas = np.linspace(0.0, 1.0, samples)
    gates = []
    for lam in lambdas:
        u_l = scipy.linalg.expm(1j * (1.0 - lam) * hu)
        v_l = scipy.linalg.expm(1j * (1.0 - lam) * hv)
        sf_l = StandardForm(
            u=u_l, v=v_l, l=padded.l, r=padded.r, m=padded.m, k=1,
            elem_dim=padded.m,
        )
        # construction-time check certifies each sample is symmetric
        SymmetricMpu(sf=sf_l, group=G, rep=site)
        gates.append(sf_l)
    return HomotopyPath(lambdas=lambdas, gates=gates, rep=site, ancilla_dim=n)
