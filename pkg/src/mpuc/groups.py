"""Finite groups, (projective) representations, and 2-cocycle machinery.

Groups are concrete multiplication tables with elements addressed by
integer index (identity first for the built-in constructors).  Projective
representations carry their factor set c(g,h) defined through

    rep_g rep_h = c(g, h) rep_{g h}.

The cohomology data shipped around the toolkit is (a) the commuting-pair
phase table c(g,h)/c(h,g), a gauge-free invariant that is complete for
abelian groups, and (b) exact coboundary tests performed on root-of-unity
exponents with integer linear algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd

import numpy as np

from .conventions import TOL
from .errors import NumericalError, ValidationError
from .numerics import Array, dagger, hs_inner, polar_unitary, snap_to_root_of_unity


class FiniteGroup:
    """A finite group given by its multiplication table.

    ``mul[a, b]`` is the index of the product (element a) * (element b).
    """

    def __init__(self, mul: np.ndarray, labels: list[str] | None = None):
        mul = np.asarray(mul, dtype=int)
        n = mul.shape[0]
        if mul.shape != (n, n):
            raise ValidationError(f"multiplication table must be square, got {mul.shape}")
        if mul.min() < 0 or mul.max() >= n:
            raise ValidationError("multiplication table entries out of range")
        # locate the two-sided identity
        ident = None
        for e in range(n):
            if np.array_equal(mul[e], np.arange(n)) and np.array_equal(mul[:, e], np.arange(n)):
                ident = e
                break
        if ident is None:
            raise ValidationError("multiplication table has no identity element")
        # every element needs an inverse; associativity is spot-checked
        inv = np.full(n, -1, dtype=int)
        for a in range(n):
            hits = np.flatnonzero(mul[a] == ident)
            if hits.size != 1 or mul[hits[0], a] != ident:
                raise ValidationError(f"element {a} has no two-sided inverse")
            inv[a] = hits[0]
        rng = np.random.default_rng(0)
        for _ in range(min(64, n**3)):
            a, b, c = rng.integers(0, n, size=3)
            if mul[mul[a, b], c] != mul[a, mul[b, c]]:
                raise ValidationError("multiplication table is not associative")
        self.mul_table = mul
        self.size = n
        self.identity = int(ident)
        self.inv_table = inv
        self.labels = labels if labels is not None else [f"g{k}" for k in range(n)]
        if len(self.labels) != n:
            raise ValidationError("labels length does not match group size")

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inv_table[a])

    def commutes(self, a: int, b: int) -> bool:
        return self.mul(a, b) == self.mul(b, a)

    def elements(self) -> range:
        return range(self.size)

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def is_abelian(self) -> bool:
        return np.array_equal(self.mul_table, self.mul_table.T)

    def centralizer(self, g: int) -> list[int]:
        return [h for h in self.elements() if self.commutes(g, h)]

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteGroup) and np.array_equal(
            self.mul_table, other.mul_table
        )

    def __repr__(self) -> str:
        return f"FiniteGroup(n={self.size})"


def product_cyclic(orders: list[int]) -> FiniteGroup:
    """Direct product of cyclic groups Z_{n1} x Z_{n2} x ... (identity = 0).

    Elements are mixed-radix tuples flattened row-major, labelled e.g.
    "(1,0)"; a single factor is labelled "0", "1", ...
    """
    orders = [int(n) for n in orders]
    if not orders or any(n < 1 for n in orders):
        raise ValidationError(f"cyclic orders must be positive, got {orders}")
    tuples = list(itertools.product(*[range(n) for n in orders]))
    index = {t: k for k, t in enumerate(tuples)}
    n = len(tuples)
    mul = np.zeros((n, n), dtype=int)
    for a, ta in enumerate(tuples):
        for b, tb in enumerate(tuples):
            mul[a, b] = index[tuple((x + y) % m for x, y, m in zip(ta, tb, orders))]
    if len(orders) == 1:
        labels = [str(t[0]) for t in tuples]
    else:
        labels = [str(t).replace(" ", "") for t in tuples]
    G = FiniteGroup(mul, labels)
    G.cyclic_orders = orders  # type: ignore[attr-defined]
    G.element_tuples = tuples  # type: ignore[attr-defined]
    return G


def cyclic_tuple(G: FiniteGroup, idx: int) -> tuple[int, ...]:
    if not hasattr(G, "element_tuples"):
        raise ValidationError("group was not built by product_cyclic")
    return G.element_tuples[idx]  # type: ignore[attr-defined]


def cyclic_index(G: FiniteGroup, t: tuple[int, ...]) -> int:
    orders = G.cyclic_orders  # type: ignore[attr-defined]
    t = tuple(x % n for x, n in zip(t, orders))
    return G.element_tuples.index(t)  # type: ignore[attr-defined]


class Representation:
    """A (possibly projective) unitary representation as a matrix stack."""

    def __init__(self, group: FiniteGroup, matrices: np.ndarray, check: bool = True):
        matrices = np.asarray(matrices, dtype=complex)
        if matrices.shape[0] != group.size or matrices.shape[1] != matrices.shape[2]:
            raise ValidationError(f"bad representation shape {matrices.shape}")
        self.group = group
        self.mats = matrices
        self.dim = matrices.shape[1]
        if check:
            for g in group.elements():
                err = np.abs(matrices[g] @ dagger(matrices[g]) - np.eye(self.dim)).max()
                if err > 1e-8:
                    raise ValidationError(f"representation matrix {g} not unitary ({err:.2e})")

    def __getitem__(self, g: int) -> Array:
        return self.mats[g]

    def characters(self) -> Array:
        return np.einsum("gii->g", self.mats)

    def is_linear(self, tol: float = 1e-9) -> bool:
        G = self.group
        for g in G.elements():
            for h in G.elements():
                if np.abs(self.mats[g] @ self.mats[h] - self.mats[G.mul(g, h)]).max() > tol:
                    return False
        return True

    def factor_set(self, tol: float = 1e-8) -> Array:
        """c(g,h) with rep_g rep_h = c(g,h) rep_{gh}; raises if not projective."""
        G = self.group
        c = np.zeros((G.size, G.size), dtype=complex)
        for g in G.elements():
            for h in G.elements():
                prod = self.mats[g] @ self.mats[h]
                target = self.mats[G.mul(g, h)]
                lam = hs_inner(target, prod) / self.dim
                if abs(abs(lam) - 1) > tol or np.abs(prod - lam * target).max() > tol:
                    raise NumericalError(
                        f"matrices at ({g},{h}) are not projectively multiplicative"
                    )
                c[g, h] = lam
        return c

    def tensor(self, other: "Representation") -> "Representation":
        if other.group is not self.group and other.group != self.group:
            raise ValidationError("tensor product needs a common group")
        mats = np.stack([np.kron(self.mats[g], other.mats[g]) for g in self.group.elements()])
        return Representation(self.group, mats, check=False)

    def direct_sum(self, other: "Representation") -> "Representation":
        if other.group is not self.group and other.group != self.group:
            raise ValidationError("direct sum needs a common group")
        d1, d2 = self.dim, other.dim
        mats = np.zeros((self.group.size, d1 + d2, d1 + d2), dtype=complex)
        mats[:, :d1, :d1] = self.mats
        mats[:, d1:, d1:] = other.mats
        return Representation(self.group, mats, check=False)

    def conjugate(self) -> "Representation":
        return Representation(self.group, self.mats.conj(), check=False)


def trivial_representation(G: FiniteGroup, dim: int = 1) -> Representation:
    return Representation(G, np.stack([np.eye(dim, dtype=complex)] * G.size), check=False)


def regular_representation(G: FiniteGroup) -> Representation:
    """Left regular representation: rho_g |h> = |g h>."""
    mats = np.zeros((G.size, G.size, G.size), dtype=complex)
    for g in G.elements():
        for h in G.elements():
            mats[g, G.mul(g, h), h] = 1.0
    return Representation(G, mats, check=False)


def abelian_character(G: FiniteGroup, j: tuple[int, ...]) -> Array:
    """Character vector of the 1D irrep labelled j for a product_cyclic group."""
    orders = G.cyclic_orders  # type: ignore[attr-defined]
    chi = np.ones(G.size, dtype=complex)
    for g in G.elements():
        t = cyclic_tuple(G, g)
        chi[g] = np.exp(2j * np.pi * sum(ji * ti / ni for ji, ti, ni in zip(j, t, orders)))
    return chi


def all_1d_characters(G: FiniteGroup) -> list[tuple[tuple[int, ...], Array]]:
    orders = G.cyclic_orders  # type: ignore[attr-defined]
    out = []
    for j in itertools.product(*[range(n) for n in orders]):
        out.append((j, abelian_character(G, j)))
    return out


def character_representation(G: FiniteGroup, j: tuple[int, ...]) -> Representation:
    chi = abelian_character(G, j)
    return Representation(G, chi.reshape(-1, 1, 1).astype(complex), check=False)


# ---------------------------------------------------------------------------
# cocycle machinery


@dataclass(eq=False)
class CocycleInvariant:
    """Commuting-pair phase table of a factor set, snapped to roots of unity.

    ``order`` is |G|; ``exponents[(g, h)] = k`` means
    c(g,h)/c(h,g) = exp(2 pi i k / order).  Only commuting pairs appear.
    Complete invariant of the cohomology class for abelian groups.
    """

    order: int
    exponents: dict[tuple[int, int], int]

    def is_trivial(self) -> bool:
        return all(k == 0 for k in self.exponents.values())

    def phase(self, g: int, h: int) -> complex:
        return np.exp(2j * np.pi * self.exponents[(g, h)] / self.order)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CocycleInvariant)
            and self.order == other.order
            and self.exponents == other.exponents
        )


def cocycle_invariant(G: FiniteGroup, c: Array) -> CocycleInvariant:
    exps: dict[tuple[int, int], int] = {}
    for g in G.elements():
        for h in G.elements():
            if G.commutes(g, h):
                ratio = c[g, h] / c[h, g]
                exps[(g, h)] = snap_to_root_of_unity(ratio, G.size, TOL.phase_snap)
    return CocycleInvariant(order=G.size, exponents=exps)


def _smith_normal_form(A: list[list[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return (U, D, V) with U A V = D diagonal, U, V unimodular (exact ints)."""
    m = len(A)
    n = len(A[0]) if m else 0
    D = [row[:] for row in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in range(m):
            D[r][i], D[r][j] = D[r][j], D[r][i]
        for r in range(n):
            V[r][i], V[r][j] = V[r][j], V[r][i]

    def add_row(src, dst, k):  # row[dst] += k*row[src]
        for c in range(n):
            D[dst][c] += k * D[src][c]
        for c in range(m):
            U[dst][c] += k * U[src][c]

    def add_col(src, dst, k):
        for r in range(m):
            D[r][dst] += k * D[r][src]
        for r in range(n):
            V[r][dst] += k * V[r][src]

    t = 0
    while t < min(m, n):
        # find pivot: smallest nonzero |entry| in D[t:, t:]
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] != 0 and (piv is None or abs(D[i][j]) < abs(D[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                q = D[i][t] // D[t][t]
                if q:
                    add_row(t, i, -q)
                if D[i][t] != 0:  # remainder smaller than pivot: swap and redo
                    swap_rows(t, i)
                    done = False
                    break
            if not done:
                continue
            for j in range(t + 1, n):
                q = D[t][j] // D[t][t]
                if q:
                    add_col(t, j, -q)
                if D[t][j] != 0:
                    swap_cols(t, j)
                    done = False
                    break
        if D[t][t] < 0:
            add_row(t, t, -2)  # negate row via U
            # add_row with k=-2 on itself gives row *= -1
        t += 1
    # divisibility chain is not needed for solving linear systems; skip it.
    return U, D, V


def solve_mod(A: list[list[int]], r: list[int], N: int) -> list[int] | None:
    """Solve A x = r (mod N) over integers; return one solution or None."""
    m = len(A)
    n = len(A[0]) if m else 0
    U, D, V = _smith_normal_form(A)
    # transform rhs: D y = U r (mod N), x = V y
    Ur = [sum(U[i][k] * r[k] for k in range(m)) % N for i in range(m)]
    y = [0] * n
    for i in range(m):
        d = D[i][i] if i < n else 0
        rhs = Ur[i] % N
        if d == 0:
            if rhs % N != 0:
                return None
            continue
        g = gcd(d % N if d % N else N, N)
        if rhs % g != 0:
            return None
        # solve d * y ≡ rhs (mod N)
        d_, rhs_, N_ = (d % N) // g, rhs // g, N // g
        y[i] = (rhs_ * pow(d_, -1, N_)) % N_ if N_ > 1 else 0
    x = [sum(V[i][k] * y[k] for k in range(n)) % N for i in range(n)]
    return x


def phase_exponent_table(G: FiniteGroup, c: Array, order: int) -> np.ndarray:
    """Snap a factor set to exponents of order-th roots of unity."""
    exps = np.zeros((G.size, G.size), dtype=int)
    for g in G.elements():
        for h in G.elements():
            exps[g, h] = snap_to_root_of_unity(c[g, h], order, TOL.phase_snap)
    return exps


def coboundary_equivalent(G: FiniteGroup, c1: Array, c2: Array) -> bool:
    """Whether two factor sets differ by a coboundary beta(g)beta(h)/beta(gh).

    Both factor sets are snapped to |G|^2-th roots of unity and the
    1-cochain is found (or ruled out) exactly as an integer linear system
    modulo |G|^2.
    """
    N = G.size**2
    t1 = phase_exponent_table(G, c1, N)
    t2 = phase_exponent_table(G, c2, N)
    ratio = (t1 - t2) % N
    rows: list[list[int]] = []
    rhs: list[int] = []
    for g in G.elements():
        for h in G.elements():
            row = [0] * G.size
            row[g] += 1
            row[h] += 1
            row[G.mul(g, h)] -= 1
            rows.append(row)
            rhs.append(int(ratio[g, h]))
    return solve_mod(rows, rhs, N) is not None


def lift_to_linear(rep: Representation) -> Representation:
    """Rescale a projective rep with coboundary factor set to a linear one.

    Raises NumericalError when the factor set is cohomologically
    nontrivial.  The residual 1D-character freedom of the lift is left
    as-is (any choice differs by a character of G).
    """
    G = rep.group
    c = rep.factor_set()
    N = G.size**2
    t = phase_exponent_table(G, c, N)
    rows: list[list[int]] = []
    rhs: list[int] = []
    for g in G.elements():
        for h in G.elements():
            row = [0] * G.size
            row[g] += 1
            row[h] += 1
            row[G.mul(g, h)] -= 1
            rows.append(row)
            rhs.append(int(t[g, h]))
    b = solve_mod(rows, rhs, N)
    if b is None:
        raise NumericalError("factor set is not a coboundary; no linear lift exists")
    # c(g,h) = beta_g beta_h / beta_gh with beta_g = w^b_g  =>  alpha = 1/beta
    alphas = np.exp(-2j * np.pi * np.array(b) / N)
    lifted = Representation(G, rep.mats * alphas[:, None, None], check=False)
    if not lifted.is_linear(tol=1e-8):
        raise NumericalError("linear lift failed verification")
    return lifted


def is_c_regular(G: FiniteGroup, c: Array, g: int, tol: float = 1e-8) -> bool:
    """g is c-regular iff c(g,h) = c(h,g) for every h commuting with g."""
    return all(
        abs(c[g, h] - c[h, g]) <= tol for h in G.elements() if G.commutes(g, h)
    )


def find_intertwiner(
    repA: Representation, repB: Representation, seed: int = 0, attempts: int = 8
) -> Array:
    """Unitary W with repA_g W = W repB_g for all g (group-averaged seed).

    Works for linear representations; raises NumericalError when the
    representations are not unitarily equivalent (character mismatch or a
    persistently singular average).
    """
    G = repA.group
    if repA.dim != repB.dim:
        raise NumericalError("intertwiner: dimension mismatch")
    chiA, chiB = repA.characters(), repB.characters()
    if np.abs(chiA - chiB).max() > 1e-7:
        raise NumericalError("intertwiner: characters differ, reps not equivalent")
    d = repA.dim
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        S = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        W0 = sum(repA[g] @ S @ dagger(repB[g]) for g in G.elements()) / G.size
        s = np.linalg.svd(W0, compute_uv=False)
        if s[-1] < 1e-10 * max(s[0], 1e-30):
            continue  # unlucky seed hit a singular average
        W = polar_unitary(W0)
        err = max(
            np.abs(repA[g] @ W - W @ repB[g]).max() for g in G.elements()
        )
        if err < 1e-9:
            return W
    raise NumericalError("no unitary intertwiner found (reps likely inequivalent)")
