"""Index-order and tolerance conventions used across the package.

Every tensor-network translation in the package follows the rules below;
no other module may silently deviate.

Tensor legs
-----------
An MPU/MPO site tensor ``A`` is stored as ``A[i, j, a, b]`` with

* ``i`` — physical output (bra side of the generated operator),
* ``j`` — physical input (ket side),
* ``a`` — left virtual leg,
* ``b`` — right virtual leg.

The operator on a ring of ``L`` sites is

    U[L][(i1..iL), (j1..jL)] = Tr( A[i1,j1] A[i2,j2] ... A[iL,jL] )

where ``A[i,j]`` is the ``D x D`` matrix obtained by fixing the physical
legs, and matrices multiply left-to-right along the ring.

Composite physical indices are always row-major: a blocked site made of
``k`` elementary sites of dimension ``d`` uses the index
``i = i_1 * d^(k-1) + ... + i_k``  (numpy ``reshape`` order).

Brickwork gates
---------------
A two-layer brickwork on ``2N`` blocked sites (cells ``t = 0..N-1``, cell
``t`` = sites ``(2t, 2t+1)``) is given by

* ``u`` : ``C^m ⊗ C^m -> C^l ⊗ C^r``, stored as an ``(l*r, m*m)`` unitary
  matrix with row index ``(lam, rho)`` and column index ``(j1, j2)``,
* ``v`` : ``C^r ⊗ C^l -> C^m ⊗ C^m``, stored as ``(m*m, r*l)``,

and the ring operator is ``U = [prod_t v on (r_t, l_{t+1}) -> sites
(2t+1, 2t+2)] . [prod_t u on sites (2t, 2t+1)]``.  ``l*r == m*m`` always.

Symmetry
--------
For a global on-site representation ``rho`` the defining relation is
standardized on the u-side:

    u (rho_g ⊗ rho_g) u† = x_g ⊗ y_g

with ``x`` acting on ``C^l`` and ``y`` on ``C^r``.  The v-side relation
``(rho_g ⊗ rho_g) v = v (y_g ⊗ x_g)`` is a consequence and is verified,
never extracted independently.  Extracted ``x_g`` are gauge-fixed so that
the first nonzero entry (row-major scan) is real positive.

Complex numbers in JSON are ``[re, im]`` pairs.  Group elements are
referred to by their integer index into the multiplication table; reports
carry a legend block mapping indices to human-readable labels.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerance registry.

    ``agreement`` is the headline tolerance for cross-route index
    comparisons and may be overridden with the ``MPUC_TOL`` environment
    variable; the remaining entries are fixed properties of the algorithms
    (rank cutoffs, snapping windows, ...).
    """

    agreement: float = 1e-7      # cross-route / cross-model comparisons
    rank: float = 1e-8           # relative singular-value cutoff
    unitarity: float = 1e-9      # ||U U† - 1|| checks
    symmetry: float = 1e-9       # commutator residuals for verify_symmetry
    char_zero: float = 1e-8      # |Tr rho_g| below this => SPI undefined
    phase_snap: float = 1e-6     # distance to nearest root of unity
    degeneracy: float = 1e-7     # relative gap for spectrum grouping
    support: float = 1e-8        # membership in operator supports (relative)
    fixed_point: float = 1e-12   # power-iteration convergence
    fixed_point_gap: float = 1e-8  # 2nd transfer eigenvalue this close to 1 => degenerate


def tolerances() -> Tolerances:
    """Return the tolerance registry, honouring ``MPUC_TOL`` if set."""
    tol = Tolerances()
    env = os.environ.get("MPUC_TOL")
    if env is not None:
        try:
            val = float(env)
        except ValueError as exc:
            raise ValueError(f"MPUC_TOL must be a float, got {env!r}") from exc
        if not 0 < val < 1:
            raise ValueError(f"MPUC_TOL out of range (0,1): {val}")
        tol = replace(tol, agreement=val)
    return tol


# Module-level snapshot; CLI entry points re-read the environment themselves.
TOL = tolerances()
