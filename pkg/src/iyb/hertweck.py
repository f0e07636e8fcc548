"""The Heisenberg building block D and its distinguished automorphism group A.

For an odd prime q, D is the Heisenberg group mod q (the q-Sylow subgroup of
GL_2(q) up to isomorphism).  A = <tau, alpha1, alpha2> is generated by

    tau:    d1 -> d2,      d2 -> d1,      d3 -> d3^-1
    alpha1: d1 -> d1^zeta, d2 -> d2,      d3 -> d3^zeta
    alpha2: d1 -> d1,      d2 -> d2^zeta, d3 -> d3^zeta

with zeta a fixed generator of (Z/q)^x, and is isomorphic to
(C_{q-1} x C_{q-1}) x| C_2 of order 2(q-1)^2.  A acts faithfully on D/Z(D),
which gives the 2-dimensional representation delta over Z/q.
"""

from __future__ import annotations

import warnings

import numpy as np
from sympy import isprime

from .groups import (
    AbelianGroup,
    Automorphism,
    CyclicGroup,
    Group,
    GroupAction,
    GroupError,
    HeisenbergGroup,
    SemidirectProductGroup,
)


def smallest_primitive_root(q: int) -> int:
    """Least generator of the multiplicative group mod an odd prime q."""
    from sympy import primitive_root

    return int(primitive_root(q))


def check_hertweck_prime(q: int, allow_any_odd: bool = False) -> None:
    if not isprime(q) or q == 2:
        raise GroupError(f"q = {q} is not an odd prime")
    if q % 4 != 1 and not allow_any_odd:
        raise GroupError(
            f"q = {q} is not 1 mod 4; pass allow_any_odd to build anyway"
        )


def hertweck_D(q: int, allow_any_odd: bool = False) -> HeisenbergGroup:
    check_hertweck_prime(q, allow_any_odd)
    return HeisenbergGroup(q)


def _tau_perm(D: HeisenbergGroup) -> np.ndarray:
    # tau(d1^a d2^b d3^c) = d2^a d1^b d3^-c = d1^b d2^a d3^{ab - c}
    n1, n2, n3 = D.coordinate_grid()
    return D.encode_arrays(n2, n1, n1 * n2 - n3)


def _alpha1_perm(D: HeisenbergGroup, zeta: int) -> np.ndarray:
    n1, n2, n3 = D.coordinate_grid()
    return D.encode_arrays(zeta * n1, n2, zeta * n3)


def _alpha2_perm(D: HeisenbergGroup, zeta: int) -> np.ndarray:
    n1, n2, n3 = D.coordinate_grid()
    return D.encode_arrays(n1, zeta * n2, zeta * n3)


def hertweck_A(q: int, allow_any_odd: bool = False, zeta: int | None = None) -> tuple[SemidirectProductGroup, GroupAction, int]:
    """The group A = <tau, alpha1, alpha2> acting on D.

    Returns (A, action of A on D, zeta).  A is modeled as
    (C_{q-1} x C_{q-1}) x| C_2 with element ((i, j), s) acting as
    alpha1^i alpha2^j tau^s; its generators are alpha1, alpha2, tau in that
    order.  Relations tau^2 = 1, alpha1 alpha2 = alpha2 alpha1 and
    tau alpha1 tau = alpha2 are verified on construction.
    """
    check_hertweck_prime(q, allow_any_odd)
    if zeta is None:
        zeta = smallest_primitive_root(q)
    D = HeisenbergGroup(q)
    base = AbelianGroup((q - 1, q - 1))
    c2 = CyclicGroup(2)
    # tau conjugates alpha1^i alpha2^j to alpha1^j alpha2^i: swap coordinates
    swap = np.empty(base.order, dtype=np.int64)
    for x in range(base.order):
        i, j = base.decode(x)
        swap[x] = base.encode(np.array([j, i]))
    act_sw = GroupAction(c2, base, [Automorphism(base, swap)])
    A = SemidirectProductGroup(base, c2, act_sw, name=f"A(q={q})")
    assert A.order == 2 * (q - 1) ** 2

    alpha1 = Automorphism(D, _alpha1_perm(D, zeta))
    alpha2 = Automorphism(D, _alpha2_perm(D, zeta))
    tau = Automorphism(D, _tau_perm(D))
    # generator order in A: embedded alpha1, alpha2 from the abelian part, tau last
    action = GroupAction(A, D, [alpha1, alpha2, tau])
    return A, action, zeta


def hertweck_A_generators(A: SemidirectProductGroup) -> tuple[int, int, int]:
    """(alpha1, alpha2, tau) as element indices of A."""
    g = A.generators()
    return g[0], g[1], g[2]


def delta_rep(q: int, allow_any_odd: bool = False, zeta: int | None = None) -> tuple[SemidirectProductGroup, dict[int, np.ndarray], int]:
    """The faithful 2-dimensional representation of A over Z/q.

    Returns (A, matrices for A's generators alpha1, alpha2, tau, zeta).
    delta(tau) is the antidiagonal involution, delta(alpha1) = diag(zeta, 1),
    delta(alpha2) = diag(1, zeta).
    """
    A, _, zeta = hertweck_A(q, allow_any_odd, zeta)
    a1, a2, t = hertweck_A_generators(A)
    mats = {
        a1: np.array([[zeta, 0], [0, 1]], dtype=np.int64),
        a2: np.array([[1, 0], [0, zeta]], dtype=np.int64),
        t: np.array([[0, 1], [1, 0]], dtype=np.int64),
    }
    return A, mats, zeta


def delta_of(A: SemidirectProductGroup, mats: dict[int, np.ndarray], q: int, a: int) -> np.ndarray:
    """delta evaluated at an arbitrary element of A by word multiplication."""
    gens = A.generators()
    acc = np.eye(2, dtype=np.int64)
    for pos in A.factorize(a):
        acc = (acc @ mats[gens[pos]]) % q
    return acc


def verify_delta(q: int, allow_any_odd: bool = False) -> None:
    """Check delta is an injective homomorphism on A's relations."""
    A, mats, _ = delta_rep(q, allow_any_odd)
    gens = A.generators()
    rels = A.generator_relations()
    for lhs, rhs in rels:
        L = np.eye(2, dtype=np.int64)
        for pos in lhs:
            L = (L @ mats[gens[pos]]) % q
        R = np.eye(2, dtype=np.int64)
        for pos in rhs:
            R = (R @ mats[gens[pos]]) % q
        if not np.array_equal(L, R):
            raise GroupError(f"delta violates relation {lhs} = {rhs}")
    # injectivity: diagonal part determines (i, j), antidiagonal flags tau
    seen = set()
    for a in range(A.order):
        m = delta_of(A, mats, q, a)
        key = m.tobytes()
        if key in seen:
            raise GroupError("delta is not injective")
        seen.add(key)
