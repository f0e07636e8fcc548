"""Constructions of the small 2-groups used by the search test corpus.

Covers all five groups of order 8 and all fourteen of order 16, plus a
selection of order 32.  Non-isomorphism within each order is checked by the
fingerprint test (order histogram, center, derived subgroup, class).
"""

from __future__ import annotations

import numpy as np

from .groups import (
    AbelianGroup,
    Automorphism,
    CyclicGroup,
    DicyclicGroup,
    DihedralGroup,
    DirectProductGroup,
    Group,
    GroupAction,
    SemidirectProductGroup,
    center,
    derived_subgroup,
    element_orders,
    lower_central_series,
    semidirect_product,
)


def _cyclic_power_action(n: int, e: int) -> GroupAction:
    """C2 acting on C_n by x -> e*x (e^2 must be 1 mod n)."""
    cn = CyclicGroup(n)
    c2 = CyclicGroup(2)
    perm = (e * np.arange(n, dtype=np.int64)) % n
    return GroupAction(c2, cn, [Automorphism(cn, perm)]), cn, c2


def modular_group(order: int) -> SemidirectProductGroup:
    """M_k(2) = C_{order/2} x| C2 with the generator acting by 1 + order/4."""
    n = order // 2
    act, cn, c2 = _cyclic_power_action(n, n // 2 + 1)
    return semidirect_product(cn, c2, act, name=f"M{order}")


def semidihedral_group(order: int) -> SemidirectProductGroup:
    n = order // 2
    act, cn, c2 = _cyclic_power_action(n, n // 2 - 1)
    return semidirect_product(cn, c2, act, name=f"SD{order}")


def c4_rtimes_c4() -> SemidirectProductGroup:
    c4a, c4b = CyclicGroup(4), CyclicGroup(4)
    perm = (-np.arange(4, dtype=np.int64)) % 4
    act = GroupAction(c4b, c4a, [Automorphism(c4a, perm)])
    return semidirect_product(c4a, c4b, act, name="C4x|C4")


def c2c2_rtimes_c4() -> SemidirectProductGroup:
    v4 = AbelianGroup((2, 2))
    c4 = CyclicGroup(4)
    swap = np.array([v4.encode(np.array([b, a])) for x in range(4)
                     for a, b in [v4.decode(x)]], dtype=np.int64)
    act = GroupAction(c4, v4, [Automorphism(v4, swap)])
    return semidirect_product(v4, c4, act, name="(C2xC2)x|C4")


def pauli_group_16() -> SemidirectProductGroup:
    """Central product D8 . C4 of order 16: (C4 x C2) x| C2, c: a -> a, x -> a^2 x."""
    n = AbelianGroup((4, 2))
    c2 = CyclicGroup(2)
    perm = np.empty(8, dtype=np.int64)
    for x in range(8):
        a, b = n.decode(x)
        perm[x] = n.encode(np.array([a + 2 * b, b]))
    act = GroupAction(c2, n, [Automorphism(n, perm)])
    return semidirect_product(n, c2, act, name="D8.C4")


def groups_of_order_8() -> list[Group]:
    return [
        CyclicGroup(8),
        AbelianGroup((4, 2)),
        AbelianGroup((2, 2, 2)),
        DihedralGroup(8),
        DicyclicGroup(8),
    ]


def groups_of_order_16() -> list[Group]:
    return [
        CyclicGroup(16),
        AbelianGroup((4, 4)),
        AbelianGroup((8, 2)),
        AbelianGroup((4, 2, 2)),
        AbelianGroup((2, 2, 2, 2)),
        DihedralGroup(16),
        semidihedral_group(16),
        DicyclicGroup(16),
        modular_group(16),
        DirectProductGroup([DihedralGroup(8), CyclicGroup(2)], name="D8xC2"),
        DirectProductGroup([DicyclicGroup(8), CyclicGroup(2)], name="Q8xC2"),
        c4_rtimes_c4(),
        c2c2_rtimes_c4(),
        pauli_group_16(),
    ]


def some_groups_of_order_32() -> list[Group]:
    return [
        CyclicGroup(32),
        DihedralGroup(32),
        DicyclicGroup(32),
        semidihedral_group(32),
        modular_group(32),
        DirectProductGroup([DihedralGroup(16), CyclicGroup(2)], name="D16xC2"),
    ]


def fingerprint(G: Group) -> tuple:
    """Isomorphism-sensitive invariants for distinguishing small groups."""
    orders = element_orders(G)
    vals, counts = np.unique(orders, return_counts=True)
    hist = tuple((int(v), int(c)) for v, c in zip(vals, counts))
    lcs = lower_central_series(G)
    squares = len({G.mult(x, x) for x in G.elements()})
    return (
        G.order,
        hist,
        len(center(G)),
        len(derived_subgroup(G)),
        len(lcs) - 1,
        squares,
    )
