"""Structure-producing constructions, each re-verified by independent checks.

Every constructor builds its output and then runs the full verifier stack
(cocycle law, bijectivity, equivariance); a verification failure raises
instead of returning a bad structure.  Nothing here self-certifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, lcm
from typing import Optional, Sequence

import numpy as np

from .groups import (
    Automorphism,
    CyclicGroup,
    Group,
    GroupAction,
    GroupError,
    HeisenbergGroup,
    SemidirectProductGroup,
    SymmetricGroup,
    TableGroup,
    commutator,
    conjugate,
    direct_power_with_wreath,
    lower_central_series,
    semidirect_product,
    sqrt_odd,
    subgroup_closure,
)
from .groupring import GroupRing, SandlingSplit, group_prime, sandling_complement
from .hertweck import delta_of, delta_rep, hertweck_A, hertweck_A_generators
from .structures import (
    Equivariance,
    GModule,
    IYBStructure,
    Report,
    VerificationError,
    ideal_to_structure,
    require,
    verify_equivariant,
    verify_structure,
    verify_transversal,
)
from .zklinalg import (
    HowellBasis,
    QuotientPresentation,
    full_basis,
    howell_form,
    kernel_into,
    smith_normal_form,
    span_intersection,
    span_sum,
)


class ConstructionError(RuntimeError):
    pass


def _verified(s: IYBStructure, mode: str = "auto") -> IYBStructure:
    rep = verify_structure(s, mode)
    if not rep.ok:
        raise ConstructionError(f"constructed structure failed verification: {rep.describe()}")
    return s


# ---------------------------------------------------------------------------
# Canonical module coordinates
# ---------------------------------------------------------------------------


def canonicalize_structure(s: IYBStructure) -> IYBStructure:
    """Rewrite module coordinates in invariant-factor form (d1 | d2 | ...)."""
    M = s.module
    facs = [int(f) for f in M.factors]
    chain = all(facs[i + 1] % facs[i] == 0 for i in range(len(facs) - 1)) and all(
        f > 1 for f in facs
    )
    if chain or not facs:
        return s
    mc = lcm(*facs) if facs else 1
    r = len(facs)
    den = howell_form(
        [np.eye(r, dtype=np.int64)[i] * facs[i] for i in range(r)], mc, r
    )
    Q = QuotientPresentation(mc, full_basis(mc, r), den)
    table = Q.project(s.table % mc)
    lifts = Q.lift(np.eye(Q.rank, dtype=np.int64)) if Q.rank else np.zeros((0, r), dtype=np.int64)

    def convert(mat: np.ndarray) -> np.ndarray:
        moved = (lifts @ mat.T) % mc
        return Q.project(moved).T

    gen_actions = [convert(m) for m in M.gen_actions]
    module = GModule(M.group, Q.factors, gen_actions)
    equi = None
    if s.equivariance is not None:
        mats = [convert(np.asarray(m, dtype=np.int64)) for m in s.equivariance.module_actions]
        equi = Equivariance(s.equivariance.actor, s.equivariance.action, mats)
    return IYBStructure(module, table, equi)


# ---------------------------------------------------------------------------
# Coprime semidirect combination and decomposition
# ---------------------------------------------------------------------------


def combine_semidirect(
    sH: IYBStructure, sN: IYBStructure, act: GroupAction
) -> tuple[IYBStructure, SemidirectProductGroup]:
    """Structure on N x| H from one on H and an H-equivariant one on N.

    M = M_N + M_H with N acting trivially on M_H and H acting on M_N through
    the equivariance matrices; chi(n h) = (chi_N(n), chi_H(h)).
    """
    N = sN.group
    H = act.actor
    if sH.group.order != H.order:
        raise ConstructionError("structure on H does not match the acting group")
    if sN.equivariance is None:
        raise ConstructionError("structure on N carries no equivariance data")
    eq = sN.equivariance
    if eq.actor.order != H.order:
        raise ConstructionError("equivariance group does not match H")
    for phi, psi in zip(eq.action.gen_images, act.gen_images):
        if not np.array_equal(phi.perm, psi.perm):
            raise ConstructionError("equivariance action differs from the semidirect action")
    if H.order == 1:
        return IYBStructure(sN.module, sN.table, None), semidirect_product(N, H, act)
    G = semidirect_product(N, H, act)
    rn, rh = sN.module.rank, sH.module.rank
    factors = np.concatenate([sN.module.factors, sH.module.factors])

    def block(nw: np.ndarray, hw: np.ndarray) -> np.ndarray:
        out = np.zeros((rn + rh, rn + rh), dtype=np.int64)
        out[:rn, :rn] = nw
        out[rn:, rn:] = hw
        return out

    gen_actions = []
    for i, _gn in enumerate(N.generators()):
        gen_actions.append(block(sN.module.gen_actions[i], np.eye(rh, dtype=np.int64)))
    eq_mats = [np.asarray(m, dtype=np.int64) for m in eq.module_actions]
    for j, _gh in enumerate(H.generators()):
        gen_actions.append(block(eq_mats[j], sH.module.gen_actions[j]))
    module = GModule(G, factors, gen_actions)
    table = np.zeros((G.order, rn + rh), dtype=np.int64)
    for x in range(G.order):
        n, h = G.decode(x)
        table[x, :rn] = sN.table[n]
        table[x, rn:] = sH.table[h]
    return _verified(IYBStructure(module, table)), G


def _coprime_part(m: int, n: int) -> int:
    """Largest divisor of m built from primes dividing n."""
    if m == 1:
        return 1
    return gcd(m, n ** max(1, m.bit_length()))


def hall_decompose(
    s: IYBStructure, G: SemidirectProductGroup
) -> tuple[IYBStructure, IYBStructure, int]:
    """Split a structure on N x| H with coprime factors into its pieces.

    Returns (sH, sN with H-equivariance, g) where g is the group element
    conjugating H onto the preimage of M_H.  Hard failure when no conjugate
    works, which would contradict the decomposition theorem.
    """
    N, H = G.N, G.H
    if gcd(N.order, H.order) != 1:
        raise ConstructionError("N is not a Hall subgroup (orders not coprime)")
    if s.group is not G and s.group.order != G.order:
        raise ConstructionError("structure group mismatch")
    M = s.module
    facs = [int(f) for f in M.factors]
    a = [_coprime_part(f, N.order) for f in facs]   # |N|-part of each factor
    b = [f // ai for f, ai in zip(facs, a)]         # |H|-part
    mc = M.cover_modulus()
    r = M.rank
    eye = np.eye(r, dtype=np.int64)
    mh_rows = [eye[i] * a[i] for i in range(r)]     # M_H = elements of order dividing |H|
    den = [eye[i] * facs[i] for i in range(r)]
    mh_basis = howell_form(mh_rows + den, mc, r)
    # preimage of M_H under chi
    residues = mh_basis.reduce(s.table % mc)
    pre = {int(x) for x in np.nonzero(~np.any(residues, axis=1))[0]}
    target = None
    g_found = None
    h_embed = {G.embed_h(h) for h in range(H.order)}
    for g in range(G.order):
        conj = {conjugate(G, g, x) for x in h_embed}
        if conj == pre:
            g_found = g
            break
    if g_found is None:
        raise ConstructionError(
            "no conjugate of H matches the preimage of M_H; decomposition failed"
        )
    # sanity: preimage of M_N must be exactly N (normal Hall subgroup)
    mn_rows = [eye[i] * b[i] for i in range(r)]
    mn_basis = howell_form(mn_rows + den, mc, r)
    res_n = mn_basis.reduce(s.table % mc)
    pre_n = {int(x) for x in np.nonzero(~np.any(res_n, axis=1))[0]}
    if pre_n != {G.embed_n(n) for n in range(N.order)}:
        raise ConstructionError("preimage of M_N is not N")
    # twisted cocycle chi~(x) = g^-1 . chi(g x g^-1)
    g = g_found
    ginv = G.inv(g)
    conj_perm = np.array([conjugate(G, g, x) for x in range(G.order)], dtype=np.int64)
    mat_ginv = M.matrix_of(ginv)
    table_tw = (s.table[conj_perm] @ mat_ginv.T) % M.factors

    # coordinate extraction helpers for the torsion pieces
    def restrict(scale: list[int], part: list[int], vecs: np.ndarray) -> np.ndarray:
        keep = [i for i in range(r) if part[i] > 1]
        out = np.zeros((vecs.shape[0], len(keep)), dtype=np.int64)
        for k, i in enumerate(keep):
            col = vecs[:, i]
            if np.any(col % scale[i]):
                raise ConstructionError("value escapes the expected torsion part")
            out[:, k] = (col // scale[i]) % part[i]
        return out

    def restrict_matrix(scale: list[int], part: list[int], mat: np.ndarray) -> np.ndarray:
        keep = [i for i in range(r) if part[i] > 1]
        out = np.zeros((len(keep), len(keep)), dtype=np.int64)
        for ii, i in enumerate(keep):
            for jj, j in enumerate(keep):
                val = int(mat[i, j]) * scale[j]
                if val % scale[i]:
                    raise ConstructionError("action does not preserve the torsion part")
                out[ii, jj] = (val // scale[i]) % part[i]
        return out

    # sH on the abstract H
    h_idx = np.array([G.embed_h(h) for h in range(H.order)], dtype=np.int64)
    h_table = restrict(a, b, table_tw[h_idx])
    h_actions = [
        restrict_matrix(a, b, M.matrix_of(G.embed_h(h))) for h in H.generators()
    ]
    h_factors = [b[i] for i in range(r) if b[i] > 1]
    sH = IYBStructure(GModule(H, h_factors, h_actions), h_table)
    _verified(sH, "full" if H.order <= 10_000 else "generators")

    # sN with H acting by conjugation inside G
    n_idx = np.array([G.embed_n(n) for n in range(N.order)], dtype=np.int64)
    n_table = restrict(b, a, table_tw[n_idx])
    n_actions = [restrict_matrix(b, a, M.matrix_of(G.embed_n(n))) for n in N.generators()]
    n_factors = [a[i] for i in range(r) if a[i] > 1]
    conj_images = []
    h_mats = []
    for j, h in enumerate(H.generators()):
        gh = G.embed_h(h)
        perm = np.empty(N.order, dtype=np.int64)
        for n in range(N.order):
            y = conjugate(G, gh, G.embed_n(n))
            yn, yh = G.decode(y)
            if yh != 0:
                raise ConstructionError("conjugation by H does not preserve N")
            perm[n] = yn
        conj_images.append(Automorphism(N, perm))
        h_mats.append(restrict_matrix(b, a, M.matrix_of(gh)))
    conj_action = GroupAction(H, N, conj_images)
    sN = IYBStructure(
        GModule(N, n_factors, n_actions),
        n_table,
        Equivariance(H, conj_action, h_mats),
    )
    _verified(sN, "full" if N.order <= 10_000 else "generators")
    # side condition: N acts trivially on M_H
    for n in N.generators():
        mat = restrict_matrix(a, b, M.matrix_of(G.embed_n(n)))
        if not np.array_equal(mat % np.array(h_factors)[:, None] if h_factors else mat,
                              np.eye(len(h_factors), dtype=np.int64) % (np.array(h_factors)[:, None] if h_factors else 1)):
            raise ConstructionError("N does not act trivially on M_H")
    return sH, sN, g_found


# ---------------------------------------------------------------------------
# Coordinatewise powers with wreath equivariance
# ---------------------------------------------------------------------------


def power_wreath(
    s: IYBStructure,
    n: int,
    B: Optional[Group] = None,
    hom: Optional[np.ndarray] = None,
) -> tuple[IYBStructure, Group]:
    """The coordinatewise structure on G^(n), equivariant under A wr Sigma_n.

    B (with hom: an array sending each B-index to an element of the wreath
    group W) pulls the equivariance back along a verified homomorphism; by
    default B = W and hom is the identity.
    """
    if s.equivariance is None:
        raise ConstructionError("power construction needs an equivariant input")
    G = s.group
    P, W, actW = direct_power_with_wreath(G, n, s.equivariance.action)
    if B is None:
        B = W
        hom = np.arange(W.order, dtype=np.int64)
    if hom is None:
        raise ConstructionError("a homomorphism array into the wreath group is required")
    hom = np.asarray(hom, dtype=np.int64)
    if hom.shape != (B.order,):
        raise ConstructionError("homomorphism array must cover all of B")
    for b1 in range(B.order):
        for b2 in B.generators():
            if hom[B.mult(b1, b2)] != W.mult(int(hom[b1]), int(hom[b2])):
                raise ConstructionError(f"hom is not a homomorphism at ({b1},{b2})")
    M = s.module
    r = M.rank
    factors = np.tile(M.factors, n)
    rn = r * n

    def embed_block(i: int, mat: np.ndarray) -> np.ndarray:
        out = np.zeros((rn, rn), dtype=np.int64)
        for k in range(n):
            blk = mat if k == i else np.eye(r, dtype=np.int64)
            out[k * r : (k + 1) * r, k * r : (k + 1) * r] = blk
        return out

    gen_actions = []
    for i in range(n):
        for mat in M.gen_actions:
            gen_actions.append(embed_block(i, mat))
    module = GModule(P, factors, gen_actions)
    table = np.zeros((P.order, rn), dtype=np.int64)
    for x in range(P.order):
        comps = P.decode(x)
        for i in range(n):
            table[x, i * r : (i + 1) * r] = s.table[comps[i]]

    # W-element -> block matrix on M^(n): y_i = a_i . x_{sigma^-1(i)}
    A = s.equivariance.actor
    amat_cache: dict[int, np.ndarray] = {}

    def a_matrix(aelt: int) -> np.ndarray:
        if aelt not in amat_cache:
            acc = np.eye(r, dtype=np.int64)
            gens = A.generators()
            mats = {g: np.asarray(m, dtype=np.int64) for g, m in zip(gens, s.equivariance.module_actions)}
            for pos in A.factorize(aelt):
                acc = (acc @ mats[gens[pos]]) % M.cover_modulus()
            amat_cache[aelt] = acc % M.factors[:, None]
        return amat_cache[aelt]

    def w_matrix(w: int) -> np.ndarray:
        an, sidx = W.decode(w)
        acomps = W.N.decode(an)
        sigma = W.H.perm_of(sidx)
        out = np.zeros((rn, rn), dtype=np.int64)
        for i in range(n):
            src = sigma.index(i)
            out[i * r : (i + 1) * r, src * r : (src + 1) * r] = a_matrix(acomps[i])
        return out

    b_images = []
    b_mats = []
    for bg in B.generators():
        w = int(hom[bg])
        b_images.append(actW.automorphism(w))
        b_mats.append(w_matrix(w))
    b_action = GroupAction(B, P, b_images, validate=False)
    equi = Equivariance(B, b_action, b_mats)
    out = IYBStructure(module, table, equi)
    return _verified(out), P


# ---------------------------------------------------------------------------
# The odd class-2 structure (group with new addition)
# ---------------------------------------------------------------------------


@dataclass
class OddAdditionData:
    add_table: np.ndarray
    factors: tuple[int, ...]
    coords: np.ndarray           # |N| x rank, additive coordinates per element
    element_of: dict[bytes, int]


def odd_class2_addition(N: Group) -> OddAdditionData:
    """The addition x + y = x y sqrt([y, x]) on an odd class-<=2 group.

    Builds the table, checks the abelian-group axioms, and computes
    invariant-factor coordinates for (N, +).
    """
    if N.order % 2 == 0:
        raise ConstructionError("group must have odd order")
    lcs = lower_central_series(N)
    if len(lcs) - 1 > 2:
        raise ConstructionError("group must have nilpotency class at most 2")
    n = N.order
    add = np.zeros((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(n):
            c = commutator(N, y, x)
            add[x, y] = N.mult(N.mult(x, y), sqrt_odd(N, c))
    if not np.array_equal(add, add.T):
        raise ConstructionError("new addition is not commutative")
    try:
        TableGroup(add, name="(N,+)")
    except GroupError as exc:
        raise ConstructionError(f"new addition fails the group axioms: {exc}") from exc
    # greedy polycyclic-style generators and relation matrix
    gens: list[int] = []
    coords_of: dict[int, tuple[int, ...]] = {0: ()}
    relations: list[list[int]] = []
    while len(coords_of) < n:
        x = min(set(range(n)) - set(coords_of))
        # order of x modulo the current subgroup
        t = 1
        acc = x
        while acc not in coords_of:
            acc = int(add[acc, x])
            t += 1
        base = coords_of[acc]
        k = len(gens)
        relations = [row + [0] for row in relations]
        relations.append([-int(c) for c in base] + [t])
        new_coords: dict[int, tuple[int, ...]] = {}
        for elt, cs in coords_of.items():
            acc2 = elt
            for j in range(t):
                new_coords[acc2] = cs + (j,)
                if j < t - 1:
                    acc2 = int(add[acc2, x])
        coords_of = new_coords
        gens.append(x)
    k = len(gens)
    diag, V, Vi = smith_normal_form(relations, k)
    diag = list(diag) + [0] * (k - len(diag))
    if any(d == 0 for d in diag):
        raise ConstructionError("relation lattice is degenerate")
    keep = [j for j, d in enumerate(diag) if d > 1]
    factors = tuple(int(diag[j]) for j in keep)
    Vm = np.array(V, dtype=object)
    coords = np.zeros((n, len(keep)), dtype=np.int64)
    for elt, cs in coords_of.items():
        full = np.array(cs, dtype=object) @ Vm
        coords[elt] = [int(full[j]) % int(diag[j]) for j in keep]
    element_of = {coords[e].tobytes(): e for e in range(n)}
    if len(element_of) != n:
        raise ConstructionError("additive coordinates are not faithful")
    return OddAdditionData(add, factors, coords, element_of)


def class2_odd(N: Group, action: Optional[GroupAction] = None) -> IYBStructure:
    """The identity-cocycle structure on an odd группе of class at most 2.

    The module is (N, +) with x + y = x y sqrt([y, x]); the group acts by
    ^g x = g x + g^-1 and the cocycle is the identity map in coordinates.
    The construction is equivariant for any automorphisms supplied.
    """
    data = odd_class2_addition(N)
    factors = np.array(data.factors, dtype=np.int64)
    rank = len(data.factors)
    add = data.add_table

    def elt_of_coords(y: np.ndarray) -> int:
        return data.element_of[(np.asarray(y, dtype=np.int64) % factors).tobytes()]

    basis_elems = [elt_of_coords(np.eye(rank, dtype=np.int64)[j]) for j in range(rank)]

    def map_matrix(fn) -> np.ndarray:
        cols = [data.coords[fn(b)] for b in basis_elems]
        mat = np.array(cols, dtype=np.int64).T % factors[:, None]
        # verify the map really is linear in coordinates
        images = np.array([data.coords[fn(x)] for x in range(N.order)], dtype=np.int64)
        predicted = (data.coords @ mat.T) % factors
        if not np.array_equal(images, predicted):
            raise ConstructionError("map is not additive in the new coordinates")
        return mat

    gen_actions = []
    for g in N.generators():
        ginv = N.inv(g)
        gen_actions.append(map_matrix(lambda x, g=g, gi=ginv: int(add[N.mult(g, x), gi])))
    module = GModule(N, data.factors, gen_actions)
    equi = None
    if action is not None:
        mats = [map_matrix(lambda x, phi=phi: phi(x)) for phi in action.gen_images]
        equi = Equivariance(action.actor, action, mats)
    s = IYBStructure(module, data.coords, equi)
    return _verified(s, "full" if N.order <= 10_000 else "generators")


# ---------------------------------------------------------------------------
# The class-2 equivariant construction through the group ring
# ---------------------------------------------------------------------------


@dataclass
class SandlingResult:
    structure: IYBStructure
    ideal: HowellBasis
    ring: GroupRing
    split: SandlingSplit


def class2_equivariant_sandling(
    N: Group,
    action: Optional[GroupAction] = None,
    k: Optional[int] = None,
) -> SandlingResult:
    """H-equivariant structure on a class-<=2 p-group via an H-stable ideal.

    Pipeline over Z/p^k (default k = log_p |N|): split 1 - N' off
    omega^2/omega^3, average the projection over H to make its kernel
    H-stable, pull the kernel back into omega^2, and verify the resulting
    ideal is H-stable, a left ideal, and a residue transversal; the induced
    structure g -> 1 - g + I is then built and fully verified.
    """
    p = group_prime(N)
    import math

    n_exp = round(math.log(N.order, p))
    if k is None:
        k = n_exp
    m = p**k
    if action is None:
        action = GroupAction.trivial(CyclicGroup(1), N)
    H = action.actor
    if H.order % p == 0:
        raise ConstructionError("acting group order must be coprime to p")
    ring = GroupRing(N, m)
    split = sandling_complement(ring)
    omega2, omega3 = split.omega2, split.omega3
    Q = QuotientPresentation(m, omega2, omega3)
    r = Q.rank
    eye = np.eye(r, dtype=np.int64) if r else np.zeros((0, 0), dtype=np.int64)
    den_rows = [eye[i] * int(Q.factors[i]) for i in range(r)]
    den = howell_form(den_rows, m, r)
    sbar = Q.project(split.S.rows) if split.S.nrows else np.zeros((0, r), dtype=np.int64)
    cbar = Q.project(split.C.rows) if split.C.nrows else np.zeros((0, r), dtype=np.int64)
    s_pre = howell_form(list(sbar) + den_rows, m, r)
    c_pre = howell_form(list(cbar) + den_rows, m, r)

    # N must act trivially on omega^2/omega^3 (this makes ideals of the
    # quotient automatically left ideals)
    lifts = Q.lift(eye) if r else np.zeros((0, ring.dim), dtype=np.int64)
    facs_row = np.array(Q.factors, dtype=np.int64)[None, :] if r else None
    for g in N.generators():
        moved = ring.left_mult_element(g, lifts)
        if r and not np.array_equal(Q.project(moved), eye % facs_row):
            raise ConstructionError("N does not act trivially on omega^2/omega^3")

    # projection onto S along C, as a matrix on quotient coordinates
    from .zklinalg import solve_in_span

    combined = np.vstack([s_pre.rows, c_pre.rows]) if r else np.zeros((0, r), dtype=np.int64)
    pi_cols = []
    for j in range(r):
        sol = solve_in_span(combined, m, r, eye[j][None, :])[0]
        if sol is None:
            raise ConstructionError("S + C does not span omega^2/omega^3")
        s_part = (sol[: s_pre.nrows] @ s_pre.rows) % m if s_pre.nrows else np.zeros(r, dtype=np.int64)
        pi_cols.append(s_part)
    pi = np.array(pi_cols, dtype=np.int64).T if r else np.zeros((0, 0), dtype=np.int64)

    # H acting on quotient coordinates; S must be stable
    t_mats: dict[int, np.ndarray] = {}

    def t_matrix(a: int) -> np.ndarray:
        if a not in t_mats:
            phi = action.automorphism(a)
            moved = GroupRing._permute(phi.perm, lifts)
            t_mats[a] = Q.project(moved).T if r else np.zeros((0, 0), dtype=np.int64)
        return t_mats[a]

    for idx, a in enumerate(H.generators()):
        phi = action.gen_images[idx]
        if not split.S.contains_all(GroupRing._permute(phi.perm, split.S.rows)):
            raise ConstructionError("1 - N' classes are not stable under the action")

    inv_h = pow(H.order, -1, m)
    acc = np.zeros((r, r), dtype=np.int64)
    for a in range(H.order):
        Ta = t_matrix(a)
        Tinv = t_matrix(H.inv(a))
        acc = (acc + Tinv @ pi @ Ta) % m
    pi_hat = (inv_h * acc) % m

    def equal_as_maps(Amat: np.ndarray, Bmat: np.ndarray) -> bool:
        diff = (Amat - Bmat) % m
        return den.contains_all(diff.T % m)

    if r and not equal_as_maps((pi_hat @ pi_hat) % m, pi_hat):
        raise ConstructionError("averaged projection is not idempotent")
    img = howell_form(list((pi_hat.T) % m) + den_rows, m, r)
    if img != s_pre:
        raise ConstructionError("averaged projection does not project onto S")
    ker = kernel_into(pi_hat.T % m, m, den)
    c_ideal_pre = howell_form(list(ker.rows) + den_rows, m, r)
    if span_intersection(s_pre, c_ideal_pre) != den:
        raise ConstructionError("H-stable complement intersects S")
    if span_sum(s_pre, c_ideal_pre).span_size() != full_basis(m, r).span_size():
        raise ConstructionError("H-stable complement does not fill the quotient")
    for a in H.generators():
        moved = (c_ideal_pre.rows @ t_matrix(a).T) % m
        if not c_ideal_pre.contains_all(moved):
            raise ConstructionError("kernel of averaged projection is not H-stable")

    ideal_rows = [Q.lift(row) for row in c_ideal_pre.rows] + [row for row in omega3.rows]
    ideal = howell_form(ideal_rows, m, ring.dim)
    # verification stack: H-stability, left ideal, transversal
    for idx, a in enumerate(H.generators()):
        phi = action.gen_images[idx]
        if not ideal.contains_all(GroupRing._permute(phi.perm, ideal.rows)):
            raise ConstructionError("ideal is not H-stable")
    if not ring.left_ideal_closure_check(ideal):
        raise ConstructionError("candidate is not a left ideal")
    rep = verify_transversal(ring, ideal)
    if not rep.ok:
        raise ConstructionError(f"transversal verification failed: {rep.describe()}")
    equi_action = action if H.order > 1 else None
    structure = ideal_to_structure(ring, ideal, equivariance_action=equi_action, verify_input=False)
    _verified(structure, "full" if N.order <= 10_000 else "generators")
    return SandlingResult(structure, ideal, ring, split)


# ---------------------------------------------------------------------------
# The explicit structure on the Heisenberg building block
# ---------------------------------------------------------------------------


def hertweck_d_structure(q: int, allow_any_odd: bool = False) -> IYBStructure:
    """The A-equivariant structure on the Heisenberg group D mod q.

    M = (Z/q)^3; d1 and d2 act by the two unipotent elementary matrices, d3
    trivially; a in A acts by det(delta(a)) (1 + delta(a^-1)^T); and
    chi(d1^n1 d2^n2 d3^n3) = (n3 - n1 n2 / 2, -n2 / 2, n1 / 2) with
    1/2 = (q+1)/2 mod q.
    """
    D = HeisenbergGroup(q)
    A, action, zeta = hertweck_A(q, allow_any_odd)
    Adr, delta_mats, _ = delta_rep(q, allow_any_odd, zeta)
    half = (q + 1) // 2
    n1, n2, n3 = D.coordinate_grid()
    table = np.stack(
        [
            (n3 - half * n1 * n2) % q,
            (-half * n2) % q,
            (half * n1) % q,
        ],
        axis=1,
    )
    d1_mat = np.array([[1, 1, 0], [0, 1, 0], [0, 0, 1]], dtype=np.int64)
    d2_mat = np.array([[1, 0, 1], [0, 1, 0], [0, 0, 1]], dtype=np.int64)
    d3_mat = np.eye(3, dtype=np.int64)
    module = GModule(D, (q, q, q), [d1_mat, d2_mat, d3_mat])

    def delta_m(a: int) -> np.ndarray:
        da = delta_of(A, delta_mats, q, a)
        det = (int(da[0, 0]) * int(da[1, 1]) - int(da[0, 1]) * int(da[1, 0])) % q
        dinv = delta_of(A, delta_mats, q, A.inv(a))
        out = np.zeros((3, 3), dtype=np.int64)
        out[0, 0] = det
        out[1:, 1:] = (det * dinv.T) % q
        return out % q

    eq_mats = [delta_m(a) for a in A.generators()]
    equi = Equivariance(A, action, eq_mats)
    s = IYBStructure(module, table, equi)
    mode = "full" if D.order <= 10_000 else "generators"
    _verified(s, mode)
    return s


def hertweck_chi_inverse_check(s: IYBStructure) -> Report:
    """Exhaustive bijectivity via the closed-form inverse of the cocycle."""
    D = s.group
    if not isinstance(D, HeisenbergGroup):
        return Report(False, "chi-inverse", detail="not a Heisenberg structure")
    q = D.q
    half = (q + 1) // 2
    T = s.table
    v1, v2, v3 = T[:, 0], T[:, 1], T[:, 2]
    n1 = (2 * v3) % q
    n2 = (-2 * v2) % q
    n3 = (v1 + half * n1 * n2) % q
    idx = D.encode_arrays(n1, n2, n3)
    if not np.array_equal(idx, np.arange(D.order, dtype=np.int64)):
        bad = int(np.nonzero(idx != np.arange(D.order))[0][0])
        return Report(False, "chi-inverse", witness=bad)
    return Report(True, "chi-inverse")
