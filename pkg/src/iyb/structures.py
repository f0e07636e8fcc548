"""IYB structures: G-modules with bijective cocycles, and their verifiers.

A structure is a finite abelian group M in coordinate form (one modulus per
coordinate), an action of G on M by matrices given on generators, and a
table chi assigning a module element to every group element.  Verifiers
check the cocycle law chi(gh) = chi(g) + g.chi(h), bijectivity, optional
A-equivariance chi(^a g) = a.chi(g), and the residue-transversal property
for ideal certificates.  Verification never trusts the constructor that
produced a structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Iterable, Optional, Sequence

import numpy as np

from .groups import Automorphism, Group, GroupAction, GroupError
from .groupring import GroupRing
from .zklinalg import (
    HowellBasis,
    QuotientPresentation,
    howell_form,
    span_sum,
    zero_basis,
)


class VerificationError(ValueError):
    """A structure failed verification (hard failure for constructors)."""


@dataclass
class Report:
    ok: bool
    kind: str
    witness: object = None
    detail: str = ""

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return f"{self.kind}: ok"
        return f"{self.kind}: FAILED at {self.witness!r} {self.detail}"


def _matrix_respects_factors(mat: np.ndarray, factors: np.ndarray) -> bool:
    # column j scaled by factors[j] must vanish mod factors[i] per row i
    r = len(factors)
    for i in range(r):
        for j in range(r):
            if (int(mat[i, j]) * int(factors[j])) % int(factors[i]):
                return False
    return True


def _reduce_matrix(mat: np.ndarray, factors: np.ndarray) -> np.ndarray:
    return mat % factors[:, None]


class GModule:
    """A finite module over ZG in coordinate form."""

    def __init__(
        self,
        group: Group,
        factors: Sequence[int],
        gen_actions: Sequence[np.ndarray],
        verify: bool = True,
        sample_pairs: int = 100_000,
    ):
        self.group = group
        self.factors = np.array([int(f) for f in factors], dtype=np.int64)
        if np.any(self.factors < 1):
            raise VerificationError("module factors must be positive")
        gens = group.generators()
        if len(gen_actions) != len(gens):
            raise VerificationError("one action matrix per group generator required")
        r = len(self.factors)
        self.gen_actions = [
            _reduce_matrix(np.asarray(m, dtype=np.int64), self.factors) for m in gen_actions
        ]
        for m in self.gen_actions:
            if m.shape != (r, r):
                raise VerificationError("action matrix shape mismatch")
        self._matrix_cache: dict[int, np.ndarray] = {0: np.eye(r, dtype=np.int64) % self.factors[:, None]}
        for g, m in zip(gens, self.gen_actions):
            self._matrix_cache[g] = m
        self._power_cache: dict[tuple[int, int], np.ndarray] = {}
        if verify:
            self.verify_action(sample_pairs=sample_pairs)

    @property
    def rank(self) -> int:
        return len(self.factors)

    def size(self) -> int:
        n = 1
        for f in self.factors:
            n *= int(f)
        return n

    def cover_modulus(self) -> int:
        return lcm(*[int(f) for f in self.factors]) if self.rank else 1

    def reduce(self, vecs: np.ndarray) -> np.ndarray:
        return np.asarray(vecs, dtype=np.int64) % self.factors

    def apply(self, mat: np.ndarray, vecs: np.ndarray) -> np.ndarray:
        """Matrix action on one vector or a batch of row vectors."""
        v = np.asarray(vecs, dtype=np.int64)
        if v.ndim == 1:
            return (mat @ v) % self.factors
        return (v @ mat.T) % self.factors

    def matrix_of(self, g: int) -> np.ndarray:
        """Action matrix of an arbitrary element via its generator word."""
        g = self.group.check_index(g)
        cached = self._matrix_cache.get(g)
        if cached is not None:
            return cached
        word = self.group.factorize(g)
        mat = self._eval_word(word)
        if len(self._matrix_cache) < 200_000:
            self._matrix_cache[g] = mat
        return mat

    def _gen_power(self, pos: int, e: int, mod: int) -> np.ndarray:
        key = (pos, e)
        cached = self._power_cache.get(key)
        if cached is None:
            cached = _matrix_power_mod(self.gen_actions[pos], e, mod)
            if len(self._power_cache) < 100_000:
                self._power_cache[key] = cached
        return cached

    def _eval_word(self, word: Sequence[int]) -> np.ndarray:
        r = self.rank
        acc = np.eye(r, dtype=np.int64)
        i = 0
        mod = self.cover_modulus()
        while i < len(word):
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            acc = (acc @ self._gen_power(word[i], j - i, mod)) % mod
            i = j
        return acc % self.factors[:, None]

    def matrices_equal(self, a: np.ndarray, b: np.ndarray) -> bool:
        return bool(np.array_equal(a % self.factors[:, None], b % self.factors[:, None]))

    def verify_action(self, sample_pairs: int = 100_000) -> None:
        for m in self.gen_actions:
            if not _matrix_respects_factors(m, self.factors):
                raise VerificationError("action matrix does not respect the coordinate moduli")
        G = self.group
        rels = G.generator_relations()
        if rels is not None:
            for lhs, rhs in rels:
                if not self.matrices_equal(self._eval_word(lhs), self._eval_word(rhs)):
                    raise VerificationError(f"module action violates relation {lhs} = {rhs}")
        elif G.order <= 256:
            mats = [self.matrix_of(x) for x in G.elements()]
            for x in G.elements():
                lx = G.left_translation(x)
                for y in G.elements():
                    prod = (mats[x] @ mats[y]) % self.factors[:, None]
                    if not self.matrices_equal(prod, mats[int(lx[y])]):
                        raise VerificationError(f"module action not multiplicative at ({x},{y})")
        else:
            rng = np.random.default_rng(0x5EED)
            for _ in range(min(sample_pairs, 4 * G.order)):
                x = int(rng.integers(G.order))
                y = int(rng.integers(G.order))
                prod = (self.matrix_of(x) @ self.matrix_of(y)) % self.factors[:, None]
                if not self.matrices_equal(prod, self.matrix_of(G.mult(x, y))):
                    raise VerificationError(f"module action not multiplicative at ({x},{y})")
        # generators must act invertibly
        for g, m in zip(G.generators(), self.gen_actions):
            if not self.matrices_equal(
                (m @ self.matrix_of(G.inv(g))) % self.factors[:, None],
                np.eye(self.rank, dtype=np.int64),
            ):
                raise VerificationError(f"generator {g} does not act invertibly")

    def encode_rows(self, vecs: np.ndarray) -> np.ndarray:
        """Mixed-radix encoding of module elements, for uniqueness scans."""
        out = np.zeros(vecs.shape[0] if vecs.ndim == 2 else 1, dtype=np.int64)
        v = np.atleast_2d(vecs)
        for i, f in enumerate(self.factors):
            out = out * int(f) + (v[:, i] % int(f))
        return out

    def enumerate_elements(self, limit: int = 1 << 20) -> np.ndarray:
        n = self.size()
        if n > limit:
            raise VerificationError(f"module too large to enumerate ({n})")
        out = np.zeros((n, self.rank), dtype=np.int64)
        reps = 1
        for i in range(self.rank - 1, -1, -1):
            f = int(self.factors[i])
            col = (np.arange(n) // reps) % f
            out[:, i] = col
            reps *= f
        return out


def _matrix_power_mod(mat: np.ndarray, e: int, mod: int) -> np.ndarray:
    r = mat.shape[0]
    acc = np.eye(r, dtype=np.int64)
    base = mat % mod
    while e:
        if e & 1:
            acc = (acc @ base) % mod
        base = (base @ base) % mod
        e >>= 1
    return acc


@dataclass
class Equivariance:
    """A group acting compatibly on both G and M."""

    actor: Group
    action: GroupAction            # actor on the structure group
    module_actions: list[np.ndarray]  # one matrix per actor generator

    def generator_data(self, module: GModule):
        for idx, a in enumerate(self.actor.generators()):
            yield a, self.action.gen_images[idx], _reduce_matrix(
                np.asarray(self.module_actions[idx], dtype=np.int64), module.factors
            )


class IYBStructure:
    """A G-module together with a bijective cocycle table chi."""

    def __init__(
        self,
        module: GModule,
        table: np.ndarray,
        equivariance: Optional[Equivariance] = None,
    ):
        self.module = module
        self.table = module.reduce(np.asarray(table, dtype=np.int64))
        if self.table.shape != (module.group.order, module.rank):
            raise VerificationError("cocycle table shape mismatch")
        if np.any(self.table[0]):
            raise VerificationError("chi(identity) must be 0")
        self.table.setflags(write=False)
        self.equivariance = equivariance

    @property
    def group(self) -> Group:
        return self.module.group

    def chi(self, g: int) -> np.ndarray:
        return self.table[g]


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------


def verify_cocycle(s: IYBStructure, mode: str = "auto", samples: int = 100_000) -> Report:
    """Check chi(gh) = chi(g) + g.chi(h).

    full mode runs all |G|^2 pairs; generators mode checks (g, h) for g in a
    generating set and every h, which extends to all pairs by induction on
    the word length of g; auto selects full for |G| <= 10^4.
    """
    G = s.group
    M = s.module
    T = s.table
    if mode == "auto":
        mode = "full" if G.order <= 10_000 else "generators"
    if np.any(T[0]):
        return Report(False, "cocycle", witness=0, detail="chi(e) nonzero")
    if mode == "full":
        gs: Iterable[int] = G.elements()
    elif mode == "generators":
        gs = G.generators()
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for g in gs:
        lg = G.left_translation(g)
        rhs = (T @ M.matrix_of(g).T + T[g][None, :]) % M.factors
        lhs = T[lg]
        if not np.array_equal(lhs, rhs):
            h = int(np.nonzero(np.any(lhs != rhs, axis=1))[0][0])
            return Report(False, "cocycle", witness=(int(g), h))
    if mode == "generators" and samples:
        rng = np.random.default_rng(0xC0C1C)
        n = min(samples, 100_000)
        xs = rng.integers(0, G.order, size=n)
        ys = rng.integers(0, G.order, size=n)
        for x, y in zip(xs.tolist(), ys.tolist()):
            xy = G.mult(x, y)
            rhs1 = (M.matrix_of(x) @ T[y] + T[x]) % M.factors
            if not np.array_equal(T[xy], rhs1):
                return Report(False, "cocycle", witness=(x, y), detail="sampled pair")
    return Report(True, "cocycle")


def verify_bijective(s: IYBStructure) -> Report:
    G, M = s.group, s.module
    if M.size() != G.order:
        return Report(False, "bijective", detail=f"|M| = {M.size()} != |G| = {G.order}")
    codes = M.encode_rows(s.table)
    if np.unique(codes).size != G.order:
        dup = int(np.argmax(np.bincount(codes % (G.order * 4))))
        return Report(False, "bijective", witness=dup, detail="duplicate cocycle value")
    return Report(True, "bijective")


def verify_equivariant(s: IYBStructure) -> Report:
    """chi(^a g) = a.chi(g) for every generator a of the equivariance group."""
    if s.equivariance is None:
        return Report(True, "equivariance", detail="vacuous (no equivariance data)")
    G, M, T = s.group, s.module, s.table
    for a, phi, mat in s.equivariance.generator_data(M):
        if not _matrix_respects_factors(mat, M.factors):
            return Report(False, "equivariance", witness=int(a), detail="matrix/factor mismatch")
        lhs = T[phi.perm]
        rhs = (T @ mat.T) % M.factors
        if not np.array_equal(lhs, rhs):
            g = int(np.nonzero(np.any(lhs != rhs, axis=1))[0][0])
            return Report(False, "equivariance", witness=(int(a), g))
        # compatibility a.(g.x) = (^a g).(a.x) on generators
        for g in G.generators():
            left = (mat @ M.matrix_of(g)) % M.factors[:, None]
            right = (M.matrix_of(int(phi(g))) @ mat) % M.factors[:, None]
            if not M.matrices_equal(left, right):
                return Report(
                    False, "equivariance", witness=(int(a), int(g)), detail="action twist mismatch"
                )
    return Report(True, "equivariance")


def verify_structure(s: IYBStructure, mode: str = "auto") -> Report:
    for rep in (verify_cocycle(s, mode), verify_bijective(s), verify_equivariant(s)):
        if not rep.ok:
            return rep
    return Report(True, "structure")


def require(report: Report) -> None:
    if not report.ok:
        raise VerificationError(report.describe())


# ---------------------------------------------------------------------------
# Transversal ideals and the ideal <-> structure conversions
# ---------------------------------------------------------------------------


def verify_transversal(ring: GroupRing, ideal: HowellBasis) -> Report:
    """Check that {1 - g} is a full set of residues of omega modulo the ideal.

    Both conditions are checked: the index of the ideal in omega equals |G|,
    and the 1 - g are pairwise incongruent (g != h implies h - g not in the
    ideal), via batched membership over all pairs.
    """
    G = ring.group
    omega = ring.omega()
    if not omega.contains_all(ideal.rows):
        return Report(False, "transversal", detail="ideal not contained in omega")
    index = omega.span_size() // ideal.span_size()
    if index != G.order:
        return Report(False, "transversal", witness=index, detail=f"index != |G| = {G.order}")
    n = G.order
    diffs = []
    pairs = []
    for g in range(n):
        for h in range(g + 1, n):
            row = ring.zero()
            row[h] += 1
            row[g] -= 1
            diffs.append(row % ring.modulus)
            pairs.append((g, h))
    if diffs:
        residues = ideal.reduce(np.array(diffs, dtype=np.int64))
        bad = np.nonzero(~np.any(residues, axis=1))[0]
        if bad.size:
            return Report(False, "transversal", witness=pairs[int(bad[0])], detail="congruent pair")
    return Report(True, "transversal")


def ideal_to_structure(
    ring: GroupRing,
    ideal: HowellBasis,
    equivariance_action: Optional[GroupAction] = None,
    verify_input: bool = True,
) -> IYBStructure:
    """The structure g -> 1 - g + I on omega/I, for a verified transversal ideal.

    When an action of A on G stabilizing the ideal is supplied, the induced
    module action of A is attached as equivariance data (stability is
    checked and is an error if violated).
    """
    if verify_input:
        rep = verify_transversal(ring, ideal)
        if not rep.ok:
            raise VerificationError(rep.describe())
    G = ring.group
    m = ring.modulus
    omega = ring.omega()
    Q = QuotientPresentation(m, omega, ideal)
    r = Q.rank
    table = Q.project(ring.one_minus_all()) if r else np.zeros((G.order, 0), dtype=np.int64)
    lifts = Q.lift(np.eye(r, dtype=np.int64)) if r else np.zeros((0, ring.dim), dtype=np.int64)
    gen_actions = []
    for g in G.generators():
        moved = ring.left_mult_element(g, lifts)
        gen_actions.append(Q.project(moved).T)
    module = GModule(G, Q.factors, gen_actions)
    equivariance = None
    if equivariance_action is not None:
        mats = []
        for phi in equivariance_action.gen_images:
            moved = GroupRing._permute(phi.perm, ideal.rows)
            if not ideal.contains_all(moved):
                raise VerificationError("ideal is not stable under the supplied action")
            mats.append(Q.project(GroupRing._permute(phi.perm, lifts)).T)
        equivariance = Equivariance(equivariance_action.actor, equivariance_action, mats)
    return IYBStructure(module, table, equivariance)


# ---------------------------------------------------------------------------
# Isomorphism and subgroup diagnostics
# ---------------------------------------------------------------------------


def structures_isomorphic(s1: IYBStructure, s2: IYBStructure) -> Optional[np.ndarray]:
    """The forced isomorphism chi2 . chi1^-1 as a matrix, or None.

    The intertwining equation chi2 = phi . chi1 determines phi uniquely, so
    it only remains to check that the forced map is additive (equivalently,
    given by a matrix), respects the coordinate moduli, and commutes with
    the G-action and the equivariance action when present.
    """
    G = s1.group
    if s2.group.order != G.order:
        return None
    M1, M2 = s1.module, s2.module
    if M1.size() != M2.size():
        return None
    # locate group elements hitting the coordinate unit vectors of M1
    index_of = {s1.table[g].tobytes(): g for g in range(G.order)}
    cols = []
    for j in range(M1.rank):
        e = np.zeros(M1.rank, dtype=np.int64)
        e[j] = 1 % M1.factors[j]
        g = index_of.get(e.tobytes())
        if g is None:
            return None
        cols.append(s2.table[g])
    phi = np.array(cols, dtype=np.int64).T % M2.factors[:, None] if M1.rank else np.zeros((M2.rank, 0), dtype=np.int64)
    # factor compatibility: phi(f_j e_j) = 0
    for j in range(M1.rank):
        if np.any((phi[:, j] * int(M1.factors[j])) % M2.factors):
            return None
    # the forced map must reproduce chi2 everywhere (this encodes additivity)
    if not np.array_equal((s1.table @ phi.T) % M2.factors, s2.table):
        return None
    # intertwine the group action
    for g in G.generators():
        left = (phi @ M1.matrix_of(g)) % M2.factors[:, None]
        right = (M2.matrix_of(g) @ phi) % M2.factors[:, None]
        if not np.array_equal(left, right):
            return None
    # intertwine the equivariance action when both sides carry one
    if s1.equivariance is not None and s2.equivariance is not None:
        e1, e2 = s1.equivariance, s2.equivariance
        if e1.actor.order != e2.actor.order:
            return None
        for (a1, p1, m1), (a2, p2, m2) in zip(e1.generator_data(M1), e2.generator_data(M2)):
            if not np.array_equal(p1.perm, p2.perm):
                return None
            left = (phi @ m1) % M2.factors[:, None]
            right = (m2 @ phi) % M2.factors[:, None]
            if not np.array_equal(left, right):
                return None
    return phi


def subgroup_preimage_check(s: IYBStructure, submodule_rows: np.ndarray) -> Report:
    """Verify chi^-1(S) is a subgroup, for a submodule S given by spanning rows."""
    M = s.module
    G = s.group
    mc = M.cover_modulus()
    rows = list(np.atleast_2d(np.asarray(submodule_rows, dtype=np.int64))) + [
        np.eye(M.rank, dtype=np.int64)[i] * int(M.factors[i]) for i in range(M.rank)
    ]
    basis = howell_form(rows, mc, M.rank)
    residues = basis.reduce(s.table % mc)
    members = np.nonzero(~np.any(residues, axis=1))[0]
    member_set = set(int(x) for x in members)
    if 0 not in member_set:
        return Report(False, "subgroup-preimage", witness=0, detail="identity missing")
    for x in members:
        if G.inv(int(x)) not in member_set:
            return Report(False, "subgroup-preimage", witness=int(x), detail="inverse escapes")
        lx = G.left_translation(int(x))
        for y in members:
            if int(lx[y]) not in member_set:
                return Report(False, "subgroup-preimage", witness=(int(x), int(y)), detail="product escapes")
    return Report(True, "subgroup-preimage", detail=f"preimage order {len(member_set)}")


def preimage_of_submodule(s: IYBStructure, submodule_rows: np.ndarray) -> list[int]:
    M = s.module
    mc = M.cover_modulus()
    rows = list(np.atleast_2d(np.asarray(submodule_rows, dtype=np.int64))) + [
        np.eye(M.rank, dtype=np.int64)[i] * int(M.factors[i]) for i in range(M.rank)
    ]
    basis = howell_form(rows, mc, M.rank)
    residues = basis.reduce(s.table % mc)
    return [int(x) for x in np.nonzero(~np.any(residues, axis=1))[0]]


def enumerate_submodules(module: GModule, limit: int = 4096) -> list[HowellBasis]:
    """All G-stable subgroups of M, as Howell bases over the cover modulus.

    Join-closure of cyclic submodules; intended for small modules only.
    """
    if module.size() > limit:
        raise VerificationError("module too large for submodule enumeration")
    mc = module.cover_modulus()
    den = [np.eye(module.rank, dtype=np.int64)[i] * int(module.factors[i]) for i in range(module.rank)]
    elements = module.enumerate_elements()
    seen: dict[bytes, HowellBasis] = {}
    zero = howell_form(den, mc, module.rank)
    seen[zero.key()] = zero
    cyclics = [zero]
    for v in elements:
        b = howell_form([v] + den, mc, module.rank)
        if b.key() not in seen:
            seen[b.key()] = b
            cyclics.append(b)
    frontier = list(seen.values())
    while frontier:
        new = []
        for b1 in frontier:
            for b2 in cyclics:
                j = span_sum(b1, b2)
                if j.key() not in seen:
                    seen[j.key()] = j
                    new.append(j)
        frontier = new
    # keep the G-stable ones
    out = []
    for b in seen.values():
        stable = True
        for mat in module.gen_actions:
            moved = (b.rows @ mat.T) % mc
            if not b.contains_all(moved):
                stable = False
                break
        if stable:
            out.append(b)
    out.sort(key=lambda b: (b.span_size(), b.key()))
    return out


def central_socle_check(s: IYBStructure) -> Report:
    """For central z and every g: g.chi(z) = chi(z) (cocycle-law consequence)."""
    from .groups import center

    G, M, T = s.group, s.module, s.table
    for z in center(G):
        target = T[z]
        for g in G.generators():
            if not np.array_equal(M.apply(M.matrix_of(g), target), target):
                return Report(False, "central-socle", witness=(int(z), int(g)))
    return Report(True, "central-socle")
