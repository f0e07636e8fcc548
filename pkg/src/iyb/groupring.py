"""Modular group rings (Z/m)G and their augmentation-ideal filtration.

Ring elements are coefficient vectors over the group-element basis, one
coordinate per element index.  Left multiplication by a group element is a
coordinate permutation, which keeps all ideal computations inside the Howell
toolkit: the augmentation ideal omega is spanned by {1 - g}, its powers are
built from one-sided products by generators followed by left-ideal closure,
and quotients are presented through Smith normal form.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Optional, Sequence

import numpy as np
from sympy import factorint

from .groups import Group, GroupAction, GroupError, subgroup_closure
from .zklinalg import (
    ElementaryQuotient,
    HowellBasis,
    NotASummandError,
    QuotientPresentation,
    complement_submodule,
    howell_form,
    span_intersection,
    span_sum,
    zero_basis,
)


class ResourceBoundError(RuntimeError):
    pass


class GroupRing:
    """(Z/m)G with coefficient vectors indexed by group elements."""

    def __init__(self, group: Group, modulus: int):
        if modulus < 2:
            raise ValueError("modulus must be at least 2")
        self.group = group
        self.modulus = modulus
        self.dim = group.order
        self._gen_left: Optional[dict[int, np.ndarray]] = None
        self._filtration: dict[int, HowellBasis] = {}
        self._lock = threading.Lock()

    # -- elements -----------------------------------------------------------

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.int64)

    def basis_element(self, g: int) -> np.ndarray:
        v = self.zero()
        v[g] = 1
        return v

    def one_minus(self, g: int) -> np.ndarray:
        """The standard augmentation-zero element 1 - g."""
        v = self.zero()
        v[0] += 1
        v[g] -= 1
        return v % self.modulus

    def augmentation(self, vec: np.ndarray) -> int:
        return int(np.sum(vec) % self.modulus)

    def _gen_translations(self) -> dict[int, np.ndarray]:
        if self._gen_left is None:
            self._gen_left = {
                g: self.group.left_translation(g) for g in self.group.generators()
            }
        return self._gen_left

    def left_mult_element(self, g: int, vecs: np.ndarray) -> np.ndarray:
        """g * x for one or many coefficient vectors (rows)."""
        perm = self.group.left_translation(g)
        return self._permute(perm, vecs)

    @staticmethod
    def _permute(perm: np.ndarray, vecs: np.ndarray) -> np.ndarray:
        vecs = np.asarray(vecs, dtype=np.int64)
        out = np.empty_like(vecs)
        if vecs.ndim == 1:
            out[perm] = vecs
        else:
            out[:, perm] = vecs
        return out

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Full ring product (used by oracles and small checks only)."""
        m = self.modulus
        out = self.zero()
        for g in np.nonzero(a)[0]:
            perm = self.group.left_translation(int(g))
            out[perm] = (out[perm] + int(a[g]) * b) % m
        return out % m

    # -- ideals ---------------------------------------------------------------

    def left_ideal_closure(self, rows: Iterable[np.ndarray]) -> HowellBasis:
        """Smallest left ideal containing the rows, as a Howell basis."""
        basis = howell_form(list(rows), self.modulus, self.dim)
        gens = self._gen_translations()
        while True:
            new_rows = []
            for perm in gens.values():
                moved = self._permute(perm, basis.rows)
                residues = basis.reduce(moved)
                for i in range(moved.shape[0]):
                    if np.any(residues[i]):
                        new_rows.append(moved[i])
            if not new_rows:
                return basis
            basis = howell_form(
                np.vstack([basis.rows] + [np.atleast_2d(r) for r in new_rows]),
                self.modulus,
                self.dim,
            )

    def left_ideal_closure_check(self, basis: HowellBasis) -> bool:
        """True when the span is stable under left multiplication by generators."""
        if basis.nrows == 0:
            return True
        for perm in self._gen_translations().values():
            if not basis.contains_all(self._permute(perm, basis.rows)):
                return False
        return True

    def omega_power(self, i: int, max_dim_log: float = 24.0) -> HowellBasis:
        """Canonical basis of omega^i for i in 1..3 (computed lazily)."""
        if not 1 <= i <= 3:
            raise ValueError("filtration depth is capped at 3")
        import math

        if i * math.log2(self.group.order) > max_dim_log:
            raise ResourceBoundError(
                f"omega^{i} for |G| = {self.group.order} exceeds the configured bound"
            )
        with self._lock:
            if i in self._filtration:
                return self._filtration[i]
        if i == 1:
            rows = [self.one_minus(g) for g in range(1, self.group.order)]
            result = howell_form(rows, self.modulus, self.dim)
        else:
            prev = self.omega_power(i - 1)
            rows = []
            for g, perm in self._gen_translations().items():
                rows.append((prev.rows - self._permute(perm, prev.rows)) % self.modulus)
            result = self.left_ideal_closure(np.vstack(rows) if rows else [])
        with self._lock:
            self._filtration[i] = result
        return result

    def omega(self) -> HowellBasis:
        return self.omega_power(1)

    def one_minus_all(self) -> np.ndarray:
        """Matrix whose row g is 1 - g (including the zero row for g = 0)."""
        m = np.zeros((self.group.order, self.dim), dtype=np.int64)
        m[:, 0] = 1
        m[np.arange(self.group.order), np.arange(self.group.order)] -= 1
        return m % self.modulus


@dataclass
class AugFiltration:
    """The chain omega >= omega^2 >= omega^3 with lazily built layers."""

    ring: GroupRing
    depth: int = 3

    def layer(self, i: int) -> HowellBasis:
        if not 1 <= i <= self.depth:
            raise ValueError(f"layer {i} outside 1..{self.depth}")
        return self.ring.omega_power(i)

    def check_chain(self) -> bool:
        for i in range(1, self.depth):
            if not self.layer(i).contains_all(self.layer(i + 1).rows):
                return False
        return True


@dataclass
class LeftIdeal:
    """A left ideal presented by a Howell basis inside (Z/m)G."""

    ring: GroupRing
    basis: HowellBasis

    def __post_init__(self):
        if self.basis.width != self.ring.dim or self.basis.modulus != self.ring.modulus:
            raise ValueError("basis does not match the ring")

    def verify_closure(self) -> bool:
        return self.ring.left_ideal_closure_check(self.basis)

    def contains(self, vec: np.ndarray) -> bool:
        return self.basis.contains(vec)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def abelianization_iso_check(ring: GroupRing) -> dict:
    """Verify g[G,G] -> 1 - g + omega^2 is an isomorphism G/[G,G] -> omega/omega^2.

    Returns a report dict with ok flag, the coset count, and witnesses for
    the first failure if any.
    """
    G = ring.group
    omega2 = ring.omega_power(2)
    ones = ring.one_minus_all()
    residues = omega2.reduce(ones)
    from .groups import derived_subgroup

    derived = derived_subgroup(G)
    # coset labels for G/[G,G]
    label = np.full(G.order, -1, dtype=np.int64)
    next_label = 0
    for x in range(G.order):
        if label[x] >= 0:
            continue
        for d in derived:
            label[G.mult(x, d)] = next_label
        next_label += 1
    # well-defined + injective: residues agree exactly on cosets
    res_keys = [residues[x].tobytes() for x in range(G.order)]
    coset_of_key: dict[bytes, int] = {}
    for x in range(G.order):
        k = res_keys[x]
        if k in coset_of_key:
            if coset_of_key[k] != label[x]:
                return {"ok": False, "reason": "not injective on cosets", "witness": x}
        else:
            coset_of_key[k] = int(label[x])
    if len(coset_of_key) != next_label:
        return {"ok": False, "reason": "not well defined", "witness": None}
    # homomorphism: residue(1-gh) = residue(1-g) + residue(1-h)
    for g in range(G.order):
        lg = G.left_translation(g)
        sums = omega2.reduce((ones[g][None, :] + ones) % ring.modulus)
        target = residues[lg]
        if not np.array_equal(sums, target):
            h = int(np.nonzero(np.any(sums != target, axis=1))[0][0])
            return {"ok": False, "reason": "not additive", "witness": (g, h)}
    # surjective: the image size must be the full quotient size
    index = omega2.span_size()
    total = ring.omega().span_size()
    if total % index != 0 or total // index != next_label:
        return {
            "ok": False,
            "reason": "image does not fill omega/omega^2",
            "witness": (total // index, next_label),
        }
    return {"ok": True, "cosets": next_label, "quotient_size": total // index}


def dimension_subgroup_probe(ring: GroupRing, i: int) -> list[int]:
    """{g : 1 - g lies in omega^i}, computed by batched membership."""
    if i not in (2, 3):
        raise ValueError("probe defined for i = 2, 3")
    layer = ring.omega_power(i)
    residues = layer.reduce(ring.one_minus_all())
    hits = np.nonzero(~np.any(residues, axis=1))[0]
    return [int(h) for h in hits]


# ---------------------------------------------------------------------------
# Preimages and radicals
# ---------------------------------------------------------------------------


def left_ideal_preimage(
    ring: GroupRing,
    quotient_ring: GroupRing,
    proj: np.ndarray,
    section: np.ndarray,
    ideal_basis: HowellBasis,
) -> HowellBasis:
    """Preimage of a left ideal of (Z/m)(G/N) under the natural projection.

    proj maps G-element indices to quotient indices; section picks one
    representative per quotient element.  The preimage is spanned by lifts of
    the ideal's rows together with the kernel generators (1 - n) g.
    """
    G = ring.group
    m = ring.modulus
    if quotient_ring.modulus != m:
        raise ValueError("modulus mismatch")
    rows = []
    for r in ideal_basis.rows:
        lifted = ring.zero()
        lifted[section] = r
        rows.append(lifted)
    # kernel generators: (1 - n) g = g - n g over coset representatives g
    fibers: dict[int, list[int]] = {}
    for x in range(G.order):
        fibers.setdefault(int(proj[x]), []).append(x)
    for q, members in fibers.items():
        g0 = int(section[q])
        for x in members:
            if x == g0:
                continue
            row = ring.zero()
            row[g0] += 1
            row[x] -= 1
            rows.append(row % m)
    pre = howell_form(rows, m, ring.dim)
    return pre


def radical_of(ring: GroupRing, ideal: HowellBasis) -> HowellBasis:
    """rad J = pJ + omega J for a p-group ring with modulus p^k."""
    fac = factorint(ring.group.order)
    if len(fac) != 1:
        raise GroupError("radical formula requires a p-group")
    (p,) = fac.keys()
    if ring.modulus % p != 0:
        raise GroupError("modulus must be a power of the group prime")
    if ideal.nrows == 0:
        return zero_basis(ring.modulus, ring.dim)
    rows = [(p * ideal.rows) % ring.modulus]
    for g, perm in ring._gen_translations().items():
        rows.append((ideal.rows - GroupRing._permute(perm, ideal.rows)) % ring.modulus)
    return ring.left_ideal_closure(np.vstack(rows))


def group_prime(G: Group) -> int:
    fac = factorint(G.order)
    if len(fac) != 1:
        raise GroupError(f"{G.name} is not a p-group")
    return int(next(iter(fac.keys())))


# ---------------------------------------------------------------------------
# The splitting of 1 - N' inside omega^2/omega^3
# ---------------------------------------------------------------------------


@dataclass
class SandlingSplit:
    """S + C = omega^2 with S ^ C = omega^3, S spanned by {1 - n : n in N'}."""

    ring: GroupRing
    S: HowellBasis          # ambient basis, contains omega^3
    C: HowellBasis          # ambient basis, contains omega^3
    omega2: HowellBasis
    omega3: HowellBasis


def sandling_complement(ring: GroupRing) -> SandlingSplit:
    """Construct the pure complement of 1 - [N,N] inside omega^2/omega^3.

    Requires a p-group of nilpotency class at most 2.  The subgroup generated
    by the classes of 1 - n for n in the derived subgroup is verified to be
    exactly that set of classes (the product identity
    (1-m) + (1-n) = (1-mn) + (1-m)(1-n) makes the set a subgroup mod
    omega^3); failure to split is a hard error since the splitting always
    exists for class <= 2.
    """
    G = ring.group
    m = ring.modulus
    from .groups import lower_central_series

    lcs = lower_central_series(G)
    if len(lcs) - 1 > 2:
        raise GroupError("group has nilpotency class > 2")
    derived = lcs[1]
    omega2 = ring.omega_power(2)
    omega3 = ring.omega_power(3)
    one_minus_derived = np.array([ring.one_minus(n) for n in derived], dtype=np.int64)
    if not omega2.contains_all(one_minus_derived):
        raise GroupError("1 - [G,G] does not lie in omega^2 at this modulus")
    S = howell_form(
        np.vstack([one_minus_derived, omega3.rows]), m, ring.dim
    )
    # set check: the classes of 1 - n must exhaust S/omega^3
    expected = {omega3.reduce(v).tobytes() for v in one_minus_derived}
    span_classes = set()
    q = QuotientPresentation(m, S, omega3)
    if q.size() != len(expected):
        raise GroupError("span of 1 - N' mod omega^3 is not the set itself")
    for y in _iterate_coords(q.factors):
        span_classes.add(omega3.reduce(q.lift(np.array(y, dtype=np.int64))).tobytes())
    if span_classes != expected:
        raise GroupError("span of 1 - N' mod omega^3 differs from the set of classes")
    try:
        C = complement_submodule(S, omega2, omega3, m)
    except NotASummandError as exc:
        raise GroupError(
            "1 - N' failed to split off omega^2/omega^3; this contradicts the "
            "splitting theorem and indicates an implementation or modulus bug"
        ) from exc
    return SandlingSplit(ring, S, C, omega2, omega3)


def _iterate_coords(factors: Sequence[int]):
    if not factors:
        yield ()
        return
    import itertools

    yield from itertools.product(*[range(f) for f in factors])
