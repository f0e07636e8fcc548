"""Finite groups with 0-based indexed elements, plus automorphisms and actions.

Every group exposes total multiplication and inversion on element indices,
with the identity always at index 0.  Structured constructors (cyclic,
abelian, dihedral, dicyclic, Heisenberg, products) use mixed-radix
coordinate encodings so element indices are stable; Cayley tables are only
materialized on demand and only for small orders.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Iterable, Optional, Sequence

import numpy as np
from sympy import isprime

TABLE_LIMIT = 4096  # largest order for which a full Cayley table is built

Word = tuple[int, ...]           # generator positions, evaluated left to right
Relation = tuple[Word, Word]     # words with equal products


class GroupError(ValueError):
    pass


class Group:
    """Base class; subclasses define order, mult and inv on indices."""

    order: int
    name: str

    def mult(self, x: int, y: int) -> int:
        raise NotImplementedError

    def inv(self, x: int) -> int:
        raise NotImplementedError

    def generators(self) -> tuple[int, ...]:
        raise NotImplementedError

    def generator_relations(self) -> Optional[list[Relation]]:
        """Defining relations over generators(), or None for table groups."""
        return None

    def factorize(self, x: int) -> Word:
        """A word in generators() multiplying out to element x."""
        return self._bfs_words()[x]

    # -- generic helpers ----------------------------------------------------

    def check_index(self, x: int) -> int:
        x = int(x)
        if not 0 <= x < self.order:
            raise GroupError(f"element index {x} out of range for order {self.order}")
        return x

    def elements(self) -> range:
        return range(self.order)

    def left_translation(self, g: int) -> np.ndarray:
        """Array L with L[h] = g*h for all h."""
        return np.array([self.mult(g, h) for h in self.elements()], dtype=np.int64)

    def right_translation(self, g: int) -> np.ndarray:
        return np.array([self.mult(h, g) for h in self.elements()], dtype=np.int64)

    def mult_arrays(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Elementwise products of two index arrays."""
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        return np.array([self.mult(int(a), int(b)) for a, b in zip(xs.ravel(), ys.ravel())],
                        dtype=np.int64).reshape(xs.shape)

    def inverses(self) -> np.ndarray:
        return np.array([self.inv(x) for x in self.elements()], dtype=np.int64)

    def element_order(self, x: int) -> int:
        n = 1
        y = x
        while y != 0:
            y = self.mult(y, x)
            n += 1
        return n

    def power(self, x: int, e: int) -> int:
        if e < 0:
            x, e = self.inv(x), -e
        acc = 0
        while e:
            if e & 1:
                acc = self.mult(acc, x)
            x = self.mult(x, x)
            e >>= 1
        return acc

    def evaluate_word(self, word: Word) -> int:
        gens = self.generators()
        acc = 0
        for pos in word:
            acc = self.mult(acc, gens[pos])
        return acc

    @lru_cache(maxsize=None)
    def _bfs_words(self) -> list[Word]:
        """Positive generator words for every element, by Cayley-graph BFS."""
        gens = self.generators()
        words: list[Optional[Word]] = [None] * self.order
        words[0] = ()
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                wx = words[x]
                for i, g in enumerate(gens):
                    y = self.mult(x, g)
                    if words[y] is None:
                        words[y] = wx + (i,)
                        nxt.append(y)
            frontier = nxt
        if any(w is None for w in words):
            raise GroupError("generating set does not generate the group")
        return words  # type: ignore[return-value]

    def mult_table(self) -> np.ndarray:
        if self.order > TABLE_LIMIT:
            raise GroupError(f"refusing to build a {self.order}x{self.order} table")
        return self._table_cache()

    @lru_cache(maxsize=None)
    def _table_cache(self) -> np.ndarray:
        t = np.empty((self.order, self.order), dtype=np.int64)
        for g in self.elements():
            t[g] = self.left_translation(g)
        t.setflags(write=False)
        return t

    def spec_string(self) -> Optional[str]:
        """CLI spec that reconstructs this group, when one exists."""
        return None

    def __repr__(self):
        return f"<{self.name}: order {self.order}>"


# ---------------------------------------------------------------------------
# Concrete families
# ---------------------------------------------------------------------------


class CyclicGroup(Group):
    def __init__(self, n: int):
        if n < 1:
            raise GroupError("cyclic group order must be positive")
        self.order = n
        self.name = f"C{n}"

    def mult(self, x, y):
        return (x + y) % self.order

    def inv(self, x):
        return (-x) % self.order

    def generators(self):
        return (1 % self.order,) if self.order > 1 else ()

    def generator_relations(self):
        if self.order == 1:
            return []
        return [((0,) * self.order, ())]

    def factorize(self, x):
        return (0,) * (x % self.order)

    def left_translation(self, g):
        return (np.arange(self.order, dtype=np.int64) + g) % self.order

    def spec_string(self):
        return f"cyclic:{self.order}"


class AbelianGroup(Group):
    """Direct product of cyclic groups, mixed-radix indexing."""

    def __init__(self, factors: Sequence[int]):
        factors = tuple(int(f) for f in factors)
        if not factors or any(f < 1 for f in factors):
            raise GroupError("abelian factors must be positive")
        self.factors = factors
        self.order = int(np.prod(factors))
        self.name = "x".join(f"C{f}" for f in factors)
        self._radix = np.array(factors, dtype=np.int64)

    def decode(self, x: int) -> np.ndarray:
        out = np.empty(len(self.factors), dtype=np.int64)
        for i in range(len(self.factors) - 1, -1, -1):
            out[i] = x % self.factors[i]
            x //= self.factors[i]
        return out

    def encode(self, coords: np.ndarray) -> int:
        x = 0
        for i, f in enumerate(self.factors):
            x = x * f + int(coords[i]) % f
        return x

    def mult(self, x, y):
        return self.encode(self.decode(x) + self.decode(y))

    def inv(self, x):
        return self.encode(-self.decode(x))

    def generators(self):
        gens = []
        for i, f in enumerate(self.factors):
            if f > 1:
                e = np.zeros(len(self.factors), dtype=np.int64)
                e[i] = 1
                gens.append(self.encode(e))
        return tuple(gens)

    def generator_relations(self):
        rels: list[Relation] = []
        pos = 0
        positions = []
        for f in self.factors:
            if f > 1:
                positions.append((pos, f))
                pos += 1
        for i, (p, f) in enumerate(positions):
            rels.append(((p,) * f, ()))
            for q, _ in positions[i + 1 :]:
                rels.append(((p, q), (q, p)))
        return rels

    def factorize(self, x):
        coords = self.decode(x)
        word: list[int] = []
        pos = 0
        for i, f in enumerate(self.factors):
            if f > 1:
                word.extend([pos] * int(coords[i]))
                pos += 1
        return tuple(word)

    def spec_string(self):
        return "abelian:" + "x".join(str(f) for f in self.factors)


class DihedralGroup(Group):
    """Dihedral group of the given order 2k: rotations r^i and flips r^i s."""

    def __init__(self, order: int):
        if order < 2 or order % 2:
            raise GroupError("dihedral order must be even and >= 2")
        self.order = order
        self.k = order // 2
        self.name = f"D{order}"

    def _dec(self, x):
        return divmod(x, 2)

    def _enc(self, i, j):
        return (i % self.k) * 2 + (j % 2)

    def mult(self, x, y):
        i1, j1 = self._dec(x)
        i2, j2 = self._dec(y)
        sign = -1 if j1 else 1
        return self._enc(i1 + sign * i2, j1 + j2)

    def inv(self, x):
        i, j = self._dec(x)
        return self._enc(i if j else -i, j)

    def generators(self):
        return (self._enc(1, 0), self._enc(0, 1))

    def generator_relations(self):
        k = self.k
        return [((0,) * k, ()), ((1, 1), ()), ((1, 0, 1), (0,) * (k - 1))]

    def factorize(self, x):
        i, j = self._dec(x)
        return (0,) * i + (1,) * j

    def spec_string(self):
        return f"dihedral:{self.order}"


class DicyclicGroup(Group):
    """Dicyclic group of order 4m: a^(2m) = e, b^2 = a^m, b a b^-1 = a^-1.

    DicyclicGroup(8) is the quaternion group.
    """

    def __init__(self, order: int):
        if order < 8 or order % 4:
            raise GroupError("dicyclic order must be a multiple of 4, at least 8")
        self.order = order
        self.m = order // 4
        self.name = f"Dic{order}" if order != 8 else "Q8"

    def _dec(self, x):
        return divmod(x, 2)

    def _enc(self, i, j):
        return (i % (2 * self.m)) * 2 + (j % 2)

    def mult(self, x, y):
        i1, j1 = self._dec(x)
        i2, j2 = self._dec(y)
        sign = -1 if j1 else 1
        i = i1 + sign * i2 + (self.m if (j1 and j2) else 0)
        return self._enc(i, j1 ^ j2)

    def inv(self, x):
        i, j = self._dec(x)
        if j == 0:
            return self._enc(-i, 0)
        return self._enc(self.m + i, 1)

    def generators(self):
        return (self._enc(1, 0), self._enc(0, 1))

    def generator_relations(self):
        m = self.m
        return [
            ((0,) * (2 * m), ()),
            ((1, 1), (0,) * m),
            ((1, 0), (0,) * (2 * m - 1) + (1,)),
        ]

    def factorize(self, x):
        i, j = self._dec(x)
        return (0,) * i + (1,) * j

    def spec_string(self):
        return "quaternion" if self.order == 8 else None


class HeisenbergGroup(Group):
    """Unitriangular 3x3 matrices over Z/q via coordinates (n1, n2, n3).

    Product rule: (n1,n2,n3)*(m1,m2,m3) = (n1+m1, n2+m2, n3+m3+n2*m1), all
    mod q.  Generators d1 = (1,0,0), d2 = (0,1,0), d3 = (0,0,1) satisfy
    d1^-1 d2 d1 = d2 d3 with d3 central.  Element index is the mixed-radix
    encoding n1*q^2 + n2*q + n3, so identity is 0.  All arithmetic is done on
    coordinates; no Cayley table is ever built.
    """

    def __init__(self, q: int):
        if q < 3 or not isprime(q) or q % 2 == 0:
            raise GroupError("Heisenberg parameter must be an odd prime")
        self.q = q
        self.order = q**3
        self.name = f"Heis{q}"

    def decode(self, x) -> tuple[int, int, int]:
        n3 = x % self.q
        x //= self.q
        n2 = x % self.q
        n1 = x // self.q
        return n1, n2, n3

    def encode(self, n1, n2, n3) -> int:
        q = self.q
        return ((n1 % q) * q + (n2 % q)) * q + (n3 % q)

    def mult(self, x, y):
        n1, n2, n3 = self.decode(x)
        m1, m2, m3 = self.decode(y)
        return self.encode(n1 + m1, n2 + m2, n3 + m3 + n2 * m1)

    def inv(self, x):
        n1, n2, n3 = self.decode(x)
        return self.encode(-n1, -n2, -n3 + n2 * n1)

    def coordinate_grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        idx = np.arange(self.order, dtype=np.int64)
        n3 = idx % self.q
        rest = idx // self.q
        return rest // self.q, rest % self.q, n3

    def encode_arrays(self, n1, n2, n3) -> np.ndarray:
        q = self.q
        return ((n1 % q) * q + (n2 % q)) * q + (n3 % q)

    def left_translation(self, g):
        g1, g2, g3 = self.decode(g)
        n1, n2, n3 = self.coordinate_grid()
        return self.encode_arrays(g1 + n1, g2 + n2, g3 + n3 + g2 * n1)

    def right_translation(self, g):
        g1, g2, g3 = self.decode(g)
        n1, n2, n3 = self.coordinate_grid()
        return self.encode_arrays(n1 + g1, n2 + g2, n3 + g3 + n2 * g1)

    def mult_arrays(self, xs, ys):
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        q = self.q
        x3, x2, x1 = xs % q, (xs // q) % q, xs // (q * q)
        y3, y2, y1 = ys % q, (ys // q) % q, ys // (q * q)
        return self.encode_arrays(x1 + y1, x2 + y2, x3 + y3 + x2 * y1)

    def generators(self):
        return (self.encode(1, 0, 0), self.encode(0, 1, 0), self.encode(0, 0, 1))

    def generator_relations(self):
        q = self.q
        return [
            ((0,) * q, ()),
            ((1,) * q, ()),
            ((2,) * q, ()),
            ((1, 0), (0, 1, 2)),   # d2 d1 = d1 d2 d3
            ((2, 0), (0, 2)),      # d3 central
            ((2, 1), (1, 2)),
        ]

    def factorize(self, x):
        n1, n2, n3 = self.decode(x)
        return (0,) * n1 + (1,) * n2 + (2,) * n3

    def spec_string(self):
        return f"heis:{self.q}"


class TableGroup(Group):
    """Group defined by an explicit Cayley table (identity must be index 0)."""

    def __init__(self, table: np.ndarray, name: str = "table", validate: bool = True,
                 sample_seed: int = 0xA55):
        t = np.asarray(table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise GroupError("Cayley table must be square")
        self.order = t.shape[0]
        self.name = name
        self._table = t
        self._table.setflags(write=False)
        if validate:
            self._validate(sample_seed)
        self._inv = self._compute_inverses()
        self._gens: Optional[tuple[int, ...]] = None

    def _validate(self, sample_seed: int):
        t = self._table
        n = self.order
        if np.any(t < 0) or np.any(t >= n):
            raise GroupError("table entries out of range")
        if not np.array_equal(t[0], np.arange(n)) or not np.array_equal(t[:, 0], np.arange(n)):
            raise GroupError("index 0 is not a two-sided identity")
        # rows and columns must be permutations
        srt = np.sort(t, axis=1)
        if not np.all(srt == np.arange(n)[None, :]):
            raise GroupError("a table row is not a permutation")
        srt = np.sort(t, axis=0)
        if not np.all(srt == np.arange(n)[:, None]):
            raise GroupError("a table column is not a permutation")
        if n <= 256:
            for a in range(n):
                left = t[t[a], :]
                right = t[a, :][t]
                if not np.array_equal(left, right):
                    b, c = np.argwhere(left != right)[0]
                    raise GroupError(f"associativity fails at triple ({a},{b},{c})")
        else:
            rng = np.random.default_rng(sample_seed)
            a = rng.integers(0, n, size=100_000)
            b = rng.integers(0, n, size=100_000)
            c = rng.integers(0, n, size=100_000)
            if not np.array_equal(t[t[a, b], c], t[a, t[b, c]]):
                bad = np.argwhere(t[t[a, b], c] != t[a, t[b, c]])[0][0]
                raise GroupError(
                    f"associativity fails at triple ({a[bad]},{b[bad]},{c[bad]})"
                )

    def _compute_inverses(self):
        inv = np.empty(self.order, dtype=np.int64)
        rows, cols = np.nonzero(self._table == 0)
        inv[rows] = cols
        return inv

    def mult(self, x, y):
        return int(self._table[x, y])

    def inv(self, x):
        return int(self._inv[x])

    def left_translation(self, g):
        return self._table[g].copy()

    def right_translation(self, g):
        return self._table[:, g].copy()

    def mult_arrays(self, xs, ys):
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        return self._table[xs, ys]

    def mult_table(self):
        return self._table

    def generators(self):
        if self._gens is None:
            gens: list[int] = []
            reached = {0}
            for x in range(1, self.order):
                if x not in reached:
                    gens.append(x)
                    frontier = list(reached)
                    reached.add(x)
                    frontier.append(x)
                    while frontier:
                        y = frontier.pop()
                        for g in gens:
                            for z in (self.mult(y, g), self.mult(g, y)):
                                if z not in reached:
                                    reached.add(z)
                                    frontier.append(z)
                if len(reached) == self.order:
                    break
            self._gens = tuple(gens)
        return self._gens


class DirectProductGroup(Group):
    """Direct product, first component most significant in the index."""

    def __init__(self, groups: Sequence[Group], name: Optional[str] = None):
        self.groups = list(groups)
        if not self.groups:
            raise GroupError("empty product")
        self.order = int(np.prod([g.order for g in self.groups]))
        self.name = name or " x ".join(g.name for g in self.groups)

    def decode(self, x: int) -> list[int]:
        out = []
        for g in reversed(self.groups):
            out.append(x % g.order)
            x //= g.order
        return out[::-1]

    def encode(self, comps: Sequence[int]) -> int:
        x = 0
        for g, c in zip(self.groups, comps):
            x = x * g.order + int(c)
        return x

    def mult(self, x, y):
        xs, ys = self.decode(x), self.decode(y)
        return self.encode([g.mult(a, b) for g, a, b in zip(self.groups, xs, ys)])

    def inv(self, x):
        return self.encode([g.inv(a) for g, a in zip(self.groups, self.decode(x))])

    def embed(self, i: int, x: int) -> int:
        comps = [0] * len(self.groups)
        comps[i] = x
        return self.encode(comps)

    def generators(self):
        gens = []
        for i, g in enumerate(self.groups):
            gens.extend(self.embed(i, gi) for gi in g.generators())
        return tuple(gens)

    def generator_relations(self):
        rels: list[Relation] = []
        offsets = []
        pos = 0
        for g in self.groups:
            offsets.append(pos)
            pos += len(g.generators())
        for i, g in enumerate(self.groups):
            sub = g.generator_relations()
            if sub is None:
                return None
            off = offsets[i]
            for lhs, rhs in sub:
                rels.append((tuple(off + p for p in lhs), tuple(off + p for p in rhs)))
            for j in range(i + 1, len(self.groups)):
                for a in range(len(g.generators())):
                    for b in range(len(self.groups[j].generators())):
                        rels.append(
                            ((offsets[i] + a, offsets[j] + b), (offsets[j] + b, offsets[i] + a))
                        )
        return rels

    def factorize(self, x):
        word: list[int] = []
        pos = 0
        for g, c in zip(self.groups, self.decode(x)):
            word.extend(pos + p for p in g.factorize(c))
            pos += len(g.generators())
        return tuple(word)


# ---------------------------------------------------------------------------
# Automorphisms and actions
# ---------------------------------------------------------------------------


class Automorphism:
    """A group automorphism stored as a permutation of element indices."""

    def __init__(self, group: Group, perm: np.ndarray, validate: bool = True):
        self.group = group
        self.perm = np.asarray(perm, dtype=np.int64)
        self.perm.setflags(write=False)
        if validate:
            self.validate()

    def validate(self):
        g = self.group
        p = self.perm
        n = g.order
        if p.shape != (n,):
            raise GroupError("permutation length mismatch")
        if np.any(np.sort(p) != np.arange(n)):
            raise GroupError("map is not a permutation")
        if p[0] != 0:
            raise GroupError("automorphism must fix the identity")
        # morphism check on (generator, everything) pairs; induction on word
        # length extends it to all pairs.
        for s in g.generators():
            ls = g.left_translation(s)
            lphi = g.left_translation(int(p[s]))
            if not np.array_equal(p[ls], lphi[p]):
                h = int(np.nonzero(p[ls] != lphi[p])[0][0])
                raise GroupError(f"not a homomorphism at pair ({s},{h})")

    def __call__(self, x: int) -> int:
        return int(self.perm[x])

    def apply(self, xs: np.ndarray) -> np.ndarray:
        return self.perm[xs]

    def compose(self, other: "Automorphism") -> "Automorphism":
        """(self . other)(x) = self(other(x))."""
        return Automorphism(self.group, self.perm[other.perm], validate=False)

    def inverse(self) -> "Automorphism":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.group.order)
        return Automorphism(self.group, inv, validate=False)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.perm, np.arange(self.group.order)))

    @staticmethod
    def identity(group: Group) -> "Automorphism":
        return Automorphism(group, np.arange(group.order, dtype=np.int64), validate=False)

    @staticmethod
    def from_generator_images(group: Group, images: dict[int, int]) -> "Automorphism":
        """Extend generator images to the whole group by word evaluation."""
        gens = group.generators()
        img = [images[g] for g in gens]
        perm = np.empty(group.order, dtype=np.int64)
        for x in range(group.order):
            acc = 0
            for pos in group.factorize(x):
                acc = group.mult(acc, img[pos])
            perm[x] = acc
        return Automorphism(group, perm)

    def agrees_on_generators(self, other: "Automorphism") -> bool:
        return all(self(g) == other(g) for g in self.group.generators())


class GroupAction:
    """A homomorphism actor -> Aut(target), given on the actor's generators."""

    def __init__(self, actor: Group, target: Group, gen_images: Sequence[Automorphism],
                 validate: bool = True):
        self.actor = actor
        self.target = target
        self.gen_images = list(gen_images)
        if len(self.gen_images) != len(actor.generators()):
            raise GroupError("one automorphism per actor generator required")
        self._cache: dict[int, Automorphism] = {0: Automorphism.identity(target)}
        if validate:
            self.validate()

    def validate(self):
        rels = self.actor.generator_relations()
        if rels is not None:
            for lhs, rhs in rels:
                a = self._eval_word(lhs)
                b = self._eval_word(rhs)
                if not a.agrees_on_generators(b):
                    raise GroupError(f"action violates relation {lhs} = {rhs}")
        else:
            # no presentation available: check the homomorphism property on
            # all pairs, comparing automorphisms on target generators only
            n = self.actor.order
            if n > 2048:
                raise GroupError("table actor too large for exhaustive action check")
            for a in range(n):
                pa = self.automorphism(a)
                for b in self.actor.generators():
                    ab = self.actor.mult(a, b)
                    comp = pa.compose(self.automorphism(b))
                    if not comp.agrees_on_generators(self.automorphism(ab)):
                        raise GroupError(f"action not a homomorphism at ({a},{b})")

    def _eval_word(self, word: Word) -> Automorphism:
        acc = Automorphism.identity(self.target)
        for pos in word:
            acc = acc.compose(self.gen_images[pos])
        return acc

    def automorphism(self, a: int) -> Automorphism:
        a = self.actor.check_index(a)
        if a not in self._cache:
            self._cache[a] = self._eval_word(self.actor.factorize(a))
        return self._cache[a]

    def __call__(self, a: int, x: int) -> int:
        return self.automorphism(a)(x)

    @staticmethod
    def trivial(actor: Group, target: Group) -> "GroupAction":
        ident = Automorphism.identity(target)
        return GroupAction(actor, target, [ident] * len(actor.generators()), validate=False)


class SemidirectProductGroup(Group):
    """N x| H for a verified action of H on N; index is n * |H| + h."""

    def __init__(self, N: Group, H: Group, action: GroupAction, name: Optional[str] = None):
        if action.actor.order != H.order or action.target.order != N.order:
            raise GroupError("action must let H act on N")
        # the action's own group objects are authoritative for indexing
        self.N = action.target
        self.H = action.actor
        self.action = action
        self.order = N.order * H.order
        self.name = name or f"{N.name} x| {H.name}"
        self._h_autos: dict[int, Automorphism] = {}

    def decode(self, x: int) -> tuple[int, int]:
        return divmod(x, self.H.order)

    def encode(self, n: int, h: int) -> int:
        return n * self.H.order + h

    def _auto(self, h: int) -> Automorphism:
        if h not in self._h_autos:
            self._h_autos[h] = self.action.automorphism(h)
        return self._h_autos[h]

    def mult(self, x, y):
        n1, h1 = self.decode(x)
        n2, h2 = self.decode(y)
        return self.encode(self.N.mult(n1, self._auto(h1)(n2)), self.H.mult(h1, h2))

    def inv(self, x):
        n, h = self.decode(x)
        hinv = self.H.inv(h)
        return self.encode(self._auto(hinv)(self.N.inv(n)), hinv)

    def embed_n(self, n: int) -> int:
        return self.encode(n, 0)

    def embed_h(self, h: int) -> int:
        return self.encode(0, h)

    def generators(self):
        return tuple(self.embed_n(g) for g in self.N.generators()) + tuple(
            self.embed_h(g) for g in self.H.generators()
        )

    def generator_relations(self):
        n_rels = self.N.generator_relations()
        h_rels = self.H.generator_relations()
        if n_rels is None or h_rels is None:
            return None
        n_gens = self.N.generators()
        off = len(n_gens)
        rels: list[Relation] = list(n_rels)
        for lhs, rhs in h_rels:
            rels.append((tuple(off + p for p in lhs), tuple(off + p for p in rhs)))
        # h n h^-1 = action(h)(n) written as h * n = action(h)(n) * h
        for j, h in enumerate(self.H.generators()):
            phi = self.action.gen_images[j]
            for i, n in enumerate(self.N.generators()):
                img_word = self.N.factorize(phi(n))
                rels.append(((off + j, i), tuple(img_word) + (off + j,)))
        return rels

    def factorize(self, x):
        n, h = self.decode(x)
        off = len(self.N.generators())
        return tuple(self.N.factorize(n)) + tuple(off + p for p in self.H.factorize(h))

    def left_translation(self, g):
        n_ord, h_ord = self.N.order, self.H.order
        gn, gh = self.decode(g)
        idx = np.arange(self.order, dtype=np.int64)
        ns, hs = idx // h_ord, idx % h_ord
        phi = self._auto(gh)
        ln = self.N.left_translation(gn)
        new_n = ln[phi.perm[ns]]
        lh = self.H.left_translation(gh)
        return new_n * h_ord + lh[hs]


def semidirect_product(N: Group, H: Group, action: GroupAction, name: Optional[str] = None) -> SemidirectProductGroup:
    return SemidirectProductGroup(N, H, action, name)


class SymmetricGroup(Group):
    """Symmetric group on n points, elements indexed by lexicographic rank.

    Generators are the adjacent transpositions, with the Coxeter relations.
    """

    def __init__(self, n: int):
        if not 1 <= n <= 8:
            raise GroupError("symmetric group supported for 1 <= n <= 8")
        self.n = n
        self.perms = list(itertools.permutations(range(n)))
        self.order = len(self.perms)
        self.name = f"S{n}"
        self._rank = {p: i for i, p in enumerate(self.perms)}

    def perm_of(self, x: int) -> tuple[int, ...]:
        return self.perms[x]

    def index_of(self, perm: Sequence[int]) -> int:
        return self._rank[tuple(perm)]

    def mult(self, x, y):
        p, q = self.perms[x], self.perms[y]
        return self._rank[tuple(p[q[i]] for i in range(self.n))]

    def inv(self, x):
        p = self.perms[x]
        inv = [0] * self.n
        for i, v in enumerate(p):
            inv[v] = i
        return self._rank[tuple(inv)]

    def generators(self):
        gens = []
        for i in range(self.n - 1):
            t = list(range(self.n))
            t[i], t[i + 1] = t[i + 1], t[i]
            gens.append(self._rank[tuple(t)])
        return tuple(gens)

    def generator_relations(self):
        rels: list[Relation] = []
        k = self.n - 1
        for i in range(k):
            rels.append(((i, i), ()))
        for i in range(k - 1):
            rels.append(((i, i + 1) * 3, ()))
        for i in range(k):
            for j in range(i + 2, k):
                rels.append(((i, j, i, j), ()))
        return rels


# ---------------------------------------------------------------------------
# Structure computations
# ---------------------------------------------------------------------------


def commutator(G: Group, a: int, b: int) -> int:
    """[a, b] = a^-1 b^-1 a b."""
    return G.mult(G.mult(G.inv(a), G.inv(b)), G.mult(a, b))


def conjugate(G: Group, a: int, x: int) -> int:
    """Left conjugation action ^a x = a x a^-1."""
    return G.mult(G.mult(a, x), G.inv(a))


def sqrt_odd(G: Group, x: int) -> int:
    """The unique square root of x inside <x>, for x of odd order."""
    n = G.element_order(x)
    if n % 2 == 0:
        raise GroupError(f"element has even order {n}")
    return G.power(x, (n + 1) // 2)


def subgroup_closure(G: Group, seed: Iterable[int]) -> list[int]:
    """Sorted element list of the subgroup generated by the seed."""
    members = {0}
    frontier = [0]
    gens = sorted(set(int(s) for s in seed))
    for s in gens:
        if s not in members:
            members.add(s)
            frontier.append(s)
    while frontier:
        x = frontier.pop()
        for s in gens:
            for y in (G.mult(x, s), G.mult(s, x)):
                if y not in members:
                    members.add(y)
                    frontier.append(y)
    # closing under the generators only is enough: the set is finite and
    # closed under right multiplication by generators, hence a subgroup
    return sorted(members)


def normal_closure(G: Group, seed: Iterable[int]) -> list[int]:
    gens = G.generators()
    members = set(subgroup_closure(G, seed))
    frontier = list(members)
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = conjugate(G, g, x)
            if y not in members:
                new = subgroup_closure(G, list(members) + [y])
                frontier.extend(set(new) - members)
                members = set(new)
    return sorted(members)


def center(G: Group) -> list[int]:
    mask = np.ones(G.order, dtype=bool)
    for g in G.generators():
        mask &= G.left_translation(g) == G.right_translation(g)
    return [int(i) for i in np.nonzero(mask)[0]]


def derived_subgroup(G: Group, of: Optional[Sequence[int]] = None) -> list[int]:
    """[H, G] for H given by element list (default the whole group)."""
    if of is None and G.order <= 512:
        comms = {commutator(G, a, b) for a in G.elements() for b in G.elements()}
        return subgroup_closure(G, comms)
    base = list(of) if of is not None else None
    if base is None:
        comms = {commutator(G, a, b) for a in G.generators() for b in G.generators()}
    else:
        comms = {commutator(G, a, b) for a in base for b in G.generators()}
    return normal_closure(G, comms)


def lower_central_series(G: Group) -> list[list[int]]:
    """G >= [G,G] >= [[G,G],G] >= ... until the series stabilizes.

    Reaches the trivial subgroup exactly when G is nilpotent; otherwise the
    last listed term repeats and the caller sees a nontrivial tail.
    """
    series = [list(G.elements())]
    current = derived_subgroup(G)
    series.append(current)
    while len(current) > 1:
        nxt = derived_subgroup(G, of=current)
        if nxt == current:
            break
        series.append(nxt)
        current = nxt
    return series


@dataclass
class StructuralInvariants:
    order: int
    center: list[int]
    derived: list[int]
    lower_central: list[list[int]]
    nilpotency_class: Optional[int]    # None when not nilpotent
    order_histogram: dict[int, int]


def element_orders(G: Group) -> np.ndarray:
    """Element orders via repeated elementwise multiplication."""
    n = G.order
    orders = np.zeros(n, dtype=np.int64)
    orders[0] = 1
    idx = np.arange(n, dtype=np.int64)
    current = idx.copy()
    k = 1
    remaining = int(np.sum(orders == 0))
    while remaining:
        k += 1
        current = G.mult_arrays(current, idx)
        newly = (orders == 0) & (current == 0)
        orders[newly] = k
        remaining -= int(np.sum(newly))
    return orders


def structural_invariants(G: Group) -> StructuralInvariants:
    z = center(G)
    lcs = lower_central_series(G)
    orders = element_orders(G) if G.order <= 1 << 16 else None
    hist: dict[int, int] = {}
    if orders is not None:
        vals, counts = np.unique(orders, return_counts=True)
        hist = {int(v): int(c) for v, c in zip(vals, counts)}
    nilpotent = len(lcs[-1]) == 1
    return StructuralInvariants(
        order=G.order,
        center=z,
        derived=lcs[1],
        lower_central=lcs,
        nilpotency_class=len(lcs) - 1 if nilpotent else None,
        order_histogram=hist,
    )


def central_quotient(G: Group, z: int) -> tuple[TableGroup, np.ndarray, np.ndarray]:
    """Quotient by the central subgroup <z>.

    Returns (Q, projection, section): projection maps G-indices to Q-indices,
    section picks the minimal coset representative for each Q-index.
    """
    if z not in center(G):
        raise GroupError("element is not central")
    sub = subgroup_closure(G, [z])
    n = G.order
    # minimal element of each coset x<z>
    rep = np.full(n, -1, dtype=np.int64)
    for x in range(n):
        if rep[x] >= 0:
            continue
        coset = sorted(G.mult(x, s) for s in sub)
        r = coset[0]
        for y in coset:
            rep[y] = r
    reps_sorted = np.unique(rep)
    assert reps_sorted[0] == 0
    idx_of = {int(r): i for i, r in enumerate(reps_sorted)}
    proj = np.array([idx_of[int(rep[x])] for x in range(n)], dtype=np.int64)
    m = len(reps_sorted)
    table = np.empty((m, m), dtype=np.int64)
    for i, a in enumerate(reps_sorted):
        la = G.left_translation(int(a))
        table[i] = proj[la[reps_sorted]]
    Q = TableGroup(table, name=f"{G.name}/<z{z}>")
    return Q, proj, reps_sorted.astype(np.int64)


# ---------------------------------------------------------------------------
# Wreath-type powers
# ---------------------------------------------------------------------------


def direct_power_with_wreath(
    G: Group, n: int, base_action: Optional[GroupAction] = None
) -> tuple[DirectProductGroup, SemidirectProductGroup, GroupAction]:
    """G^(n) together with A wr Sigma_n and its twisted permutation action.

    ((a_1,...,a_n), sigma) sends (x_1,...,x_n) to (a_1 x_{sigma^-1(1)}, ...,
    a_n x_{sigma^-1(n)}).  When no base action is supplied A is trivial.
    """
    if n < 1:
        raise GroupError("power must be at least 1")
    if base_action is None:
        base_action = GroupAction.trivial(CyclicGroup(1), G)
    A = base_action.actor
    P = DirectProductGroup([G] * n, name=f"{G.name}^{n}")
    An = DirectProductGroup([A] * n, name=f"{A.name}^{n}")
    Sn = SymmetricGroup(n)

    # Sigma_n permutes the A^n coordinates
    def sigma_on_An(sidx: int) -> Automorphism:
        sigma = Sn.perm_of(sidx)
        perm = np.empty(An.order, dtype=np.int64)
        for x in range(An.order):
            comps = An.decode(x)
            moved = [comps[sigma.index(i)] for i in range(n)]
            perm[x] = An.encode(moved)
        return Automorphism(An, perm, validate=False)

    images = [sigma_on_An(s) for s in Sn.generators()]
    for im in images:
        im.validate()
    act_perm = GroupAction(Sn, An, images)
    W = SemidirectProductGroup(An, Sn, act_perm, name=f"{A.name} wr S{n}")

    # W acts on P
    comp_autos = [base_action.automorphism(a) for a in range(A.order)] if A.order <= 4096 else None

    def w_automorphism(widx: int) -> Automorphism:
        an, s = W.decode(widx)
        acomps = An.decode(an)
        sigma = Sn.perm_of(s)
        perm = np.empty(P.order, dtype=np.int64)
        for x in range(P.order):
            comps = P.decode(x)
            moved = []
            for i in range(n):
                src = sigma.index(i)  # sigma^{-1}(i)
                phi = comp_autos[acomps[i]] if comp_autos else base_action.automorphism(acomps[i])
                moved.append(phi(comps[src]))
            perm[x] = P.encode(moved)
        return Automorphism(P, perm, validate=False)

    w_images = [w_automorphism(w) for w in W.generators()]
    for im in w_images:
        im.validate()
    act = GroupAction(W, P, w_images)
    return P, W, act


# ---------------------------------------------------------------------------
# Small-group helpers used by tests and the CLI
# ---------------------------------------------------------------------------


def quaternion_group() -> DicyclicGroup:
    return DicyclicGroup(8)


def cyclic_action(H: Group, N: Group, image: Automorphism) -> GroupAction:
    """Action of a one-generator group sending its generator to the image."""
    gens = H.generators()
    if len(gens) != 1:
        raise GroupError("cyclic_action requires a single-generator actor")
    return GroupAction(H, N, [image])


def inversion_action(H: Group, N: Group) -> GroupAction:
    perm = np.array([N.inv(x) for x in N.elements()], dtype=np.int64)
    img = Automorphism(N, perm)
    return cyclic_action(H, N, img)
