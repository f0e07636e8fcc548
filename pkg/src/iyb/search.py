"""Randomized lifting of complementing ideals along central quotients.

For a p-group G, the search picks a central subgroup <n> of order p, solves
G/<n> recursively, pulls the solution ideal back to G, and replaces it by a
maximal submodule of the preimage avoiding 1 - n.  Each candidate is
re-verified with the residue-transversal check before being accepted; the
search reports failures as inconclusive, never as nonexistence.  A restart
draws fresh randomness, matching the try-again-with-different-choices loop;
identical seeds reproduce identical results.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from math import gcd
from typing import Optional

import numpy as np

from .groups import (
    Group,
    GroupAction,
    GroupError,
    center,
    central_quotient,
    element_orders,
    lower_central_series,
)
from .groupring import GroupRing, group_prime, left_ideal_preimage, radical_of
from .structures import IYBStructure, VerificationError, verify_structure, verify_transversal
from .zklinalg import ElementaryQuotient, HowellBasis, howell_form, zero_basis


class SearchFailure(RuntimeError):
    """Restarts exhausted; the result is inconclusive, not a disproof."""


@dataclass
class SearchConfig:
    seed: int = 42
    max_restarts: int = 100
    hyperplane_sampling: str = "random"   # "random" | "exhaustive"
    k: Optional[int] = None               # modulus exponent; default log_p |G|
    deterministic: bool = True
    jobs: int = 1


@dataclass
class LevelRecord:
    group_order: int
    central: int = -1
    functional: Optional[list[int]] = None
    failure: Optional[str] = None


@dataclass
class RestartRecord:
    restart: int
    k: int
    levels: list[LevelRecord] = field(default_factory=list)
    success: bool = False
    seconds: float = 0.0


@dataclass
class SearchTrace:
    group: str
    seed: int
    k: int
    restarts: list[RestartRecord] = field(default_factory=list)
    winner: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "seed": self.seed,
            "k": self.k,
            "winner": self.winner,
            "restarts": [
                {
                    "restart": r.restart,
                    "k": r.k,
                    "success": r.success,
                    "seconds": round(r.seconds, 6),
                    "levels": [
                        {
                            "group_order": l.group_order,
                            "central": l.central,
                            "functional": l.functional,
                            "failure": l.failure,
                        }
                        for l in r.levels
                    ],
                }
                for r in self.restarts
            ],
        }


class _Chooser:
    """Deterministic choice stream for one restart (or a replay of one).

    Replay records are keyed by group order, which is strictly decreasing
    along the recursion, so the interleaved choice order (central elements
    top-down, hyperplanes bottom-up) resolves unambiguously.
    """

    def __init__(self, rng: Optional[np.random.Generator], replay: Optional[list[LevelRecord]] = None):
        self.rng = rng
        self.by_order = {rec.group_order: rec for rec in replay} if replay is not None else None

    def pick_central(self, candidates: list[int], order: int) -> int:
        if self.by_order is not None:
            want = self.by_order[order].central
            if want not in candidates:
                raise SearchFailure("trace replay: central element not available")
            return want
        return int(self.rng.choice(np.array(candidates, dtype=np.int64)))

    def pick_functional(self, p: int, d: int, vbar: np.ndarray, mode: str, order: int) -> Optional[np.ndarray]:
        """A normalized functional phi with phi(vbar) != 0, or None if impossible."""
        if not np.any(vbar % p):
            return None
        if self.by_order is not None:
            phi = np.array(self.by_order[order].functional, dtype=np.int64)
            if int(phi @ vbar) % p == 0:
                raise SearchFailure("trace replay: recorded functional no longer avoids 1 - n")
            return phi
        if mode == "exhaustive":
            from .zklinalg import _normalized_functionals

            for phi in _normalized_functionals(p, d):
                if int(phi @ vbar) % p != 0:
                    return phi
            return None
        while True:
            phi = self.rng.integers(0, p, size=d)
            if not np.any(phi):
                continue
            lead = int(np.nonzero(phi)[0][0])
            phi = (phi * pow(int(phi[lead]), -1, p)) % p
            if int(phi @ vbar) % p != 0:
                return phi


def base_case_ideal(G: Group, k: int) -> tuple[GroupRing, HowellBasis]:
    """I = omega^2 + p*omega for the cyclic group of prime order p."""
    p = group_prime(G)
    if G.order != p:
        raise GroupError("base case requires a group of prime order")
    ring = GroupRing(G, p**k)
    omega = ring.omega()
    omega2 = ring.omega_power(2)
    rows = list(omega2.rows) + [(p * r) % ring.modulus for r in omega.rows]
    ideal = howell_form(rows, ring.modulus, ring.dim)
    rep = verify_transversal(ring, ideal)
    if not rep.ok:
        raise VerificationError(f"base case ideal failed verification: {rep.describe()}")
    return ring, ideal


def _central_order_p(G: Group, p: int) -> list[int]:
    orders = element_orders(G)
    return [z for z in center(G) if orders[z] == p]


def _attempt(
    G: Group,
    p: int,
    k: int,
    chooser: _Chooser,
    levels: list[LevelRecord],
    mode: str,
) -> Optional[tuple[GroupRing, HowellBasis]]:
    if G.order == p:
        levels.append(LevelRecord(group_order=p, central=0))
        return base_case_ideal(G, k)
    rec = LevelRecord(group_order=G.order)
    candidates = _central_order_p(G, p)
    if not candidates:
        rec.failure = "no central element of order p"
        levels.append(rec)
        return None
    n = chooser.pick_central(candidates, G.order)
    rec.central = n
    Q, proj, section = central_quotient(G, n)
    # recurse below THIS level's record so the trace reads top-down
    sub_levels: list[LevelRecord] = []
    sub = _attempt(Q, p, k, chooser, sub_levels, mode)
    ring = GroupRing(G, p**k)
    if sub is None:
        levels.append(rec)
        levels.extend(sub_levels)
        return None
    sub_ring, sub_ideal = sub
    J = left_ideal_preimage(ring, sub_ring, proj, section, sub_ideal)
    index_sub = sub_ring.omega().span_size() // sub_ideal.span_size()
    index_J = ring.omega().span_size() // J.span_size()
    if index_J != index_sub:
        rec.failure = f"preimage index drift: {index_J} != {index_sub}"
        levels.append(rec)
        levels.extend(sub_levels)
        return None
    radJ = radical_of(ring, J)
    v = ring.one_minus(n)
    eq = ElementaryQuotient(ring.modulus, p, J, radJ)
    vbar = eq.project(v)
    phi = chooser.pick_functional(p, eq.dim, vbar, mode, G.order)
    if phi is None:
        rec.failure = "1 - n lies in the radical of the preimage"
        levels.append(rec)
        levels.extend(sub_levels)
        return None
    rec.functional = [int(x) for x in phi]
    # kernel of phi, lifted, plus the radical: a maximal submodule avoiding 1 - n
    ker_rows = []
    lead = int(np.nonzero(phi)[0][0])
    for j in range(eq.dim):
        if j == lead:
            continue
        row = np.zeros(eq.dim, dtype=np.int64)
        row[j] = 1
        row[lead] = (-int(phi[j])) % p
        ker_rows.append(eq.lift(row))
    ideal = howell_form(ker_rows + [r for r in radJ.rows], ring.modulus, ring.dim)
    rep = verify_transversal(ring, ideal)
    if not rep.ok:
        rec.failure = f"transversal: {rep.detail or rep.witness}"
        levels.append(rec)
        levels.extend(sub_levels)
        return None
    levels.append(rec)
    levels.extend(sub_levels)
    return ring, ideal


@dataclass
class HeuristicResult:
    ring: GroupRing
    ideal: HowellBasis
    trace: SearchTrace
    restart: int
    k: int


def _run_restart(G, p, k0, cfg, restart) -> RestartRecord | tuple[RestartRecord, GroupRing, HowellBasis]:
    t0 = time.time()
    for bump in (0, 1):
        k = k0 + bump
        rng = np.random.default_rng((cfg.seed, restart, bump))
        chooser = _Chooser(rng)
        levels: list[LevelRecord] = []
        result = _attempt(G, p, k, chooser, levels, cfg.hyperplane_sampling)
        rec = RestartRecord(restart=restart, k=k, levels=levels, success=result is not None)
        rec.seconds = time.time() - t0
        if result is not None:
            ring, ideal = result
            return rec, ring, ideal
        # retry once at k+1 only when the failure was a transversal miss
        last_fail = next((l.failure for l in levels if l.failure), "")
        if not (last_fail or "").startswith("transversal"):
            return rec
    return rec


def heuristic_lift(G: Group, cfg: Optional[SearchConfig] = None) -> HeuristicResult:
    """Search for a left ideal complementing {1 - g} in omega (Z/p^k)G."""
    cfg = cfg or SearchConfig()
    p = group_prime(G)
    n_exp = round(math.log(G.order, p))
    k0 = cfg.k if cfg.k is not None else n_exp
    spec = G.spec_string() or G.name
    trace = SearchTrace(group=spec, seed=cfg.seed, k=k0)
    if cfg.jobs > 1 and not cfg.deterministic:
        outcome = _parallel_restarts(G, p, k0, cfg, trace)
        if outcome is not None:
            return outcome
    else:
        for restart in range(cfg.max_restarts):
            out = _run_restart(G, p, k0, cfg, restart)
            if isinstance(out, tuple):
                rec, ring, ideal = out
                trace.restarts.append(rec)
                trace.winner = restart
                return HeuristicResult(ring, ideal, trace, restart, rec.k)
            trace.restarts.append(out)
    raise SearchFailure(
        f"no complementing ideal found for {spec} within {cfg.max_restarts} restarts (inconclusive)"
    )


def _parallel_restarts(G, p, k0, cfg, trace) -> Optional[HeuristicResult]:
    """First verified success wins; used only in non-deterministic mode."""
    from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait

    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        pending = {
            pool.submit(_run_restart, G, p, k0, cfg, r): r for r in range(cfg.max_restarts)
        }
        futures = set(pending)
        while futures:
            done, futures = wait(futures, return_when=FIRST_COMPLETED)
            for fut in done:
                out = fut.result()
                if isinstance(out, tuple):
                    rec, ring, ideal = out
                    trace.restarts.append(rec)
                    trace.winner = rec.restart
                    for other in futures:
                        other.cancel()
                    return HeuristicResult(ring, ideal, trace, rec.restart, rec.k)
                trace.restarts.append(out)
    return None


def replay_trace(G: Group, trace_dict: dict) -> HeuristicResult:
    """Re-run a recorded successful search; reproduces the same ideal."""
    winner = trace_dict.get("winner")
    if winner is None:
        raise SearchFailure("trace records no successful restart")
    rec = next(r for r in trace_dict["restarts"] if r["restart"] == winner)
    p = group_prime(G)
    levels = [
        LevelRecord(
            group_order=l["group_order"],
            central=l["central"],
            functional=l["functional"],
        )
        for l in rec["levels"]
    ]
    chooser = _Chooser(None, replay=levels)
    out_levels: list[LevelRecord] = []
    result = _attempt(G, p, rec["k"], chooser, out_levels, "random")
    if result is None:
        raise SearchFailure("trace replay failed to reproduce the ideal")
    ring, ideal = result
    trace = SearchTrace(group=trace_dict["group"], seed=trace_dict["seed"], k=trace_dict["k"])
    trace.winner = winner
    return HeuristicResult(ring, ideal, trace, winner, rec["k"])


# ---------------------------------------------------------------------------
# Brute-force enumeration for tiny groups
# ---------------------------------------------------------------------------


def brute_force_ideals(G: Group, k: int, span_limit: int = 1 << 20) -> tuple[GroupRing, list[HowellBasis]]:
    """All left ideals of omega (Z/p^k)G complementing {1 - g}, tiny G only.

    Enumerates every submodule of omega of index |G| by repeated descent
    through maximal (index-p) submodules, then filters by left-ideal closure
    and the transversal check.  Results in canonical order.
    """
    p = group_prime(G)
    ring = GroupRing(G, p**k)
    omega = ring.omega()
    if omega.span_size() > span_limit:
        raise GroupError(f"omega too large to enumerate ({omega.span_size()})")
    n_exp = round(math.log(G.order, p))
    level: dict[bytes, HowellBasis] = {omega.key(): omega}
    for _ in range(n_exp):
        nxt: dict[bytes, HowellBasis] = {}
        for S in level.values():
            scaled = howell_form((p * S.rows) % ring.modulus, ring.modulus, ring.dim)
            eq = ElementaryQuotient(ring.modulus, p, S, scaled)
            d = eq.dim
            from .zklinalg import _normalized_functionals

            for phi in _normalized_functionals(p, d):
                lead = int(np.nonzero(phi)[0][0])
                rows = []
                for j in range(d):
                    if j == lead:
                        continue
                    row = np.zeros(d, dtype=np.int64)
                    row[j] = 1
                    row[lead] = (-int(phi[j])) % p
                    rows.append(eq.lift(row))
                sub = howell_form(rows + [r for r in scaled.rows], ring.modulus, ring.dim)
                nxt[sub.key()] = sub
        level = nxt
    found = []
    for S in level.values():
        if not ring.left_ideal_closure_check(S):
            continue
        if verify_transversal(ring, S).ok:
            found.append(S)
    found.sort(key=lambda b: b.key())
    return ring, found


# ---------------------------------------------------------------------------
# Orchestrated search over solvable groups
# ---------------------------------------------------------------------------


@dataclass
class SearchOutcome:
    kind: str                      # "ideal-complement" | "module-structure"
    structure: Optional[IYBStructure]
    ideal: Optional[HowellBasis]
    ring: Optional[GroupRing]
    group: Group
    strategy: str
    trace: Optional[SearchTrace] = None


def iyb_search(G: Group, cfg: Optional[SearchConfig] = None,
               hint_action: Optional[GroupAction] = None) -> SearchOutcome:
    """Dispatch: p-groups go to the heuristic; hinted coprime semidirect
    products with class-<= 2 kernel use the equivariant construction and
    recurse on the complement; odd class-<= 2 groups take the direct route.
    """
    from sympy import factorint

    from .constructors import class2_equivariant_sandling, class2_odd, combine_semidirect
    from .groups import SemidirectProductGroup
    from .structures import ideal_to_structure

    cfg = cfg or SearchConfig()
    fac = factorint(G.order)
    if len(fac) == 1:
        res = heuristic_lift(G, cfg)
        return SearchOutcome("ideal-complement", None, res.ideal, res.ring, G, "heuristic", res.trace)
    if isinstance(G, SemidirectProductGroup) and gcd(G.N.order, G.H.order) == 1:
        N, H = G.N, G.H
        lcs = lower_central_series(N)
        if len(lcs) - 1 <= 2 and len(factorint(N.order)) == 1:
            act = hint_action or G.action
            sand = class2_equivariant_sandling(N, act)
            sub = iyb_search(H, cfg)
            if sub.structure is not None:
                sH = sub.structure
            else:
                sH = ideal_to_structure(sub.ring, sub.ideal)
            combined, _ = combine_semidirect(sH, sand.structure, act)
            return SearchOutcome("module-structure", combined, None, None, G, "sandling+recurse")
    if G.order % 2 == 1:
        lcs = lower_central_series(G)
        if len(lcs) - 1 <= 2:
            s = class2_odd(G)
            return SearchOutcome("module-structure", s, None, None, G, "class2-odd")
    raise SearchFailure(
        f"no applicable strategy for {G.name}; supply a coprime semidirect decomposition hint"
    )
