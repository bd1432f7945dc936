"""Finite modal algebras with grid-indexed belief operators.

The carrier is the powerset of ``k`` atoms; elements are bitmasks in
``0 .. 2**k - 1`` with meet ``&``, join ``|`` and complement against the
top element.  Unary operators are tables (tuples) indexed by element.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import BudgetExceeded, ModelError
from .models import AnyModel, KnowledgeBeliefSpace, belief_mask
from .report import CheckReport

Table = tuple  # tuple[int, ...]

MAX_ATOMS = 4  # carrier of at most 16 elements for operator search and closure
MAX_POWERSET_STATES = 10
EXHAUSTIVE_LIMIT = 4  # carrier size up to which all N**N tables are scanned


@dataclass(frozen=True, eq=False)
class ModalAlgebra:
    atoms: int
    belief: Mapping[Fraction, Table]
    knowledge: Table | None = None

    def __post_init__(self):
        if self.atoms < 0:
            raise ModelError("atom count must be non-negative")
        N = 1 << self.atoms
        belief = {}
        for r, table in self.belief.items():
            r = Fraction(r)
            if not 0 <= r <= 1:
                raise ModelError(f"belief index {r} outside [0, 1]")
            belief[r] = self._check_table(table, N, f"belief table {r}")
        object.__setattr__(self, "belief", dict(sorted(belief.items())))
        if self.knowledge is not None:
            object.__setattr__(self, "knowledge", self._check_table(self.knowledge, N, "knowledge table"))
        rs = list(self.belief)
        for r, s in zip(rs, rs[1:]):
            lo, hi = self.belief[r], self.belief[s]
            if any(hi[e] & ~lo[e] for e in range(N)):
                raise ModelError(f"belief operators not antitone between {r} and {s}")

    @staticmethod
    def _check_table(table, N: int, what: str) -> Table:
        table = tuple(int(x) for x in table)
        if len(table) != N or any(not 0 <= x < N for x in table):
            raise ModelError(f"{what} must list {N} elements of the carrier")
        return table

    @property
    def size(self) -> int:
        return 1 << self.atoms

    @property
    def top(self) -> int:
        return self.size - 1

    def neg(self, e: int) -> int:
        return self.top & ~e

    def B(self, r, e: int) -> int:
        try:
            return self.belief[Fraction(r)][e]
        except KeyError:
            raise ModelError(f"no belief operator for index {r}") from None

    def grid(self, q: int | None) -> list[Fraction]:
        if q is None:
            return list(self.belief)
        grid = [Fraction(i, q) for i in range(q + 1)]
        missing = [r for r in grid if r not in self.belief]
        if missing:
            raise ModelError(f"algebra has no operator for indices {[str(r) for r in missing]}")
        return grid


# ------------------------------------------------------------ builders

def _kernel_lcm(m: AnyModel, agent: int) -> int:
    q = 1
    for row in set(m.kernels[agent]):
        for _, p in row:
            q = math.lcm(q, p.denominator)
    return q


def make_powerset_algebra(m: AnyModel, agent: int = 1, q: int | None = None) -> ModalAlgebra:
    """Belief operators of a finite model as tables on its powerset.

    ``q`` defaults to the lcm of the kernel denominators, which makes the
    grid operators determine ``B^r`` for every rational ``r``.
    """
    if m.n > MAX_POWERSET_STATES:
        raise BudgetExceeded(f"powerset algebras limited to {MAX_POWERSET_STATES} states")
    q = _kernel_lcm(m, agent) if q is None else q
    N = 1 << m.n
    belief = {}
    for i in range(q + 1):
        r = Fraction(i, q)
        belief[r] = tuple(belief_mask(m, agent, r, e) for e in range(N))
    knowledge = None
    if isinstance(m, KnowledgeBeliefSpace) and agent in m.partitions:
        knowledge = tuple(m.knowledge_mask(agent, e) for e in range(N))
    return ModalAlgebra(m.n, belief, knowledge)


def counterexample_algebra(q: int = 6) -> ModalAlgebra:
    """Four elements ``(u, z)`` coded as ``u | z << 1``.

    ``u`` marks events of measure one and ``z`` marks events containing
    the distinguished point.  ``B^0`` is the top; for ``r > 0`` the event
    gains the point when it is big and loses it otherwise, so
    ``B^r (u, z) = (u, u)``.  Tables are given for every multiple of
    ``1/q`` (the default covers grids 1, 2, 3 and 6).
    """
    belief = {}
    for i in range(q + 1):
        r = Fraction(i, q)
        if r == 0:
            belief[r] = (3, 3, 3, 3)
        else:
            belief[r] = tuple(3 if e & 1 else 0 for e in range(4))
    return ModalAlgebra(2, belief)


# -------------------------------------------------------- law checking

def _record_bulk(rep: CheckReport, name: str, bad: np.ndarray, witness) -> None:
    """Tally one law over an array of instances; ``witness`` maps an index tuple."""
    rep.declare(name)
    rep.checked[name] += int(bad.size)
    hits = np.flatnonzero(bad)
    rep.failure_counts[name] += int(hits.size)
    room = rep.limit - len(rep.failures[name])
    for i in hits[:max(room, 0)]:
        rep.failures[name].append(witness(np.unravel_index(int(i), bad.shape)))


def check_sigma_h_laws(a: ModalAlgebra, q: int | None = None) -> CheckReport:
    """Belief axioms as operator inequalities over all elements and grid indices.

    Laws: ``B^0 e = 1``, ``B^r 1 = 1``, A3 and A4 for ``r + t <= 1``, A5 for
    ``r + s > 1``, monotonicity in the event, antitonicity in the index,
    and the two introspection laws ``B^r e <= B^1 B^r e`` and
    ``~B^r e <= B^1 ~B^r e``.  With ``q=None`` every stored index is used
    and A3/A4 pairs whose sum has no operator are skipped.
    """
    grid = a.grid(q)
    one = Fraction(1)
    if one not in a.belief:
        raise ModelError("the laws need the operator for index 1")
    top = a.top
    T = {r: np.asarray(t, dtype=np.int64) for r, t in a.belief.items()}
    e = np.arange(a.size, dtype=np.int64)
    E, F = np.meshgrid(e, e, indexing="ij")
    X, Y = E & F, E & (top ^ F)
    B1 = T[one]
    rep = CheckReport(f"belief laws, grid {'1/' + str(q) if q else 'all'}")

    def viol(lhs, rhs):
        return (lhs & (top ^ rhs)) != 0

    if Fraction(0) in T:
        _record_bulk(rep, "A1", T[Fraction(0)] != top, lambda i: (int(i[0]),))
    for r in grid:
        Br = T[r]
        _record_bulk(rep, "A2", np.array([Br[top] != top]), lambda i, r=r: (r,))
        _record_bulk(rep, "4p", viol(Br, B1[Br]), lambda i, r=r: (int(i[0]), r))
        nBr = top ^ Br
        _record_bulk(rep, "5p", viol(nBr, B1[nBr]), lambda i, r=r: (int(i[0]), r))
        below = (E & (top ^ F)) == 0
        bad = viol(Br[E], Br[F]) & below
        _record_bulk(rep, "monotone", bad, lambda i, r=r: (int(i[0]), int(i[1]), r))
        rep.checked["monotone"] -= int(below.size - np.count_nonzero(below))
        for s in grid:
            if r + s > 1:
                _record_bulk(rep, "A5", viol(Br, top ^ T[s][top ^ e]), lambda i, r=r, s=s: (int(i[0]), r, s))
            if s > r:
                _record_bulk(rep, "antitone", viol(T[s], Br), lambda i, r=r, s=s: (int(i[0]), r, s))
        for t in grid:
            if r + t > 1 or r + t not in T:
                continue
            Bsum = T[r + t][E]
            wit = lambda i, r=r, t=t: (int(i[0]), int(i[1]), r, t)
            _record_bulk(rep, "A3", viol(Br[X] & T[t][Y], Bsum), wit)
            _record_bulk(rep, "A4", viol((top ^ Br[X]) & (top ^ T[t][Y]), top ^ Bsum), wit)
    return rep


def k_violation(a: ModalAlgebra, K: Sequence[int], grid: Sequence[Fraction] | None = None) -> str | None:
    """Name of the first knowledge law ``K`` breaks, or None.

    Laws: ``K1 = 1``, ``K(e & f) = Ke & Kf``, ``Ke <= e``, ``Ke <= KKe``,
    ``~Ke <= K~Ke``, ``B^r e <= K B^r e``, ``~B^r e <= K ~B^r e`` and
    ``Ke <= B^1 e``.
    """
    grid = list(a.belief) if grid is None else grid
    N, top = a.size, a.top
    one = Fraction(1)
    if K[top] != top:
        return "K_top"
    for e in range(N):
        Ke = K[e]
        if Ke & ~e:
            return "T"
        if Ke & ~K[Ke]:
            return "4"
        nKe = top & ~Ke
        if nKe & ~K[nKe]:
            return "5"
        if Ke & ~a.B(one, e):
            return "H3"
        for r in grid:
            b = a.B(r, e)
            if b & ~K[b]:
                return "H1"
            nb = top & ~b
            if nb & ~K[nb]:
                return "H2"
    for e in range(N):
        for f in range(e + 1, N):
            if K[e & f] != K[e] & K[f]:
                return "normal"
    return None


def _coatom_candidates(a: ModalAlgebra):
    """Meet-preserving tables with ``K c <= c`` on every coatom ``c``.

    On a finite Boolean algebra a meet-preserving operator with ``K1 = 1``
    is fixed by its coatom values, since every element is the meet of the
    coatoms above it.
    """
    top = a.top
    coatoms = [top & ~(1 << i) for i in range(a.atoms)]
    below = [[x for x in range(a.size) if x & ~c == 0] for c in coatoms]
    for values in itertools.product(*below):
        table = []
        for e in range(a.size):
            v = top
            for i in range(a.atoms):
                if not e >> i & 1:
                    v &= values[i]
            table.append(v)
        yield tuple(table)


def search_K(a: ModalAlgebra, method: str = "auto") -> list[Table]:
    """All knowledge operators compatible with the belief operators.

    ``method="exhaustive"`` scans every one of the ``N**N`` tables (carrier
    size ``N <= 4``); ``"coatom"`` enumerates meet-preserving candidates.
    ``"auto"`` picks the exhaustive scan whenever it is allowed.
    """
    if a.atoms > MAX_ATOMS:
        raise BudgetExceeded(f"carrier limited to {1 << MAX_ATOMS} elements")
    N = a.size
    if method == "auto":
        method = "exhaustive" if N <= EXHAUSTIVE_LIMIT else "coatom"
    if method == "exhaustive":
        if N > EXHAUSTIVE_LIMIT:
            raise BudgetExceeded(f"exhaustive table scan limited to {EXHAUSTIVE_LIMIT} elements")
        candidates = itertools.product(range(N), repeat=N)
    elif method == "coatom":
        candidates = _coatom_candidates(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    grid = list(a.belief)
    return sorted(tuple(K) for K in candidates if k_violation(a, K, grid) is None)


def partition_operator(n: int, cells: Sequence[frozenset[int]]) -> Table:
    """``K(E)`` = union of the cells inside ``E``, on the powerset of ``n`` states."""
    masks = [sum(1 << s for s in c) for c in cells]
    return tuple(sum(m for m in masks if m & e == m) for e in range(1 << n))


# -------------------------------------------------------- operator closure

@dataclass(frozen=True)
class OperatorClosure:
    tables: frozenset[Table]
    generators: tuple[Table, ...] = field(default=())

    def __len__(self):
        return len(self.tables)

    def __contains__(self, t):
        return tuple(t) in self.tables


def operator_closure(a: ModalAlgebra, include_K: bool = False, max_size: int = 100_000) -> OperatorClosure:
    """Smallest set of tables holding the seeds and closed under pointwise
    complement, pointwise meet and composition.

    Seeds are the belief tables, the constant-top table and, if requested,
    the knowledge table.
    """
    if a.atoms > MAX_ATOMS:
        raise BudgetExceeded(f"carrier limited to {1 << MAX_ATOMS} elements")
    N, top = a.size, a.top
    seeds = [tuple([top] * N)] + list(a.belief.values())
    if include_K:
        if a.knowledge is None:
            raise ModelError("algebra has no knowledge operator")
        seeds.append(a.knowledge)
    known: set[Table] = set()
    order: list[Table] = []
    for s in seeds:
        if s not in known:
            known.add(s)
            order.append(s)
    frontier = list(order)

    def add(t: Table, out: list):
        if t not in known:
            known.add(t)
            out.append(t)
            if len(known) > max_size:
                raise BudgetExceeded(f"closure exceeds {max_size} operators")

    while frontier:
        new: list[Table] = []
        snapshot = list(order)
        for f in frontier:
            add(tuple(top & ~x for x in f), new)
            for g in snapshot:
                add(tuple(x & y for x, y in zip(f, g)), new)
                add(tuple(f[y] for y in g), new)  # f after g
                add(tuple(g[y] for y in f), new)  # g after f
        order.extend(new)
        frontier = new
    return OperatorClosure(frozenset(known), tuple(seeds))


def check_reducibility_witness(a: ModalAlgebra) -> CheckReport:
    """Is a knowledge operator available, and is it a term in the beliefs?

    ``extendable`` fails when no table passes the knowledge laws;
    ``K_in_belief_closure`` records, per found operator, whether it lies in
    the closure of the belief operators alone.
    """
    rep = CheckReport("reducibility witness")
    found = search_K(a)
    rep.record("extendable", bool(found), "no knowledge operator exists")
    rep.declare("K_in_belief_closure")
    if found:
        closure = operator_closure(a, include_K=False)
        for K in found:
            rep.record("K_in_belief_closure", K in closure, K)
        rep.notes.append(f"{len(found)} knowledge operator(s); belief closure has {len(closure)} tables")
    return rep


# ------------------------------------------------------------------ JSON

def _r_text(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def algebra_to_dict(a: ModalAlgebra) -> dict:
    out = {"atoms": a.atoms, "belief": {_r_text(r): list(t) for r, t in a.belief.items()}}
    if a.knowledge is not None:
        out["knowledge"] = list(a.knowledge)
    return out


def algebra_from_dict(data: Mapping) -> ModalAlgebra:
    try:
        belief = {Fraction(r): tuple(t) for r, t in data["belief"].items()}
        return ModalAlgebra(int(data["atoms"]), belief, data.get("knowledge"))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"malformed algebra: {exc}") from exc


def dump_algebra(a: ModalAlgebra) -> str:
    return json.dumps(algebra_to_dict(a), indent=2)


def load_algebra(text: str) -> ModalAlgebra:
    try:
        return algebra_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
