"""Finite type spaces, knowledge-belief spaces and the satisfaction relation.

States are ``0..n-1``.  Each agent's type function is stored as one sparse
row per state, a sorted tuple of ``(state, probability)`` pairs with the
zero entries dropped.  Rows may be shared between states; several routines
(evaluation, the Harsanyi test) work per distinct row object, which keeps
large spaces with few distinct types cheap.

Internally events are Python ints used as bitsets; the public functions
take and return ``frozenset`` of states.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceeded, ModelError
from .formula import (
    And,
    Bot,
    Formula,
    Iff,
    Implies,
    K,
    L,
    Letter,
    M,
    Neg,
    Or,
    Top,
    render,
)
from .report import CheckReport

Row = tuple  # tuple[tuple[int, Fraction], ...]

POWERSET_LIMIT = 12


def mask_of(states: Iterable[int]) -> int:
    m = 0
    for s in states:
        m |= 1 << s
    return m


def set_of(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        low = mask & -mask
        i = low.bit_length() - 1
        out.append(i)
        mask ^= low
    return frozenset(out)


def row_mass(row: Row, mask: int) -> Fraction:
    total = Fraction(0)
    for s, p in row:
        if mask >> s & 1:
            total += p
    return total


def support_mask(row: Row) -> int:
    return mask_of(s for s, _ in row)


def sparse_row(dense: Sequence) -> Row:
    return tuple((s, Fraction(p)) for s, p in enumerate(dense) if Fraction(p) != 0)


def _check_row(row: Row, n: int, where: str) -> None:
    prev = -1
    total = Fraction(0)
    for s, p in row:
        if not isinstance(p, Fraction):
            raise ModelError(f"{where}: probabilities must be Fractions")
        if not prev < s < n:
            raise ModelError(f"{where}: row entries must be sorted state indices below {n}")
        if p < 0:
            raise ModelError(f"{where}: negative probability {p}")
        total += p
        prev = s
    if total != 1:
        raise ModelError(f"{where}: row sums to {total}, not 1")


@dataclass(frozen=True, eq=False)
class FiniteTypeSpace:
    """States ``0..n-1``, per-agent kernels and a valuation of letters."""

    n: int
    kernels: Mapping[int, tuple[Row, ...]]
    valuation: Mapping[int, frozenset[int]]

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("a type space needs at least one state")
        kernels = {}
        for agent, rows in self.kernels.items():
            rows = tuple(rows)
            if len(rows) != self.n:
                raise ModelError(f"agent {agent}: expected {self.n} rows, got {len(rows)}")
            checked: set[int] = set()
            for w, row in enumerate(rows):
                if id(row) not in checked:
                    _check_row(row, self.n, f"agent {agent}, state {w}")
                    checked.add(id(row))
            kernels[int(agent)] = rows
        if not kernels:
            raise ModelError("a type space needs at least one agent")
        valuation = {}
        for letter, states in self.valuation.items():
            states = frozenset(states)
            if any(not 0 <= s < self.n for s in states):
                raise ModelError(f"valuation of p{letter} mentions unknown states")
            valuation[int(letter)] = states
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "valuation", valuation)

    @classmethod
    def from_dense(cls, kernels, valuation) -> "FiniteTypeSpace":
        """Build from dense rows: ``kernels`` maps agent to a list of rows."""
        if not isinstance(kernels, Mapping):
            kernels = {1: kernels}
        n = len(next(iter(kernels.values())))
        sparse = {}
        for agent, rows in kernels.items():
            cache: dict[tuple, Row] = {}
            out = []
            for dense in rows:
                key = tuple(Fraction(x) for x in dense)
                if len(key) != n:
                    raise ModelError("kernel rows must have one entry per state")
                if key not in cache:
                    cache[key] = sparse_row(key)
                out.append(cache[key])
            sparse[agent] = tuple(out)
        return cls(n, sparse, valuation)

    @property
    def states(self) -> range:
        return range(self.n)

    @property
    def agents(self) -> tuple[int, ...]:
        return tuple(sorted(self.kernels))

    @property
    def base(self) -> "FiniteTypeSpace":
        return self

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def row(self, agent: int, w: int) -> Row:
        try:
            return self.kernels[agent][w]
        except KeyError:
            raise ModelError(f"model has no agent {agent}") from None

    def prob(self, agent: int, w: int, event) -> Fraction:
        """``T_agent(w)(event)``; ``event`` is a state set or a bitmask."""
        mask = event if isinstance(event, int) else mask_of(event)
        return row_mass(self.row(agent, w), mask)

    def dense_row(self, agent: int, w: int) -> list[Fraction]:
        out = [Fraction(0)] * self.n
        for s, p in self.row(agent, w):
            out[s] = p
        return out

    def type_classes(self, agent: int) -> list[frozenset[int]]:
        """Kernel-equality classes ``[T(w)]``, ordered by least member."""
        by_id: dict[int, list[int]] = {}
        rows = self.kernels[agent]
        for w, row in enumerate(rows):
            by_id.setdefault(id(row), []).append(w)
        by_value: dict[Row, list[int]] = {}
        for members in by_id.values():
            by_value.setdefault(rows[members[0]], []).extend(members)
        return sorted((frozenset(v) for v in by_value.values()), key=min)


@dataclass(frozen=True, eq=False)
class KnowledgeBeliefSpace:
    """A type space together with one information partition per agent."""

    base: FiniteTypeSpace
    partitions: Mapping[int, tuple[frozenset[int], ...]]

    def __post_init__(self):
        parts = {}
        for agent, cells in self.partitions.items():
            cells = tuple(sorted((frozenset(c) for c in cells), key=lambda c: min(c) if c else -1))
            if agent not in self.base.kernels:
                raise ModelError(f"partition given for unknown agent {agent}")
            seen: set[int] = set()
            for c in cells:
                if not c:
                    raise ModelError(f"agent {agent}: empty partition cell")
                if seen & c:
                    raise ModelError(f"agent {agent}: partition cells overlap")
                if any(not 0 <= s < self.base.n for s in c):
                    raise ModelError(f"agent {agent}: cell mentions unknown states")
                seen |= c
            if len(seen) != self.base.n:
                raise ModelError(f"agent {agent}: partition does not cover every state")
            parts[int(agent)] = cells
        object.__setattr__(self, "partitions", parts)
        cell_of = {}
        for agent, cells in parts.items():
            lookup = [None] * self.base.n
            for c in cells:
                for s in c:
                    lookup[s] = c
            cell_of[agent] = tuple(lookup)
        object.__setattr__(self, "_cell_of", cell_of)

    n = property(lambda self: self.base.n)
    kernels = property(lambda self: self.base.kernels)
    valuation = property(lambda self: self.base.valuation)
    states = property(lambda self: self.base.states)
    agents = property(lambda self: self.base.agents)
    full = property(lambda self: self.base.full)

    def row(self, agent, w):
        return self.base.row(agent, w)

    def prob(self, agent, w, event):
        return self.base.prob(agent, w, event)

    def type_classes(self, agent):
        return self.base.type_classes(agent)

    def cell(self, agent: int, w: int) -> frozenset[int]:
        try:
            return self._cell_of[agent][w]
        except KeyError:
            raise ModelError(f"no partition for agent {agent}") from None

    def knowledge_mask(self, agent: int, mask: int) -> int:
        """States whose cell lies inside the event ``mask``."""
        out = 0
        for c in self.partitions[agent]:
            cm = mask_of(c)
            if cm & mask == cm:
                out |= cm
        return out


AnyModel = FiniteTypeSpace | KnowledgeBeliefSpace


def belief_mask(m: AnyModel, agent: int, r: Fraction, mask: int) -> int:
    """Bitmask of ``{w : T_agent(w)(E) >= r}``, computed once per distinct row."""
    if agent not in m.kernels:
        raise ModelError(f"model has no agent {agent}")
    rows = m.kernels[agent]
    memo: dict[int, bool] = {}
    out = 0
    for w, row in enumerate(rows):
        key = id(row)
        hit = memo.get(key)
        if hit is None:
            hit = memo[key] = row_mass(row, mask) >= r
        if hit:
            out |= 1 << w
    return out


class Evaluator:
    """Computes extensions with a private memo; not shared across threads."""

    def __init__(self, m: AnyModel):
        self.m = m
        self.memo: dict[Formula, int] = {}

    def mask(self, f: Formula) -> int:
        hit = self.memo.get(f)
        if hit is None:
            hit = self.memo[f] = self._compute(f)
        return hit

    def _compute(self, f: Formula) -> int:
        m = self.m
        full = m.full
        if isinstance(f, Letter):
            if f.id not in m.valuation:
                raise ModelError(f"unknown letter p{f.id}")
            return mask_of(m.valuation[f.id])
        if isinstance(f, Top):
            return full
        if isinstance(f, Bot):
            return 0
        if isinstance(f, Neg):
            return full & ~self.mask(f.sub)
        if isinstance(f, And):
            return self.mask(f.left) & self.mask(f.right)
        if isinstance(f, Or):
            return self.mask(f.left) | self.mask(f.right)
        if isinstance(f, Implies):
            return (full & ~self.mask(f.left)) | self.mask(f.right)
        if isinstance(f, Iff):
            return full & ~(self.mask(f.left) ^ self.mask(f.right))
        if isinstance(f, (L, M)):
            if f.agent not in m.kernels:
                raise ModelError(f"model has no agent {f.agent}")
            sub = self.mask(f.sub)
            if isinstance(f, L):
                return belief_mask(m, f.agent, f.r, sub)
            return belief_mask(m, f.agent, 1 - f.r, full & ~sub)
        if isinstance(f, K):
            if not isinstance(m, KnowledgeBeliefSpace):
                raise ModelError(f"K needs a knowledge-belief space: {render(f)}")
            if f.agent not in m.partitions:
                raise ModelError(f"no partition for agent {f.agent}")
            return m.knowledge_mask(f.agent, self.mask(f.sub))
        raise TypeError(f"not a formula: {f!r}")


def extension(m: AnyModel, f: Formula, evaluator: Evaluator | None = None) -> frozenset[int]:
    ev = evaluator or Evaluator(m)
    return set_of(ev.mask(f))


def evaluate(m: AnyModel, w: int, f: Formula, evaluator: Evaluator | None = None) -> bool:
    if not 0 <= w < m.n:
        raise ModelError(f"no state {w}")
    ev = evaluator or Evaluator(m)
    return bool(ev.mask(f) >> w & 1)


def belief_event(m: AnyModel, agent: int, r, E: Iterable[int]) -> frozenset[int]:
    return set_of(belief_mask(m, agent, Fraction(r), mask_of(E)))


# ---------------------------------------------------------- Harsanyi tests

def harsanyi_violations(m: AnyModel, agent: int) -> list[int]:
    """States ``w`` with ``T(w)([T(w)]) < 1``."""
    bad = []
    rows = m.kernels[agent]
    for cls in m.type_classes(agent):
        cm = mask_of(cls)
        w = min(cls)
        if support_mask(rows[w]) & ~cm:
            bad.extend(sorted(cls))
    return sorted(bad)


def is_harsanyi(m: AnyModel, agent: int | None = None) -> bool:
    """Every state's type gives probability 1 to the states sharing that type."""
    agents = m.agents if agent is None else (agent,)
    return all(not harsanyi_violations(m, a) for a in agents)


def is_harsanyi_h_prime(m: AnyModel, agent: int | None = None) -> bool:
    """The alternative condition, checked literally over every event.

    For all ``w`` and ``E``: ``T(w)({v : T(v)(E) != T(w)(E)}) = 0``.
    """
    if m.n > POWERSET_LIMIT:
        raise BudgetExceeded(f"powerset check limited to {POWERSET_LIMIT} states")
    agents = m.agents if agent is None else (agent,)
    for a in agents:
        rows = m.kernels[a]
        for E in range(1 << m.n):
            values = [row_mass(row, E) for row in rows]
            for w in range(m.n):
                disagree = mask_of(v for v in range(m.n) if values[v] != values[w])
                if row_mass(rows[w], disagree) != 0:
                    return False
    return True


def validate_kb_space(s: KnowledgeBeliefSpace) -> CheckReport:
    """Check the defining conditions of a knowledge-belief space.

    The two conditions quantified over events reduce to their least events:
    ``Pi(w) <= E => T(w)(E) = 1`` holds for all E iff it holds for
    ``E = Pi(w)``, and ``[T(w)] <= E => Pi(w) <= E`` iff ``Pi(w) <= [T(w)]``.
    Counter-witnesses are reported as ``(agent, w, E)``.
    """
    rep = CheckReport("knowledge-belief space")
    for name in ("harsanyi", "partition", "cell_is_certain", "cell_within_type_class"):
        rep.declare(name)
    for a in s.agents:
        bad = harsanyi_violations(s.base, a)
        rep.record("harsanyi", not bad, (a, bad[0] if bad else None, s.type_classes(a)))
        if a not in s.partitions:
            rep.record("partition", False, (a, None, "missing"))
            continue
        cells = s.partitions[a]
        covered = 0
        disjoint = True
        for c in cells:
            cm = mask_of(c)
            disjoint &= not (covered & cm)
            covered |= cm
        rep.record("partition", disjoint and covered == s.full, (a, None, cells))
        classes = {}
        for cls in s.type_classes(a):
            for v in cls:
                classes[v] = cls
        for w in s.states:
            cell = s.cell(a, w)
            rep.record("cell_is_certain", s.prob(a, w, cell) == 1, (a, w, cell))
            rep.record("cell_within_type_class", cell <= classes[w], (a, w, classes[w]))
    return rep


def extend_to_kb(m: FiniteTypeSpace) -> KnowledgeBeliefSpace:
    """Add the partitions ``Pi_i(w) = [T_i(w)]``; requires a Harsanyi space."""
    from .errors import NotHarsanyi

    m = m.base
    for a in m.agents:
        bad = harsanyi_violations(m, a)
        if bad:
            raise NotHarsanyi(f"agent {a} violates the Harsanyi condition at state {bad[0]}")
    return KnowledgeBeliefSpace(m, {a: tuple(m.type_classes(a)) for a in m.agents})


# ------------------------------------------------------- operator laws

def _grid(q: int) -> list[Fraction]:
    return [Fraction(k, q) for k in range(q + 1)]


def check_operator_laws(m: AnyModel, agent: int, q: int = 2) -> CheckReport:
    """Check the classical belief-operator laws over the whole powerset.

    Laws checked for every event (pair) and grid indices ``r, s``:

    * ``B0``: ``B^0 A`` is everything
    * ``B1_top``: ``B^1`` of everything is everything
    * ``disjoint_beliefs``: ``B^r A`` misses ``B^s ~A`` when ``r + s > 1``
    * ``continuity``: ``B^r A`` is the exact threshold set, shrinks with r, and
      each state outside it is already outside ``B^s A`` for some rational
      ``s < r`` (the midpoint between its value and r)
    * ``superadditivity`` / ``subadditivity``: the two additivity laws on
      disjoint pairs ``X = A & B``, ``Y = A & ~B`` with ``r + s <= 1``
    * ``monotone``: ``A' <= A`` implies ``B^r A' <= B^r A``
    * ``4p``, ``5p``: ``B^r E <= B^1 B^r E`` and ``~B^r E <= B^1 ~B^r E``

    On knowledge-belief spaces also ``K_implies_B1``, ``B_known`` and
    ``notB_known``.  Failures are ``(w, E, r)`` or ``(w, X, Y, r, s)``.
    """
    n = m.n
    if n > 8:
        raise BudgetExceeded("operator-law check limited to 8 states")
    full = m.full
    grid = _grid(q)
    rows = m.kernels[agent]
    masses = [[row_mass(rows[w], E) for w in range(n)] for E in range(1 << n)]

    def B(r, E):
        return mask_of(w for w in range(n) if masses[E][w] >= r)

    bel = {(r, E): B(r, E) for r in grid for E in range(1 << n)}
    rep = CheckReport(f"operator laws, agent {agent}, grid 1/{q}")

    def rec(name, lhs, rhs, *wit):
        """Record ``lhs <= rhs`` with the first offending state as witness."""
        extra = lhs & ~rhs
        w = (extra & -extra).bit_length() - 1 if extra else None
        rep.record(name, not extra, (w,) + wit)

    for E in range(1 << n):
        Es = set_of(E)
        rec("B0", full, bel[(Fraction(0), E)], Es)
        for r in grid:
            for s in grid:
                if r + s > 1:
                    rec("disjoint_beliefs", bel[(r, E)], full & ~bel[(s, full & ~E)], Es, r, s)
            exact = mask_of(w for w in range(n) if masses[E][w] >= r)
            rec("continuity", exact, bel[(r, E)], Es, r)
            rec("continuity", bel[(r, E)], exact, Es, r)
            for s in grid:
                if s <= r:
                    rec("continuity", bel[(r, E)], bel[(s, E)], Es, r, s)
            if r > 0:
                for w in range(n):
                    if not bel[(r, E)] >> w & 1:
                        mid = (masses[E][w] + r) / 2
                        rep.record("continuity", not (B(mid, E) >> w & 1), (w, Es, r, mid))
            inner = bel[(r, E)]
            rec("4p", inner, B(Fraction(1), inner), Es, r)
            outer = full & ~inner
            rec("5p", outer, B(Fraction(1), outer), Es, r)
    rec("B1_top", full, bel[(Fraction(1), full)])

    # disjoint pairs X, Y via a ternary code per state
    for code in itertools.product((0, 1, 2), repeat=n):
        X = mask_of(i for i, c in enumerate(code) if c == 1)
        Y = mask_of(i for i, c in enumerate(code) if c == 2)
        A = X | Y
        for r in grid:
            for s in grid:
                if r + s > 1:
                    continue
                rec("superadditivity", bel[(r, X)] & bel[(s, Y)], bel[(r + s, A)], set_of(X), set_of(Y), r, s)
                rec(
                    "subadditivity",
                    full & ~bel[(r, X)] & ~bel[(s, Y)],
                    full & ~bel[(r + s, A)],
                    set_of(X),
                    set_of(Y),
                    r,
                    s,
                )
        # X <= A is a 2-chain
        for r in grid:
            rec("monotone", bel[(r, X)], bel[(r, A)], set_of(A), set_of(X), r)

    if isinstance(m, KnowledgeBeliefSpace) and agent in m.partitions:
        for E in range(1 << n):
            KE = m.knowledge_mask(agent, E)
            rec("K_implies_B1", KE, bel[(Fraction(1), E)], set_of(E))
            for r in grid:
                inner = bel[(r, E)]
                rec("B_known", inner, m.knowledge_mask(agent, inner), set_of(E), r)
                outer = full & ~inner
                rec("notB_known", outer, m.knowledge_mask(agent, outer), set_of(E), r)
    return rep


# -------------------------------------------------------- JSON format

def _frac_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _parse_frac(x) -> Fraction:
    if isinstance(x, float):
        raise ModelError("probabilities must be exact: write them as \"num/den\" strings")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(f"bad rational {x!r}") from exc


def model_to_dict(m: AnyModel) -> dict:
    agents = m.agents
    if agents != tuple(range(1, len(agents) + 1)):
        raise ModelError("JSON export expects agents numbered 1..k")
    out = {
        "states": m.n,
        "agents": len(agents),
        "kernels": [[[_frac_text(p) for p in m.base.dense_row(a, w)] for w in m.states] for a in agents],
        "valuation": {f"p{k}": sorted(v) for k, v in sorted(m.valuation.items())},
    }
    if isinstance(m, KnowledgeBeliefSpace):
        out["partitions"] = [[sorted(c) for c in m.partitions[a]] for a in agents]
    return out


def model_from_dict(data: Mapping) -> AnyModel:
    try:
        n = int(data["states"])
        k = int(data.get("agents", len(data["kernels"])))
        kernels_in = data["kernels"]
        if len(kernels_in) != k:
            raise ModelError(f"expected {k} kernels, got {len(kernels_in)}")
        kernels = {}
        for a, rows in enumerate(kernels_in, start=1):
            if len(rows) != n:
                raise ModelError(f"agent {a}: expected {n} rows")
            kernels[a] = [[_parse_frac(x) for x in row] for row in rows]
        valuation = {}
        for name, states in data.get("valuation", {}).items():
            if not (name.startswith("p") and name[1:].isdigit()):
                raise ModelError(f"bad letter name {name!r}")
            valuation[int(name[1:])] = frozenset(int(s) for s in states)
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model: {exc}") from exc
    base = FiniteTypeSpace.from_dense(kernels, valuation)
    if base.n != n:
        raise ModelError("row length disagrees with the state count")
    parts = data.get("partitions")
    if parts is None:
        return base
    if len(parts) != k:
        raise ModelError(f"expected {k} partitions")
    return KnowledgeBeliefSpace(base, {a: tuple(frozenset(c) for c in cells) for a, cells in enumerate(parts, start=1)})


def dump_model(m: AnyModel) -> str:
    return json.dumps(model_to_dict(m), indent=2)


def load_model(text: str) -> AnyModel:
    """Parse a model; a canonical export ``{"model": ..., "atoms": ...}`` is unwrapped."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    if isinstance(data, dict) and "model" in data and "states" not in data:
        data = data["model"]
    return model_from_dict(data)


# ------------------------------------------------------ sample models

def four_p_counter_model() -> FiniteTypeSpace:
    """Two states, ``p1`` true at state 0 only, types (3/4, 1/4) and (0, 1).

    Not Harsanyi; ``L[1/2] p1 -> L[1] L[1/2] p1`` fails at state 0.
    """
    F = Fraction
    return FiniteTypeSpace.from_dense([[F(3, 4), F(1, 4)], [F(0), F(1)]], {1: {0}})


def _random_grid_distribution(rng: random.Random, support: Sequence[int], q: int) -> Row:
    """A distribution on ``support`` with masses in multiples of ``1/q``."""
    cuts = sorted(rng.randint(0, q) for _ in range(len(support) - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [q])]
    return tuple((s, Fraction(c, q)) for s, c in sorted(zip(support, parts)) if c)


def _random_valuation(rng, n, letter_ids):
    return {p: frozenset(w for w in range(n) if rng.random() < 0.5) for p in letter_ids}


def random_type_space(
    rng: random.Random, n: int, agents: Sequence[int] = (1,), q: int = 4, letter_ids: Sequence[int] = (1,)
) -> FiniteTypeSpace:
    """Arbitrary kernel rows on the ``1/q`` grid; usually not Harsanyi."""
    kernels = {a: tuple(_random_grid_distribution(rng, range(n), q) for _ in range(n)) for a in agents}
    return FiniteTypeSpace(n, kernels, _random_valuation(rng, n, letter_ids))


def random_harsanyi_space(
    rng: random.Random, n: int, agents: Sequence[int] = (1,), q: int = 4, letter_ids: Sequence[int] = (1,)
) -> FiniteTypeSpace:
    """Random Harsanyi space.

    Each agent's states are split into random cells; every cell gets one
    grid distribution supported inside it, shared by all its states.  Cells
    have disjoint supports, so the type classes are exactly the cells.
    """
    kernels = {}
    for a in agents:
        labels = [rng.randrange(n) for _ in range(n)]
        cells: dict[int, list[int]] = {}
        for w, lab in enumerate(labels):
            cells.setdefault(lab, []).append(w)
        rows: list[Row | None] = [None] * n
        for members in cells.values():
            row = _random_grid_distribution(rng, members, q)
            for w in members:
                rows[w] = row
        kernels[a] = tuple(rows)
    return FiniteTypeSpace(n, kernels, _random_valuation(rng, n, letter_ids))
