"""Atoms of finite local languages and the canonical Harsanyi model.

Letters ``P = (p_1, ..., p_w)`` are fixed in increasing order.  A depth-0
atom (truth assignment) is an integer whose bit ``j`` is the truth value of
``P[j]``; events over assignments are bitmasks over those integers.

A probability part assigns to each event a *bracket*: a grid point ``k/q``
or an open grid cell ``(k/q, (k+1)/q)``.  Brackets are coded as integers
``c`` in ``0..2q``: even ``c = 2k`` is the point ``k/q`` and odd
``c = 2k+1`` is the open cell above it, so complementing an event maps
``c`` to ``2q - c``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import BudgetExceeded, ModelError, UnsupportedFormula
from .exactnum import Constraint, FeasibleRegion, LinearSystem, lp_feasible
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
    accuracy,
    agents,
    depth,
    desugar_M,
    eval_propositional,
    has_knowledge,
    letters,
    render,
    subformulas,
)
from .models import Evaluator, FiniteTypeSpace, mask_of, set_of
from .report import CheckReport

MAX_Q_ONE_LETTER = 8
MAX_Q_TWO_LETTERS = 2
SIGMA_H = "SigmaH"
SIGMA_PLUS = "SigmaPlus"


# ------------------------------------------------------------- brackets

@dataclass(frozen=True, order=True)
class Bracket:
    """Either the point ``lo == hi`` or the open interval ``(lo, hi)``."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if not 0 <= self.lo <= self.hi <= 1:
            raise ValueError(f"bad bracket ({self.lo}, {self.hi})")

    @classmethod
    def point(cls, a) -> "Bracket":
        return cls(a, a)

    @classmethod
    def open(cls, a, b) -> "Bracket":
        if not Fraction(a) < Fraction(b):
            raise ValueError("open bracket needs lo < hi")
        return cls(a, b)

    @classmethod
    def from_code(cls, code: int, q: int) -> "Bracket":
        k, odd = divmod(code, 2)
        if odd:
            return cls(Fraction(k, q), Fraction(k + 1, q))
        return cls(Fraction(k, q), Fraction(k, q))

    @classmethod
    def of_value(cls, x: Fraction, q: int) -> "Bracket":
        return cls.from_code(code_of_value(x, q), q)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def code(self, q: int) -> int:
        c = 2 * self.lo * q + (0 if self.is_point else 1)
        if c.denominator != 1 or (not self.is_point and self.hi - self.lo != Fraction(1, q)):
            raise ValueError(f"{self} is not a bracket of the 1/{q} grid")
        return int(c)

    def complement(self) -> "Bracket":
        return Bracket(1 - self.hi, 1 - self.lo)

    def contains(self, x: Fraction) -> bool:
        if self.is_point:
            return x == self.lo
        return self.lo < x < self.hi

    def __str__(self):
        if self.is_point:
            return str(self.lo)
        return f"({self.lo},{self.hi})"


def code_of_value(x: Fraction, q: int) -> int:
    """Bracket code of the grid cell containing the value ``x``."""
    k = math.floor(x * q)
    return 2 * k + (0 if x * q == k else 1)


# ------------------------------------------------------ probability parts

def _popcount(x: int) -> int:
    return bin(x).count("1")


@lru_cache(maxsize=None)
def representative_events(width: int) -> tuple[int, ...]:
    """Nonempty events missing assignment 0, by size then value.

    Every other event is the complement of one of these, or empty.
    """
    n0 = 1 << width
    evs = [E for E in range(1, 1 << n0) if not E & 1]
    return tuple(sorted(evs, key=lambda E: (_popcount(E), E)))


@dataclass(frozen=True)
class ProbabilitySpec:
    """Bracket codes for every event over the truth assignments of ``letters``."""

    q: int
    letters: tuple[int, ...]
    codes: tuple[int, ...]

    @property
    def width(self) -> int:
        return len(self.letters)

    def bracket(self, event: int | Iterable[int]) -> Bracket:
        E = event if isinstance(event, int) else mask_of(event)
        return Bracket.from_code(self.codes[E], self.q)

    def items(self):
        """``(event mask, bracket)`` for the representative events."""
        return [(E, self.bracket(E)) for E in representative_events(self.width)]

    def key(self) -> str:
        return ",".join(str(self.bracket(E)) for E in representative_events(self.width))


def _budget(q: int, width: int) -> None:
    if q < 1:
        raise ValueError("accuracy must be positive")
    if width == 0:
        return
    if width == 1 and q <= MAX_Q_ONE_LETTER:
        return
    if width == 2 and q <= MAX_Q_TWO_LETTERS:
        return
    raise BudgetExceeded(
        f"enumeration supports one letter with q <= {MAX_Q_ONE_LETTER} "
        f"or two letters with q <= {MAX_Q_TWO_LETTERS}; got {width} letters, q = {q}"
    )


def _bracket_constraints(sys: LinearSystem, E: int, code: int, q: int) -> None:
    b = Bracket.from_code(code, q)
    coeffs = {a: 1 for a in range(sys.n) if E >> a & 1}
    if b.is_point:
        sys.constraints.append(Constraint(coeffs, "=", b.lo))
    else:
        sys.constraints.append(Constraint(coeffs, ">", b.lo))
        sys.constraints.append(Constraint(coeffs, "<", b.hi))


def _system_for(assignments: Sequence[tuple[int, int]], width: int, q: int) -> LinearSystem:
    n0 = 1 << width
    sys = LinearSystem(n0, [Constraint([1] * n0, "=", 1)])
    for E, code in assignments:
        _bracket_constraints(sys, E, code, q)
    return sys


def _full_codes(assigned: dict[int, int], width: int, q: int) -> tuple[int, ...]:
    n0 = 1 << width
    full = (1 << n0) - 1
    codes = [0] * (1 << n0)
    codes[0] = 0
    codes[full] = 2 * q
    for E, c in assigned.items():
        codes[E] = c
        codes[full & ~E] = 2 * q - c
    return tuple(codes)


@lru_cache(maxsize=None)
def _enumerate_codes(q: int, width: int) -> tuple[tuple[int, ...], ...]:
    events = representative_events(width)
    n0 = 1 << width
    full = (1 << n0) - 1
    out: list[tuple[int, ...]] = []
    assigned: dict[int, int] = {}

    def forced_code(E: int) -> int | None:
        # an event splits into disjoint earlier events when both halves are points
        for A in assigned:
            if A & E == A and A != E:
                B = E & ~A
                cb = assigned.get(B)
                if cb is None and B & 1:
                    cb_comp = assigned.get(full & ~B)
                    cb = None if cb_comp is None else 2 * q - cb_comp
                ca = assigned[A]
                if cb is not None and ca % 2 == 0 and cb % 2 == 0:
                    return ca + cb
        return None

    def dfs(i: int) -> None:
        if i == len(events):
            out.append(_full_codes(assigned, width, q))
            return
        E = events[i]
        forced = forced_code(E)
        choices = [forced] if forced is not None else range(2 * q + 1)
        for c in choices:
            if c > 2 * q:
                continue
            assigned[E] = c
            if lp_feasible(_system_for(list(assigned.items()), width, q)).feasible:
                dfs(i + 1)
            del assigned[E]

    dfs(0)
    return tuple(out)


def enumerate_prob_parts(q: int, P: Iterable[int]) -> list[ProbabilitySpec]:
    """All jointly realizable bracket assignments for the 1/q grid over ``P``.

    A depth-first search assigns brackets to events in order of size,
    discarding any partial assignment the exact LP cannot realize.
    """
    letters_ = tuple(sorted(set(P)))
    _budget(q, len(letters_))
    return [ProbabilitySpec(q, letters_, c) for c in _enumerate_codes(q, len(letters_))]


def spec_constraints(spec: ProbabilitySpec) -> LinearSystem:
    return _system_for([(E, spec.codes[E]) for E in representative_events(spec.width)], spec.width, spec.q)


@lru_cache(maxsize=None)
def representative_measure(spec: ProbabilitySpec) -> tuple[Fraction, ...]:
    """A measure over truth assignments realizing every bracket of ``spec``.

    It is the vertex that maximizes the common distance to all open
    bracket endpoints, so one-dimensional open brackets land at their
    midpoints.
    """
    rep = lp_feasible(spec_constraints(spec))
    if not rep.feasible:
        raise ModelError("inconsistent probability specification")
    return rep.witness


# ---------------------------------------------------------------- atoms

@dataclass(frozen=True)
class Atom1:
    """A depth-1 atom: a truth assignment together with a probability part."""

    prop: int
    spec: ProbabilitySpec

    @property
    def letters(self) -> tuple[int, ...]:
        return self.spec.letters

    @property
    def assignment(self) -> dict[int, bool]:
        return {p: bool(self.prop >> j & 1) for j, p in enumerate(self.letters)}

    def true_letters(self) -> frozenset[int]:
        return frozenset(p for j, p in enumerate(self.letters) if self.prop >> j & 1)


def enumerate_atoms1(q: int, P: Iterable[int]) -> list[Atom1]:
    """Every (assignment, probability part) pair, grouped by probability part."""
    specs = enumerate_prob_parts(q, P)
    letters_ = tuple(sorted(set(P)))
    return [Atom1(a, s) for s in specs for a in range(1 << len(letters_))]


@dataclass(frozen=True, eq=False)
class CanonicalModel:
    space: FiniteTypeSpace
    atoms: tuple[Atom1, ...]
    q: int
    letters: tuple[int, ...]

    def __iter__(self):
        # allows ``space, atoms = build_canonical_harsanyi(...)``
        return iter((self.space, self.atoms))

    def group(self, i: int) -> range:
        """States sharing the probability part of state ``i``."""
        n0 = 1 << len(self.letters)
        start = i - i % n0
        return range(start, start + n0)

    def index(self, atom: Atom1) -> int:
        return self._index[atom]

    def __post_init__(self):
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.atoms)})


@lru_cache(maxsize=None)
def _build(q: int, letters_: tuple[int, ...]) -> CanonicalModel:
    atoms = tuple(enumerate_atoms1(q, letters_))
    n0 = 1 << len(letters_)
    rows = []
    for g in range(0, len(atoms), n0):
        mu = representative_measure(atoms[g].spec)
        row = tuple((g + a, mu[a]) for a in range(n0) if mu[a] != 0)
        rows.extend([row] * n0)
    valuation = {p: frozenset(i for i, at in enumerate(atoms) if at.prop >> j & 1) for j, p in enumerate(letters_)}
    space = FiniteTypeSpace(len(atoms), {1: tuple(rows)}, valuation)
    return CanonicalModel(space, atoms, q, letters_)


def build_canonical_harsanyi(q: int, P: Iterable[int]) -> CanonicalModel:
    """The canonical Harsanyi model over depth-1 atoms.

    States are the atoms; the type of an atom puts the representative
    measure of its probability part on the atoms of its own group, one per
    truth assignment.  Unpacks as ``(space, atoms)``.
    """
    letters_ = tuple(sorted(set(P)))
    _budget(q, len(letters_))
    return _build(q, letters_)


# ---------------------------------------------------------- truth lemma

def _prop_event(phi: Formula, letters_: tuple[int, ...]) -> int:
    width = len(letters_)
    mask = 0
    for a in range(1 << width):
        true = {p for j, p in enumerate(letters_) if a >> j & 1}
        if eval_propositional(phi, true):
            mask |= 1 << a
    return mask


def _check_index(r: Fraction, q: int, f: Formula) -> None:
    if (r * q).denominator != 1:
        raise UnsupportedFormula(f"index {r} is not on the 1/{q} grid: {render(f)}")


def entails(atom: Atom1, f: Formula) -> bool:
    """Decide a depth <= 1 formula from the atom's bracket data alone.

    ``L_r phi`` holds iff the bracket of ``[phi]`` has lower end ``>= r``
    (for points) or ``> r - 1/q`` (for open cells); ``M_r`` dually.
    """
    q, letters_ = atom.spec.q, atom.letters
    if isinstance(f, Letter):
        if f.id not in letters_:
            raise ModelError(f"unknown letter p{f.id}")
        return bool(atom.prop >> letters_.index(f.id) & 1)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Neg):
        return not entails(atom, f.sub)
    if isinstance(f, And):
        return entails(atom, f.left) and entails(atom, f.right)
    if isinstance(f, Or):
        return entails(atom, f.left) or entails(atom, f.right)
    if isinstance(f, Implies):
        return (not entails(atom, f.left)) or entails(atom, f.right)
    if isinstance(f, Iff):
        return entails(atom, f.left) == entails(atom, f.right)
    if isinstance(f, (L, M)):
        if depth(f.sub) > 0:
            raise UnsupportedFormula(f"entails handles depth <= 1 only: {render(f)}")
        _check_index(f.r, q, f)
        b = atom.spec.bracket(_prop_event(f.sub, letters_))
        if isinstance(f, L):
            return b.lo >= f.r
        return b.hi <= f.r
    raise UnsupportedFormula(f"cannot decide {render(f)}")


# ------------------------------------------------------- satisfiability

@dataclass(frozen=True)
class SatWitness:
    model: FiniteTypeSpace
    state: int
    atom: Atom1 | None = None


def _single_agent_check(f: Formula) -> None:
    if has_knowledge(f):
        raise UnsupportedFormula("knowledge operators are not decided here")
    if agents(f) - {1}:
        raise UnsupportedFormula("only single-agent (agent 1) formulas are decided")


def sat(f: Formula, logic: str = SIGMA_H) -> SatWitness | None:
    """Return a satisfying state, or None if ``f`` is unsatisfiable.

    ``SigmaH`` evaluates ``f`` in the canonical model for its own accuracy
    and letters.  ``SigmaPlus`` (depth <= 1 only) guesses truth values for
    the belief subformulas and solves the resulting exact LP; its witness
    model has one state per truth assignment, all sharing one measure.
    """
    _single_agent_check(f)
    if logic == SIGMA_H:
        cm = build_canonical_harsanyi(accuracy(f), letters(f))
        mask = Evaluator(cm.space).mask(f)
        if not mask:
            return None
        w = (mask & -mask).bit_length() - 1
        return SatWitness(cm.space, w, cm.atoms[w])
    if logic == SIGMA_PLUS:
        if depth(f) > 1:
            raise UnsupportedFormula("SigmaPlus is decided for depth <= 1 only")
        return _sat_depth_one(f)
    raise ValueError(f"unknown logic {logic!r}")


def valid(f: Formula, logic: str = SIGMA_H) -> bool:
    return sat(Neg(f), logic) is None


def counter_witness(f: Formula, logic: str = SIGMA_H) -> SatWitness | None:
    return sat(Neg(f), logic)


MAX_SIGMA_PLUS_LETTERS = 6
MAX_SIGMA_PLUS_BELIEFS = 14


def _sat_depth_one(f: Formula) -> SatWitness | None:
    core = desugar_M(f)
    letters_ = tuple(sorted(letters(core)))
    if len(letters_) > MAX_SIGMA_PLUS_LETTERS:
        raise BudgetExceeded(f"at most {MAX_SIGMA_PLUS_LETTERS} letters")
    beliefs = []
    for g in subformulas(core):
        if isinstance(g, L) and g not in beliefs:
            beliefs.append(g)
    if len(beliefs) > MAX_SIGMA_PLUS_BELIEFS:
        raise BudgetExceeded(f"at most {MAX_SIGMA_PLUS_BELIEFS} distinct belief subformulas")
    events = [_prop_event(b.sub, letters_) for b in beliefs]
    n0 = 1 << len(letters_)

    def truth(g: Formula, a: int, guess: int) -> bool:
        if isinstance(g, L):
            return bool(guess >> beliefs.index(g) & 1)
        if isinstance(g, Letter):
            return bool(a >> letters_.index(g.id) & 1)
        if isinstance(g, Top):
            return True
        if isinstance(g, Bot):
            return False
        if isinstance(g, Neg):
            return not truth(g.sub, a, guess)
        if isinstance(g, And):
            return truth(g.left, a, guess) and truth(g.right, a, guess)
        if isinstance(g, Or):
            return truth(g.left, a, guess) or truth(g.right, a, guess)
        if isinstance(g, Implies):
            return (not truth(g.left, a, guess)) or truth(g.right, a, guess)
        if isinstance(g, Iff):
            return truth(g.left, a, guess) == truth(g.right, a, guess)
        raise UnsupportedFormula(render(g))

    for guess in range(1 << len(beliefs)):
        state = next((a for a in range(n0) if truth(core, a, guess)), None)
        if state is None:
            continue
        sys = LinearSystem(n0, [Constraint([1] * n0, "=", 1)])
        for k, (b, E) in enumerate(zip(beliefs, events)):
            coeffs = {a: 1 for a in range(n0) if E >> a & 1}
            sys.constraints.append(Constraint(coeffs, ">=" if guess >> k & 1 else "<", b.r))
        rep = lp_feasible(sys)
        if rep.feasible:
            nu = rep.witness
            row = tuple((a, nu[a]) for a in range(n0) if nu[a] != 0)
            valuation = {p: frozenset(a for a in range(n0) if a >> j & 1) for j, p in enumerate(letters_)}
            model = FiniteTypeSpace(n0, {1: (row,) * n0}, valuation)
            return SatWitness(model, state)
    return None


# ----------------------------------------------------------- cardinality

def cardinality(q: int, d: int, w: int) -> int:
    """Number of depth-``d`` atoms over ``w`` letters at accuracy ``q``.

    Counted at depth 1; deeper atoms are in one-to-one correspondence with
    depth-1 atoms (see :func:`verify_unique_extension`).
    """
    if d < 1:
        raise ValueError("depth must be at least 1")
    if w < 0:
        raise ValueError("letter count must be non-negative")
    return len(enumerate_atoms1(q, range(1, w + 1)))


# ------------------------------------------------------ unique extension

def unique_extension_brackets(a: Atom1, E: Iterable[Atom1]) -> Bracket:
    """Bracket of a set of depth-1 atoms in the depth-2 extension of ``a``.

    Only members sharing ``a``'s probability part count; the answer is the
    bracket ``a`` gives to the union of their truth assignments.
    """
    mask = 0
    for b in E:
        if b.spec == a.spec:
            mask |= 1 << b.prop
    return a.spec.bracket(mask)


def _group_region(spec: ProbabilitySpec) -> FeasibleRegion:
    return FeasibleRegion(spec_constraints(spec))


def _strictly_inside_feasible(spec: ProbabilitySpec, E: int, rel: str, bound: Fraction) -> bool:
    sys = spec_constraints(spec)
    coeffs = {a: 1 for a in range(sys.n) if E >> a & 1}
    sys.constraints.append(Constraint(coeffs, rel, bound))
    return lp_feasible(sys).feasible


def _compatible_brackets(spec: ProbabilitySpec, E: int, region: FeasibleRegion) -> list[int]:
    """Grid brackets some realization of ``spec`` can give the event ``E``.

    The LP ranges over measures on the group's atoms (one variable per truth
    assignment, total mass 1 on the group) whose pushforward matches the
    probability part.  Min and max of ``mu(E)`` over the closure bound the
    candidates; each candidate bracket is then tested for exact (strict)
    realizability.
    """
    q = spec.q
    obj = {a: 1 for a in range(1 << spec.width) if E >> a & 1}
    lo = region.optimize(obj, "min")[0]
    hi = region.optimize(obj, "max")[0]
    out = []
    for c in range(code_of_value(lo, q), code_of_value(hi, q) + 1):
        b = Bracket.from_code(c, q)
        if b.is_point:
            ok = _strictly_inside_feasible(spec, E, "=", b.lo)
        else:
            sys = spec_constraints(spec)
            _bracket_constraints(sys, E, c, q)
            ok = lp_feasible(sys).feasible
        if ok:
            out.append(c)
    return out


def _verify_group(args) -> dict[int, list[int]]:
    q, letters_, codes = args
    spec = ProbabilitySpec(q, letters_, codes)
    region = _group_region(spec)
    return {trace: _compatible_brackets(spec, trace, region) for trace in range(len(codes))}


LITERAL_EVENT_LIMIT = 16


def verify_unique_extension(q: int, P: Iterable[int], threads: int = 1) -> CheckReport:
    """Certify that depth-1 data fixes every depth-2 bracket.

    For an atom ``a`` and an event ``E`` (any set of canonical states) the
    exact LP ranges over measures giving ``a``'s group mass 1 whose
    pushforward to truth assignments realizes ``a``'s probability part.
    Since such measures vanish off the group, ``mu(E)`` depends only on the
    trace of ``E`` on the group, and the LP is solved once per trace.  A
    pair passes when exactly one grid bracket is realizable and it equals
    :func:`unique_extension_brackets`.

    With at most ``LITERAL_EVENT_LIMIT`` states every event is visited;
    beyond that each trace is checked once and weighted by the number of
    events sharing it.
    """
    cm = build_canonical_harsanyi(q, P)
    n0 = 1 << len(cm.letters)
    n_states = len(cm.atoms)
    rep = CheckReport(f"unique extension, q={q}, letters={list(cm.letters)}")
    rep.declare("unique_bracket")
    tasks = [(q, cm.letters, cm.atoms[g].spec.codes) for g in range(0, n_states, n0)]
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            tables = list(pool.map(_verify_group, tasks))
    else:
        tables = [_verify_group(t) for t in tasks]

    def check(i: int, E_states: list[int], trace: int, weight: int) -> None:
        atom = cm.atoms[i]
        predicted = unique_extension_brackets(atom, [cm.atoms[s] for s in E_states])
        compat = tables[i // n0][trace]
        ok = compat == [predicted.code(q)]
        rep.checked["unique_bracket"] += weight
        if not ok:
            rep.failure_counts["unique_bracket"] += weight
            if len(rep.failures["unique_bracket"]) < rep.limit:
                rep.failures["unique_bracket"].append(
                    (i, tuple(E_states), str(predicted), [str(Bracket.from_code(c, q)) for c in compat])
                )
        mass = cm.space.prob(1, i, E_states)
        rep.record("canonical_measure_in_bracket", predicted.contains(mass), (i, tuple(E_states), str(predicted), mass))

    if n_states <= LITERAL_EVENT_LIMIT:
        for i in range(n_states):
            g0 = i - i % n0
            for E in range(1 << n_states):
                check(i, sorted(set_of(E)), (E >> g0) & ((1 << n0) - 1), 1)
        rep.notes.append(f"{n_states} atoms x {1 << n_states} events visited")
    else:
        weight = 1 << (n_states - n0)
        for i in range(n_states):
            g0 = i - i % n0
            for trace in range(1 << n0):
                check(i, [g0 + a for a in range(n0) if trace >> a & 1], trace, weight)
        rep.notes.append(f"{n_states} atoms; events grouped by their trace on the atom's group")
    return rep


# --------------------------------------------------------------- export

def atom_index(cm: CanonicalModel) -> dict:
    """JSON-ready map from state id to assignment and brackets."""
    out = {}
    for i, a in enumerate(cm.atoms):
        out[str(i)] = {
            "assignment": {f"p{p}": v for p, v in a.assignment.items()},
            "brackets": {
                _event_name(E, cm.letters): str(b) for E, b in a.spec.items()
            },
        }
    return out


def _event_name(E: int, letters_: tuple[int, ...]) -> str:
    parts = []
    for a in range(1 << len(letters_)):
        if E >> a & 1:
            lits = [f"p{p}" if a >> j & 1 else f"~p{p}" for j, p in enumerate(letters_)]
            parts.append("&".join(lits) if lits else "true")
    return " | ".join(parts) if parts else "false"
