"""Statements, normal forms and the denesting rewriter.

A formula is *normal* when it is built by these rules (``M`` is first
rewritten as ``L``):

1. every formula of depth at most 1 is normal;
2. a Boolean combination of normal ``L``-formulas is normal;
3. if ``L_r phi`` is normal with ``r > 0`` and ``psi`` is a Boolean
   combination of normal ``L_s psi'`` with ``s > 0``, then ``L_r psi``,
   ``L_r (phi & psi)`` and ``L_r (phi | psi)`` are normal (either operand
   order is accepted).

Normal formulas are rewritten to depth at most 1 with three equivalences,
valid over Harsanyi spaces for ``r > 0`` and ``psi`` a combination of
belief formulas::

    L_r psi            <->  psi
    L_r (phi & psi)    <->  L_r phi & psi
    L_r (phi | psi)    <->  L_r phi | psi
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .canon import Atom1, build_canonical_harsanyi, representative_events, valid
from .errors import BudgetExceeded, NotNormal, UnsupportedFormula
from .formula import (
    And,
    Bot,
    Formula,
    Iff,
    Implies,
    K,
    L,
    Letter,
    LocalLanguage,
    M,
    Neg,
    Or,
    Top,
    agents,
    conj,
    depth,
    desugar_M,
    disj,
    has_knowledge,
    letters,
    render,
)
from .models import Evaluator, evaluate, extension, random_harsanyi_space

_BOOL = (Neg, And, Or, Implies, Iff)


def _bool_children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Neg):
        return (f.sub,)
    return (f.left, f.right)


def _as_L(f: Formula) -> L | None:
    """View ``f`` as an ``L`` node, reading ``M_s phi`` as ``L_{1-s} ~phi``."""
    if isinstance(f, L):
        return f
    if isinstance(f, M):
        return L(f.agent, 1 - f.r, Neg(f.sub))
    return None


def _is_lcomb(f: Formula, leaf_ok) -> bool:
    """Boolean combination of belief formulas, each accepted by ``leaf_ok``."""
    lf = _as_L(f)
    if lf is not None:
        return leaf_ok(lf)
    if isinstance(f, _BOOL):
        return all(_is_lcomb(c, leaf_ok) for c in _bool_children(f))
    return False


def _check_fragment(f: Formula) -> None:
    if has_knowledge(f):
        raise UnsupportedFormula("denesting does not cover knowledge operators")
    if agents(f) - {1}:
        raise UnsupportedFormula("denesting is single-agent")


def _normal(f: Formula) -> bool:
    if depth(f) <= 1:
        return True
    lf = _as_L(f)
    if lf is None:
        # clause 2: Boolean combination of normal belief formulas
        return _is_lcomb(f, _normal)
    if lf.r <= 0:
        return False
    body = lf.sub

    def positive_normal(g: L) -> bool:
        return g.r > 0 and _normal(g)

    if _is_lcomb(body, positive_normal):
        return True
    if isinstance(body, (And, Or)):
        for phi, psi in ((body.left, body.right), (body.right, body.left)):
            if _is_lcomb(psi, positive_normal) and _normal(L(lf.agent, lf.r, phi)):
                return True
    return False


def is_normal(f: Formula) -> bool:
    """Whether ``f`` is generated by the three normality rules."""
    _check_fragment(f)
    return _normal(f)


def _is_belief_comb(f: Formula) -> bool:
    return _is_lcomb(f, lambda g: True)


def _denest_L(r: Fraction, agent: int, body: Formula) -> Formula:
    """Rewrite ``L_r body`` where ``body`` already has depth at most 1."""
    f = L(agent, r, body)
    if depth(f) <= 1:
        return f
    if r > 0 and _is_belief_comb(body):
        return body
    if r > 0 and isinstance(body, (And, Or)):
        join = And if isinstance(body, And) else Or
        if _is_belief_comb(body.right):
            return join(_denest_L(r, agent, body.left), body.right)
        if _is_belief_comb(body.left):
            return join(body.left, _denest_L(r, agent, body.right))
    raise NotNormal(f"no denesting rule applies to {render(f)}")


def _denest(f: Formula) -> Formula:
    if depth(f) <= 1:
        return f
    lf = _as_L(f)
    if lf is not None:
        return _denest_L(lf.r, lf.agent, _denest(lf.sub))
    if isinstance(f, Neg):
        return Neg(_denest(f.sub))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_denest(f.left), _denest(f.right))
    raise NotNormal(f"cannot denest {render(f)}")


def denest(f: Formula) -> Formula:
    """An equivalent formula of depth at most 1, rewriting innermost first.

    Formulas of depth at most 1 are returned unchanged.
    """
    if not is_normal(f):
        raise NotNormal(f"not a normal formula: {render(f)}")
    g = _denest(f)
    assert depth(g) <= 1
    return g


FALLBACK_MODELS = 200


def verify_denest(f: Formula, g: Formula | None = None, models: int = 0, seed: int = 0) -> bool:
    """Check ``depth(g) <= 1`` and ``f <-> g``: canonically, then on random spaces.

    When the canonical model is over budget the check runs on at least
    ``FALLBACK_MODELS`` random Harsanyi spaces instead.
    """
    g = denest(f) if g is None else g
    if depth(g) > 1:
        return False
    eq = Iff(f, g)
    try:
        if not valid(eq):
            return False
    except BudgetExceeded:
        models = max(models, FALLBACK_MODELS)
    rng = random.Random(seed)
    for _ in range(models):
        m = random_harsanyi_space(rng, rng.randint(1, 5), q=rng.choice((2, 4, 6)), letter_ids=sorted(letters(eq)) or [1])
        if extension(m, eq) != frozenset(m.states):
            return False
    return True


# ------------------------------------------------------------ statements

@dataclass(frozen=True)
class Statement:
    """Propositional part (literals) and probability part of an atom."""

    prop_part: Formula
    prob_part: Formula
    atom: Atom1 | None = None

    @property
    def formula(self) -> Formula:
        return conj(_conjuncts(self.prop_part) + _conjuncts(self.prob_part))

    def __str__(self):
        return render(self.formula)


def _conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, Top):
        return []
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _literal(p: int, value: bool) -> Formula:
    return Letter(p) if value else Neg(Letter(p))


def event_formula(E: int, letters_: tuple[int, ...]) -> Formula:
    """A short propositional formula whose truth set is the event ``E``.

    Tries a literal, then a conjunction or disjunction of two literals,
    and falls back to the disjunction of minterms.
    """
    width = len(letters_)
    n0 = 1 << width
    full = (1 << n0) - 1
    lits = []
    for j, p in enumerate(letters_):
        pos = sum(1 << a for a in range(n0) if a >> j & 1)
        lits.append((Letter(p), pos))
        lits.append((Neg(Letter(p)), full & ~pos))
    if E == full:
        return Top()
    if E == 0:
        return Bot()
    for f, m in lits:
        if m == E:
            return f
    for i, (f1, m1) in enumerate(lits):
        for f2, m2 in lits[i + 1:]:
            if m1 & m2 == E and f1 != Neg(f2) and f2 != Neg(f1):
                return And(f1, f2)
    for i, (f1, m1) in enumerate(lits):
        for f2, m2 in lits[i + 1:]:
            if m1 | m2 == E and f1 != Neg(f2) and f2 != Neg(f1):
                return Or(f1, f2)
    minterms = [
        conj(_literal(p, bool(a >> j & 1)) for j, p in enumerate(letters_))
        for a in range(n0)
        if E >> a & 1
    ]
    return disj(minterms)


def statement(atom: Atom1) -> Statement:
    letters_ = atom.letters
    prop = conj(_literal(p, v) for p, v in atom.assignment.items())
    parts: list[Formula] = []
    for E in representative_events(len(letters_)):
        phi = event_formula(E, letters_)
        b = atom.spec.bracket(E)
        if b.is_point:
            parts += [L(1, b.lo, phi), M(1, b.lo, phi)]
        else:
            parts += [L(1, b.lo, phi), Neg(M(1, b.lo, phi)), M(1, b.hi, phi), Neg(L(1, b.hi, phi))]
    return Statement(prop, conj(parts), atom)


def statement_of(atom: Atom1) -> Formula:
    """The conjunction describing ``atom``: its literals, then its brackets."""
    return statement(atom).formula


def normal_form(f: Formula, lang: LocalLanguage) -> list[Statement]:
    """Statements of the canonical atoms satisfying ``f``, in atom order."""
    if f not in lang:
        raise ValueError(f"{render(f)} is not in L({lang.q}, {lang.d}, {sorted(lang.P)})")
    _check_fragment(f)
    cm = build_canonical_harsanyi(lang.q, lang.P)
    ev = Evaluator(cm.space)
    mask = ev.mask(f)
    return [statement(a) for i, a in enumerate(cm.atoms) if mask >> i & 1]


def normal_form_formula(statements: list[Statement]) -> Formula:
    return disj(s.formula for s in statements)


# -------------------------------------------------- random normal formulas

def random_normal_formula(
    rng: random.Random, letter_ids=(1,), q: int = 2, max_depth: int = 3
) -> Formula:
    """A random formula generated by the normality rules, depth <= ``max_depth``."""

    def idx(positive: bool = False) -> Fraction:
        lo = 1 if positive else 0
        return Fraction(rng.randint(lo, q), q)

    def prop(size: int = 2) -> Formula:
        if size <= 0 or rng.random() < 0.4:
            return Letter(rng.choice(letter_ids))
        kind = rng.choice((Neg, And, Or, Implies))
        if kind is Neg:
            return Neg(prop(size - 1))
        return kind(prop(size - 1), prop(size - 1))

    def depth1() -> Formula:
        body = prop()
        return L(1, idx(), body) if rng.random() < 0.7 else M(1, idx(), body)

    def positive_leaf(d: int) -> Formula:
        """A normal belief formula with positive index and depth <= d."""
        if d <= 1 or rng.random() < 0.3:
            return L(1, idx(True), prop())
        return normal_L(d)

    def bool_comb(d: int, leaf) -> Formula:
        g = leaf(d)
        for _ in range(rng.randint(0, 2)):
            op = rng.choice((And, Or, Implies, Iff, "neg"))
            if op == "neg":
                g = Neg(g)
            else:
                g = op(g, leaf(d)) if rng.random() < 0.5 else op(leaf(d), g)
        return g

    def normal_L(d: int) -> Formula:
        """A normal ``L_r`` formula (r > 0) of depth <= d, built by rule 3."""
        r = idx(True)
        psi = bool_comb(d - 1, positive_leaf)
        shape = rng.choice(("plain", "and", "or"))
        if shape == "plain":
            return L(1, r, psi)
        phi_node = normal_L(d - 1) if d > 2 and rng.random() < 0.4 else L(1, r, prop())
        phi = phi_node.sub  # L_r phi is normal
        join = And if shape == "and" else Or
        body = join(phi, psi) if rng.random() < 0.5 else join(psi, phi)
        return L(1, r, body)

    roll = rng.random()
    if roll < 0.15:
        return bool_comb(1, lambda d: depth1())
    if roll < 0.5:
        return bool_comb(max_depth, normal_L)
    return normal_L(max_depth)
