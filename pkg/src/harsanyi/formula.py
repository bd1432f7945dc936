"""Belief/knowledge formulas: AST, parser, printer and syntactic measures.

Grammar (loosest binding first)::

    iff   := imp ('<->' iff)?
    imp   := or ('->' imp)?
    or    := and ('|' and)*
    and   := unary ('&' unary)*
    unary := '~' unary | L_i[r] unary | M_i[r] unary | K_i unary | atom
    atom  := p<digits> | true | false | '(' iff ')'

The agent suffix ``_i`` is optional and defaults to agent 1.  Indices are
written ``n/d`` (or a bare integer) and must lie in [0, 1].
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator

from .errors import FormulaSyntaxError


def prob_index(value) -> Fraction:
    """Coerce ``value`` to an exact index in [0, 1]."""
    r = Fraction(value)
    if not 0 <= r <= 1:
        raise ValueError(f"probability index {r} outside [0, 1]")
    return r


class Formula:
    __slots__ = ()

    def __invert__(self):
        return Neg(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __rshift__(self, other):
        return Implies(self, other)

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Letter(Formula):
    id: int

    def __post_init__(self):
        if self.id < 1:
            raise ValueError("letter ids are positive integers")


@dataclass(frozen=True)
class Neg(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class L(Formula):
    """Agent ``agent`` assigns probability at least ``r`` to ``sub``."""

    agent: int
    r: Fraction
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "r", prob_index(self.r))
        if self.agent < 1:
            raise ValueError("agent ids are positive integers")


@dataclass(frozen=True)
class M(Formula):
    """Agent ``agent`` assigns probability at most ``r`` to ``sub``."""

    agent: int
    r: Fraction
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "r", prob_index(self.r))
        if self.agent < 1:
            raise ValueError("agent ids are positive integers")


@dataclass(frozen=True)
class K(Formula):
    agent: int
    sub: Formula

    def __post_init__(self):
        if self.agent < 1:
            raise ValueError("agent ids are positive integers")


TOP = Top()
BOT = Bot()
_BINARY = (And, Or, Implies, Iff)
_MODAL = (L, M, K)


def p(i: int) -> Letter:
    return Letter(i)


def conj(formulas: Iterable[Formula]) -> Formula:
    formulas = list(formulas)
    if not formulas:
        return TOP
    return reduce(And, formulas)


def disj(formulas: Iterable[Formula]) -> Formula:
    formulas = list(formulas)
    if not formulas:
        return BOT
    return reduce(Or, formulas)


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    if isinstance(f, (Neg,) + _MODAL):
        return (f.sub,)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal including ``f`` itself."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def letters(f: Formula) -> frozenset[int]:
    return frozenset(g.id for g in subformulas(f) if isinstance(g, Letter))


def agents(f: Formula) -> frozenset[int]:
    return frozenset(g.agent for g in subformulas(f) if isinstance(g, _MODAL))


def indices(f: Formula) -> list[Fraction]:
    return [g.r for g in subformulas(f) if isinstance(g, (L, M))]


def has_knowledge(f: Formula) -> bool:
    return any(isinstance(g, K) for g in subformulas(f))


def depth(f: Formula) -> int:
    """Modal nesting depth; L, M and K each add one layer."""
    if isinstance(f, _MODAL):
        return depth(f.sub) + 1
    return max((depth(c) for c in children(f)), default=0)


def accuracy(f: Formula) -> int:
    """Least common multiple of index denominators (1 when there are none)."""
    return reduce(math.lcm, (r.denominator for r in indices(f)), 1)


def desugar_M(f: Formula) -> Formula:
    """Replace every ``M_r phi`` by ``L_{1-r} ~phi``; other nodes are kept."""
    if isinstance(f, M):
        return L(f.agent, 1 - f.r, Neg(desugar_M(f.sub)))
    if isinstance(f, (L, K)):
        sub = desugar_M(f.sub)
        if sub is f.sub:
            return f
        return L(f.agent, f.r, sub) if isinstance(f, L) else K(f.agent, sub)
    if isinstance(f, Neg):
        sub = desugar_M(f.sub)
        return f if sub is f.sub else Neg(sub)
    if isinstance(f, _BINARY):
        left, right = desugar_M(f.left), desugar_M(f.right)
        if left is f.left and right is f.right:
            return f
        return type(f)(left, right)
    return f


def desugar(f: Formula) -> Formula:
    """Rewrite into the core connectives ~, &, L, K (plus true/false)."""
    if isinstance(f, Neg):
        return Neg(desugar(f.sub))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Neg(And(Neg(desugar(f.left)), Neg(desugar(f.right))))
    if isinstance(f, Implies):
        return Neg(And(desugar(f.left), Neg(desugar(f.right))))
    if isinstance(f, Iff):
        a, b = desugar(f.left), desugar(f.right)
        return And(Neg(And(a, Neg(b))), Neg(And(b, Neg(a))))
    if isinstance(f, M):
        return L(f.agent, 1 - f.r, Neg(desugar(f.sub)))
    if isinstance(f, L):
        return L(f.agent, f.r, desugar(f.sub))
    if isinstance(f, K):
        return K(f.agent, desugar(f.sub))
    return f


def eval_propositional(f: Formula, true_letters) -> bool:
    """Truth value of a modality-free formula under the given letter set."""
    if isinstance(f, Letter):
        return f.id in true_letters
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Neg):
        return not eval_propositional(f.sub, true_letters)
    if isinstance(f, And):
        return eval_propositional(f.left, true_letters) and eval_propositional(f.right, true_letters)
    if isinstance(f, Or):
        return eval_propositional(f.left, true_letters) or eval_propositional(f.right, true_letters)
    if isinstance(f, Implies):
        return (not eval_propositional(f.left, true_letters)) or eval_propositional(f.right, true_letters)
    if isinstance(f, Iff):
        return eval_propositional(f.left, true_letters) == eval_propositional(f.right, true_letters)
    raise ValueError(f"not propositional: {render(f)}")


@dataclass(frozen=True)
class LocalLanguage:
    """Formulas over letters ``P`` with indices on the 1/q grid and depth <= d."""

    q: int
    d: int
    P: frozenset[int]

    def __post_init__(self):
        if self.q < 1 or self.d < 0:
            raise ValueError("need q >= 1 and d >= 0")
        object.__setattr__(self, "P", frozenset(self.P))

    def grid(self) -> list[Fraction]:
        return [Fraction(k, self.q) for k in range(self.q + 1)]

    def __contains__(self, f: Formula) -> bool:
        return (
            letters(f) <= self.P
            and depth(f) <= self.d
            and all((r * self.q).denominator == 1 for r in indices(f))
        )


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<iff><->|↔)
  | (?P<imp>->|→)
  | (?P<and>&|∧)
  | (?P<or>\||∨)
  | (?P<neg>~|¬)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<letter>p(?P<lid>\d+))
  | (?P<const>true|false|⊤|⊥)
  | (?P<modal>[LMK])(?:_(?P<agent>\d+))?
  | (?P<index>\[\s*(?P<num>\d+)\s*(?:/\s*(?P<den>\d+)\s*)?\])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    match: re.Match | None = None


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind in ("lid", "agent", "num", "den"):
            kind = next(k for k in ("letter", "modal", "index") if m.group(k))
        if kind != "ws":
            toks.append(_Tok(kind, m.group(0), line, pos - line_start + 1, m))
        for i, ch in enumerate(m.group(0)):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind=None) -> _Tok:
        tok = self.toks[self.i]
        if kind is not None and tok.kind != kind:
            want = {"rpar": "')'", "eof": "end of input"}.get(kind, kind)
            got = repr(tok.text) if tok.text else "end of input"
            raise FormulaSyntaxError(f"expected {want}, found {got}", tok.line, tok.col)
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        self.take("eof")
        return f

    def iff(self):
        left = self.imp()
        if self.peek().kind == "iff":
            self.take()
            return Iff(left, self.iff())
        return left

    def imp(self):
        left = self.disj()
        if self.peek().kind == "imp":
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self):
        f = self.conj()
        while self.peek().kind == "or":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek().kind == "and":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        tok = self.peek()
        if tok.kind == "neg":
            self.take()
            return Neg(self.unary())
        if tok.kind == "modal":
            self.take()
            op = tok.match.group("modal")
            agent = int(tok.match.group("agent") or 1)
            if agent < 1:
                raise FormulaSyntaxError("agent ids are positive integers", tok.line, tok.col)
            if op == "K":
                return K(agent, self.unary())
            r = self.index()
            return (L if op == "L" else M)(agent, r, self.unary())
        return self.atom()

    def index(self) -> Fraction:
        tok = self.peek()
        if tok.kind != "index":
            raise FormulaSyntaxError("expected index like [1/2]", tok.line, tok.col)
        self.take()
        num = int(tok.match.group("num"))
        den = int(tok.match.group("den") or 1)
        if den == 0:
            raise FormulaSyntaxError("zero denominator in index", tok.line, tok.col)
        r = Fraction(num, den)
        if r > 1:
            raise FormulaSyntaxError(f"index {r} out of range [0, 1]", tok.line, tok.col)
        return r

    def atom(self):
        tok = self.take()
        if tok.kind == "letter":
            lid = int(tok.match.group("lid"))
            if lid < 1:
                raise FormulaSyntaxError("letter ids start at p1", tok.line, tok.col)
            return Letter(lid)
        if tok.kind == "const":
            return TOP if tok.text in ("true", "⊤") else BOT
        if tok.kind == "lpar":
            f = self.iff()
            self.take("rpar")
            return f
        got = repr(tok.text) if tok.text else "end of input"
        raise FormulaSyntaxError(f"unexpected {got}", tok.line, tok.col)


def parse(text: str) -> Formula:
    return _Parser(text).parse()


# --------------------------------------------------------------- printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_UNARY_PREC = 5


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), _UNARY_PREC + 1 if not isinstance(f, (Neg,) + _MODAL) else _UNARY_PREC)


def _agent_suffix(agent: int) -> str:
    return "" if agent == 1 else f"_{agent}"


def _render(f: Formula, min_prec: int) -> str:
    if isinstance(f, Letter):
        s = f"p{f.id}"
    elif isinstance(f, Top):
        s = "true"
    elif isinstance(f, Bot):
        s = "false"
    elif isinstance(f, Neg):
        s = "~" + _render(f.sub, _UNARY_PREC)
    elif isinstance(f, (L, M)):
        op = "L" if isinstance(f, L) else "M"
        s = f"{op}{_agent_suffix(f.agent)}[{f.r}] " + _render(f.sub, _UNARY_PREC)
    elif isinstance(f, K):
        s = f"K{_agent_suffix(f.agent)} " + _render(f.sub, _UNARY_PREC)
    else:
        prec = _PREC[type(f)]
        sym = {Iff: "<->", Implies: "->", Or: "|", And: "&"}[type(f)]
        if isinstance(f, (Iff, Implies)):
            left, right = _render(f.left, prec + 1), _render(f.right, prec)
        else:
            left, right = _render(f.left, prec), _render(f.right, prec + 1)
        s = f"{left} {sym} {right}"
    if _prec(f) < min_prec:
        return f"({s})"
    return s


def render(f: Formula) -> str:
    return _render(f, 0)


# ------------------------------------------------------ random generation

def random_formula(
    rng: random.Random,
    letter_ids=(1,),
    q: int = 2,
    max_depth: int = 1,
    size: int = 6,
    agent_ids=(1,),
    use_m: bool = True,
) -> Formula:
    """Random formula with roughly ``size`` connectives, indices on the 1/q grid."""

    def gen(budget: int, d: int) -> Formula:
        if budget <= 0:
            return Letter(rng.choice(letter_ids))
        roll = rng.random()
        if d > 0 and roll < 0.35:
            r = Fraction(rng.randint(0, q), q)
            op = M if use_m and rng.random() < 0.3 else L
            return op(rng.choice(agent_ids), r, gen(budget - 1, d - 1))
        if roll < 0.5:
            return Neg(gen(budget - 1, d))
        kind = rng.choice((And, And, Or, Or, Implies, Iff))
        split = rng.randint(0, budget - 1)
        return kind(gen(split, d), gen(budget - 1 - split, d))

    return gen(size, max_depth)
