"""Exact linear feasibility and optimization over the rationals.

A small two-phase simplex with Bland's anti-cycling rule, operating on
``fractions.Fraction`` tableaux.  Systems here have a handful of variables
(measures over truth assignments), so clarity wins over speed.

Strict inequalities share one slack variable ``eps``: each ``a.x < b``
becomes ``a.x + eps <= b``; the system is strictly feasible iff the largest
attainable ``eps`` (capped at 1) is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InfeasibleSystem, UnboundedObjective

RELATIONS = ("<=", "=", "<", ">=", ">")
_ZERO = Fraction(0)
_ONE = Fraction(1)


def _coeff_map(coeffs) -> dict[int, Fraction]:
    if isinstance(coeffs, Mapping):
        items = coeffs.items()
    else:
        items = enumerate(coeffs)
    return {int(j): Fraction(c) for j, c in items if c != 0}


@dataclass(frozen=True)
class Constraint:
    """``sum coeffs[j] * x[j]  rel  bound``; ``coeffs`` may be dense or sparse."""

    coeffs: Mapping[int, Fraction]
    rel: str
    bound: Fraction

    def __init__(self, coeffs, rel, bound):
        if rel == "==":
            rel = "="
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        object.__setattr__(self, "coeffs", _coeff_map(coeffs))
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "bound", Fraction(bound))

    @property
    def strict(self) -> bool:
        return self.rel in ("<", ">")

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * x[j] for j, c in self.coeffs.items()), _ZERO)

    def holds(self, x: Sequence[Fraction]) -> bool:
        v, b = self.value(x), self.bound
        return {
            "<=": v <= b,
            "=": v == b,
            "<": v < b,
            ">=": v >= b,
            ">": v > b,
        }[self.rel]


@dataclass
class LinearSystem:
    """Variables ``x[0..n-1]``, non-negative unless listed in ``free``."""

    n: int
    constraints: list[Constraint] = field(default_factory=list)
    objective: Mapping[int, Fraction] | None = None
    free: frozenset[int] = frozenset()

    def add(self, coeffs, rel, bound) -> "LinearSystem":
        self.constraints.append(Constraint(coeffs, rel, bound))
        return self

    @property
    def has_strict(self) -> bool:
        return any(c.strict for c in self.constraints)

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.n:
            return False
        if any(x[j] < 0 for j in range(self.n) if j not in self.free):
            return False
        return all(c.holds(x) for c in self.constraints)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    witness: tuple[Fraction, ...] | None = None
    slack: Fraction | None = None


class _Tableau:
    """Dense simplex tableau for ``A y = b, y >= 0`` with ``b >= 0``."""

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], ncols: int):
        self.ncols = ncols
        m = len(rows)
        # artificial columns ncols .. ncols+m-1
        self.rows = []
        for i, (row, b) in enumerate(zip(rows, rhs)):
            art = [_ZERO] * m
            art[i] = _ONE
            self.rows.append(list(row) + art + [b])
        self.basis = [ncols + i for i in range(m)]
        self.width = ncols + m

    def copy(self) -> "_Tableau":
        t = object.__new__(_Tableau)
        t.ncols, t.width = self.ncols, self.width
        t.rows = [list(r) for r in self.rows]
        t.basis = list(self.basis)
        return t

    def _pivot(self, r: int, c: int, obj: list[Fraction] | None):
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            row = [v * inv for v in row]
            self.rows[r] = row
        nz = [j for j, v in enumerate(row) if v]
        for i, other in enumerate(self.rows):
            if i != r:
                f = other[c]
                if f:
                    for j in nz:
                        other[j] -= f * row[j]
        if obj is not None:
            f = obj[c]
            if f:
                for j in nz:
                    obj[j] -= f * row[j]
        self.basis[r] = c

    def _run(self, obj: list[Fraction], allowed: int):
        """Minimize; ``obj`` holds reduced costs and ``-value`` in its last slot."""
        while True:
            entering = next((j for j in range(allowed) if obj[j] < 0), None)
            if entering is None:
                return
            best, best_row = None, None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[i] < self.basis[best_row])
                    ):
                        best, best_row = ratio, i
            if best_row is None:
                raise UnboundedObjective("objective is unbounded on the feasible region")
            self._pivot(best_row, entering, obj)

    def phase_one(self) -> bool:
        width = self.width
        obj = [_ZERO] * (width + 1)
        for row in self.rows:
            for j in range(self.ncols):
                obj[j] -= row[j]
            obj[-1] -= row[-1]
        self._run(obj, self.ncols)
        if obj[-1] != 0:
            return False
        # drive remaining artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(self.rows):
            if self.basis[i] >= self.ncols:
                row = self.rows[i]
                c = next((j for j in range(self.ncols) if row[j] != 0), None)
                if c is None:
                    del self.rows[i]
                    del self.basis[i]
                    continue
                self._pivot(i, c, None)
            i += 1
        return True

    def minimize(self, cost: Mapping[int, Fraction]) -> Fraction:
        obj = [_ZERO] * (self.width + 1)
        for j, c in cost.items():
            obj[j] += c
        for i, b in enumerate(self.basis):
            cb = cost.get(b, _ZERO)
            if cb:
                row = self.rows[i]
                for j in range(self.width + 1):
                    if row[j]:
                        obj[j] -= cb * row[j]
        self._run(obj, self.ncols)
        return -obj[-1]

    def solution(self) -> list[Fraction]:
        y = [_ZERO] * self.ncols
        for i, b in enumerate(self.basis):
            if b < self.ncols:
                y[b] = self.rows[i][-1]
        return y


class FeasibleRegion:
    """Phase one solved once; any number of objectives optimized afterwards.

    With ``strict="closure"`` strict constraints are relaxed to their
    non-strict versions.  With ``strict="slack"`` an extra variable ``eps``
    (index ``n`` in :meth:`optimize` objectives) enters every strict row and
    is bounded by 1.
    """

    def __init__(self, sys: LinearSystem, strict: str = "closure"):
        if strict not in ("closure", "slack"):
            raise ValueError("strict must be 'closure' or 'slack'")
        self.sys = sys
        n = sys.n
        use_eps = strict == "slack" and sys.has_strict
        # column layout: x_j (or x_j^+), x_j^- for free j, eps, row slacks
        col = {}
        nxt = 0
        for j in range(n):
            col[j] = nxt
            nxt += 1
        neg = {}
        for j in sorted(sys.free):
            neg[j] = nxt
            nxt += 1
        self._eps_col = None
        if use_eps:
            self._eps_col = nxt
            nxt += 1
        nslack = sum(1 for c in sys.constraints if c.rel != "=") + (1 if use_eps else 0)
        ncols = nxt + nslack
        rows, rhs = [], []
        s = nxt
        for c in sys.constraints:
            row = [_ZERO] * ncols
            for j, a in c.coeffs.items():
                if not 0 <= j < n:
                    raise ValueError(f"variable index {j} out of range")
                row[col[j]] += a
                if j in neg:
                    row[neg[j]] -= a
            sign = 1 if c.rel in ("<=", "<", "=") else -1
            if c.rel != "=":
                row[s] = Fraction(sign)
                s += 1
            if c.strict and use_eps:
                row[self._eps_col] = Fraction(sign)
            b = c.bound
            if b < 0:
                row = [-v for v in row]
                b = -b
            rows.append(row)
            rhs.append(b)
        if use_eps:
            row = [_ZERO] * ncols
            row[self._eps_col] = _ONE
            row[s] = _ONE
            rows.append(row)
            rhs.append(_ONE)
        self._col, self._neg = col, neg
        self._tab = _Tableau(rows, rhs, ncols)
        self.feasible = self._tab.phase_one()

    def _cost(self, objective: Mapping[int, Fraction], sign: int) -> dict[int, Fraction]:
        cost: dict[int, Fraction] = {}
        for j, a in _coeff_map(objective).items():
            if j == self.sys.n and self._eps_col is not None:
                cost[self._eps_col] = cost.get(self._eps_col, _ZERO) + sign * a
                continue
            if not 0 <= j < self.sys.n:
                raise ValueError(f"objective index {j} out of range")
            cost[self._col[j]] = cost.get(self._col[j], _ZERO) + sign * a
            if j in self._neg:
                cost[self._neg[j]] = cost.get(self._neg[j], _ZERO) - sign * a
        return cost

    def optimize(self, objective, direction: str = "max") -> tuple[Fraction, tuple[Fraction, ...], Fraction | None]:
        """Return ``(value, x, eps)`` at an optimal vertex."""
        if not self.feasible:
            raise InfeasibleSystem("linear system has no solution")
        if direction not in ("min", "max"):
            raise ValueError("direction must be 'min' or 'max'")
        sign = 1 if direction == "min" else -1
        tab = self._tab.copy()
        value = tab.minimize(self._cost(objective, sign)) * sign
        return (value,) + self._extract(tab)

    def _extract(self, tab: _Tableau):
        y = tab.solution()
        x = tuple(y[self._col[j]] - (y[self._neg[j]] if j in self._neg else 0) for j in range(self.sys.n))
        eps = y[self._eps_col] if self._eps_col is not None else None
        return x, eps

    def vertex(self) -> tuple[Fraction, ...]:
        if not self.feasible:
            raise InfeasibleSystem("linear system has no solution")
        return self._extract(self._tab)[0]


def lp_feasible(sys: LinearSystem) -> FeasibilityReport:
    """Decide (strict) feasibility exactly.

    Without strict constraints the witness is the vertex found by phase one.
    Otherwise ``eps`` is maximized and the witness is the optimal vertex at
    that margin, which keeps every strict constraint at distance ``eps``.
    """
    if not sys.has_strict:
        region = FeasibleRegion(sys)
        if not region.feasible:
            return FeasibilityReport(False)
        return FeasibilityReport(True, region.vertex(), None)
    region = FeasibleRegion(sys, strict="slack")
    if not region.feasible:
        return FeasibilityReport(False, None, None)
    eps, x, _ = region.optimize({sys.n: 1}, "max")
    if eps <= 0:
        return FeasibilityReport(False, None, eps)
    return FeasibilityReport(True, x, eps)


def lp_extremize(sys: LinearSystem, direction: str = "max", objective=None) -> Fraction:
    """Optimum of ``objective`` (default ``sys.objective``) over the closed region."""
    objective = sys.objective if objective is None else objective
    if objective is None:
        raise ValueError("no objective given")
    region = FeasibleRegion(sys)
    return region.optimize(objective, direction)[0]


def simplex_system(n: int) -> LinearSystem:
    """Probability vectors of length ``n``: ``x >= 0`` and ``sum x = 1``."""
    return LinearSystem(n, [Constraint([1] * n, "=", 1)])
