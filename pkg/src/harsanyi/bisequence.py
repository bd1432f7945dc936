"""Finite-horizon bi-sequence space for two agents.

States are pairs of bit strings ``a = a_0..a_n`` and ``b = b_0..b_n`` with
``a_0 = b_0``, so there are ``2 * 4**n`` of them.  Agent 1 cannot tell
``w`` from ``w'`` when, for every ``k`` in ``1..n``, ``a_k = a'_k`` and
``a_k = 1`` forces ``b_{k-1} = b'_{k-1}``; agent 2 is the mirror image.
Note ``a_0`` itself is unconstrained: when ``a_1 = 0`` the shared first
digit is unknown to agent 1.  Each agent's type at ``w`` is the uniform
distribution on its class.

Events are numpy boolean arrays indexed by state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .models import FiniteTypeSpace
from .report import CheckReport

MAX_HORIZON = 10


@dataclass(frozen=True, eq=False)
class TruncatedBiSeqSpace:
    """State ``i`` encodes ``a_0`` in bit 0, ``a_1..a_n`` in the next n bits
    and ``b_1..b_n`` in the n bits after that."""

    n: int
    a: np.ndarray = field(repr=False)  # shape (N, n+1), uint8
    b: np.ndarray = field(repr=False)
    class_ids: dict = field(repr=False)  # agent -> int array of class labels
    class_sizes: dict = field(repr=False)  # agent -> int array, size of each label

    @property
    def size(self) -> int:
        return self.a.shape[0]

    @property
    def X(self) -> np.ndarray:
        """The event ``[a_0 = 1]``."""
        return self.a[:, 0] == 1

    def state_index(self, a: Sequence[int] | str, b: Sequence[int] | str) -> int:
        a = [int(c) for c in a]
        b = [int(c) for c in b]
        if len(a) != self.n + 1 or len(b) != self.n + 1:
            raise ValueError(f"need {self.n + 1} digits per sequence")
        if a[0] != b[0]:
            raise ValueError("a_0 and b_0 must agree")
        idx = a[0]
        for k in range(1, self.n + 1):
            idx |= a[k] << k
            idx |= b[k] << (self.n + k)
        return idx

    def decode(self, w: int) -> tuple[str, str]:
        return (
            "".join(str(int(x)) for x in self.a[w]),
            "".join(str(int(x)) for x in self.b[w]),
        )

    def coord(self, side: str, k: int, value: int = 1) -> np.ndarray:
        """The event ``[a_k = value]`` or ``[b_k = value]``."""
        arr = self.a if side == "a" else self.b
        return arr[:, k] == value


def _class_labels(own: np.ndarray, other: np.ndarray, n: int) -> np.ndarray:
    """Labels of the classes of the agent reading ``own`` and, where
    ``own_k = 1``, the other sequence's digit ``k - 1``."""
    N = own.shape[0]
    key = np.zeros(N, dtype=np.int64)
    for k in range(1, n + 1):
        key |= own[:, k].astype(np.int64) << (k - 1)
        kept = own[:, k] & other[:, k - 1]
        key |= kept.astype(np.int64) << (n + k - 1)
    _, labels = np.unique(key, return_inverse=True)
    return labels.reshape(-1)


def build_space(n: int) -> TruncatedBiSeqSpace:
    if not 1 <= n <= MAX_HORIZON:
        raise ValueError(f"horizon must be between 1 and {MAX_HORIZON}")
    N = 2 * 4**n
    idx = np.arange(N, dtype=np.int64)
    a = np.zeros((N, n + 1), dtype=np.uint8)
    b = np.zeros((N, n + 1), dtype=np.uint8)
    a[:, 0] = b[:, 0] = idx & 1
    for k in range(1, n + 1):
        a[:, k] = (idx >> k) & 1
        b[:, k] = (idx >> (n + k)) & 1
    class_ids = {1: _class_labels(a, b, n), 2: _class_labels(b, a, n)}
    class_sizes = {i: np.bincount(lab) for i, lab in class_ids.items()}
    return TruncatedBiSeqSpace(n, a, b, class_ids, class_sizes)


def _as_event(space: TruncatedBiSeqSpace, E) -> np.ndarray:
    if isinstance(E, np.ndarray) and E.dtype == bool:
        if E.shape != (space.size,):
            raise ValueError("event has the wrong length")
        return E
    out = np.zeros(space.size, dtype=bool)
    out[list(E)] = True
    return out


def class_of(space: TruncatedBiSeqSpace, agent: int, w: int) -> frozenset[int]:
    lab = space.class_ids[agent]
    return frozenset(np.flatnonzero(lab == lab[w]).tolist())


def kernel_prob(space: TruncatedBiSeqSpace, agent: int, w: int, E) -> Fraction:
    """Uniform probability of ``E`` on agent's class of ``w``."""
    E = _as_event(space, E)
    lab = space.class_ids[agent]
    cls = lab == lab[w]
    return Fraction(int(np.count_nonzero(E & cls)), int(np.count_nonzero(cls)))


def _class_counts(space: TruncatedBiSeqSpace, agent: int, E: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lab = space.class_ids[agent]
    sizes = space.class_sizes[agent]
    hits = np.bincount(lab, weights=E.astype(np.int64), minlength=len(sizes)).astype(np.int64)
    return hits, sizes


def belief_event(space: TruncatedBiSeqSpace, agent: int, r, E) -> np.ndarray:
    r = Fraction(r)
    E = _as_event(space, E)
    hits, sizes = _class_counts(space, agent, E)
    # hits / size >= r  <=>  hits * den >= num * size, exactly in integers
    good = hits * r.denominator >= r.numerator * sizes
    return good[space.class_ids[agent]]


def j_event(space: TruncatedBiSeqSpace, agent: int, r, E) -> np.ndarray:
    """States where the agent believes ``E`` or its complement to degree ``r``."""
    E = _as_event(space, E)
    return belief_event(space, agent, r, E) | belief_event(space, agent, r, ~E)


def _chain(space: TruncatedBiSeqSpace, first_agent: int, length: int, r) -> list[np.ndarray]:
    """``[X, J_f X, J_g J_f X, ...]`` with agents alternating from ``first_agent``."""
    events = [space.X]
    agent = first_agent
    for _ in range(length):
        events.append(j_event(space, agent, r, events[-1]))
        agent = 3 - agent
    return events


def verify_coordinate_lemma(space: TruncatedBiSeqSpace, r) -> CheckReport:
    """Check ``[a_k = 1]`` (resp. ``[b_k = 1]``) equals ``k`` alternating
    ``J`` operators applied to ``X``, with agent 1 (resp. 2) outermost."""
    r = Fraction(r)
    rep = CheckReport(f"coordinate lemma, horizon {space.n}, r = {r}")
    if r <= Fraction(1, 2):
        rep.notes.append("r <= 1/2: the lemma's hypothesis r > 1/2 fails")
    # A_k = J_1 B_{k-1}, B_k = J_2 A_{k-1}, A_0 = B_0 = X
    A, B = space.X, space.X
    for k in range(1, space.n + 1):
        A, B = j_event(space, 1, r, B), j_event(space, 2, r, A)
        for side, got in (("a", A), ("b", B)):
            want = space.coord(side, k)
            diff = np.flatnonzero(got != want)
            rep.record(f"{side}_coordinates", diff.size == 0, (k, int(diff[0]) if diff.size else None))
    return rep


def jlist_event(space: TruncatedBiSeqSpace, signs: Sequence[bool | int | str], r) -> np.ndarray:
    """Intersection of a signed list ``(+-X, +-J_1 X, +-J_2 J_1 X, ...)``.

    ``signs[k]`` is true (or ``+``/``1``) for the plain event and false
    (``-``/``0``) for its complement.
    """
    signs = [_sign(s) for s in signs]
    if not 1 <= len(signs) <= space.n + 1:
        raise ValueError(f"list length must be between 1 and {space.n + 1}")
    events = _chain(space, 1, len(signs) - 1, r)
    out = np.ones(space.size, dtype=bool)
    for s, E in zip(signs, events):
        out &= E if s else ~E
    return out


def _sign(s) -> bool:
    if isinstance(s, str):
        if s not in ("+", "-"):
            raise ValueError(f"bad sign {s!r}")
        return s == "+"
    return bool(s)


def count_consistent_jlists(space: TruncatedBiSeqSpace, m: int, r) -> int:
    """Number of the ``2**m`` sign patterns of length ``m`` with nonempty event."""
    if not 1 <= m <= space.n + 1:
        raise ValueError(f"list length must be between 1 and {space.n + 1}")
    events = _chain(space, 1, m - 1, r)
    # pack each state's membership pattern into an integer; a sign vector is
    # consistent iff some state realizes exactly that pattern
    pattern = np.zeros(space.size, dtype=np.int64)
    for k, E in enumerate(events):
        pattern |= E.astype(np.int64) << k
    return int(np.unique(pattern).size)


def export(space: TruncatedBiSeqSpace) -> FiniteTypeSpace:
    """The space as a generic two-agent type space with ``p1`` read as ``X``.

    States in a class share one row object.
    """
    kernels = {}
    for agent in (1, 2):
        lab = space.class_ids[agent]
        order = np.argsort(lab, kind="stable")
        bounds = np.flatnonzero(np.diff(lab[order])) + 1
        rows: list = [None] * space.size
        for members in np.split(order, bounds):
            members = sorted(members.tolist())
            p = Fraction(1, len(members))
            row = tuple((s, p) for s in members)
            for s in members:
                rows[s] = row
        kernels[agent] = tuple(rows)
    return FiniteTypeSpace(space.size, kernels, {1: frozenset(np.flatnonzero(space.X).tolist())})


def jlist_report(space: TruncatedBiSeqSpace, m: int, r) -> dict:
    r = Fraction(r)
    return {
        "horizon": space.n,
        "r": f"{r.numerator}/{r.denominator}",
        "lists": {"m": m, "consistent": count_consistent_jlists(space, m, r)},
    }
