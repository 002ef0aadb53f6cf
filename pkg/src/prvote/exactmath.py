"""Exact rational numerics: linear programs and max-flow/min-cut.

Everything here computes with arbitrary-precision rationals; there is no
floating-point path.  ``gmpy2.mpq`` is used when available (noticeably
faster), with ``fractions.Fraction`` as the fallback; set ``PRVOTE_NO_GMPY2``
to force the fallback.

The two solvers are a textbook two-phase simplex using Bland's pivoting rule
(termination over exact arithmetic matters more than speed at the problem
sizes that arise here) and Dinic's max-flow algorithm, which powers
:func:`min_coverage_minus_modular` through the standard project-selection
construction.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

__all__ = [
    "rat",
    "parse_rational",
    "format_rational",
    "LinearProgram",
    "LPResult",
    "lp_maximize",
    "FlowNetwork",
    "min_coverage_minus_modular",
]

if os.environ.get("PRVOTE_NO_GMPY2"):
    _mpq = None
else:
    try:
        from gmpy2 import mpq as _mpq
    except ImportError:  # pragma: no cover - gmpy2 is normally installed
        _mpq = None

rat = _mpq if _mpq is not None else Fraction
"""Rational constructor: ``rat(num, den=1)``; values are always reduced."""

_ZERO = rat(0)
_ONE = rat(1)


def parse_rational(text) -> "rat":
    """Parse ``"3/4"`` or ``"5"`` (or an int) into an exact rational."""
    if isinstance(text, int):
        return rat(text)
    text = str(text).strip()
    num, _, den = text.partition("/")
    if den:
        return rat(int(num), int(den))
    return rat(int(num))


def format_rational(value) -> str:
    """Render a rational as ``"num/den"`` (or ``"num"`` for integers)."""
    value = rat(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------------------
# linear programming


@dataclass
class LinearProgram:
    """A linear program over non-negative variables.

    ``objective`` holds one coefficient per variable.  Each constraint is a
    triple ``(coeffs, sense, rhs)`` with ``sense`` one of ``"<="``, ``"="``,
    ``">="``.  Upper bounds on variables are expressed as constraints.
    """

    num_vars: int
    objective: list
    constraints: list = field(default_factory=list)

    def add(self, coeffs: Mapping[int, object] | Sequence, sense: str, rhs):
        if isinstance(coeffs, Mapping):
            dense = [_ZERO] * self.num_vars
            for var, coeff in coeffs.items():
                dense[var] = rat(coeff)
        else:
            dense = [rat(c) for c in coeffs]
            if len(dense) != self.num_vars:
                raise ValueError("constraint arity does not match variable count")
        if sense not in ("<=", "=", ">="):
            raise ValueError(f"unknown constraint sense {sense!r}")
        self.constraints.append((dense, sense, rat(rhs)))


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: object | None
    assignment: tuple | None


def _pivot(tableau, basis, row, col):
    pivot_val = tableau[row][col]
    tableau[row] = [x / pivot_val for x in tableau[row]]
    prow = tableau[row]
    for r, line in enumerate(tableau):
        if r != row and line[col] != 0:
            factor = line[col]
            tableau[r] = [
                x - factor * y if y != 0 else x for x, y in zip(line, prow)
            ]
    basis[row] = col


def _simplex(tableau, basis, num_cols):
    """Maximize over the tableau in place.

    Pivots greedily on the most positive reduced cost, falling back to
    Bland's least-index rule after a fixed number of iterations so that
    termination stays guaranteed over exact arithmetic (Bland never cycles
    from any starting tableau).  Returns "optimal" or "unbounded".
    """
    greedy_budget = 5 * (len(tableau) + num_cols)
    iteration = 0
    while True:
        z_row = tableau[-1]
        if iteration < greedy_budget:
            col = None
            best = _ZERO
            for j in range(num_cols):
                if z_row[j] > best:
                    best = z_row[j]
                    col = j
        else:
            col = next((j for j in range(num_cols) if z_row[j] > 0), None)
        if col is None:
            return "optimal"
        iteration += 1
        best_row = None
        best_ratio = None
        for r in range(len(tableau) - 1):
            coeff = tableau[r][col]
            if coeff > 0:
                ratio = tableau[r][-1] / coeff
                if (
                    best_row is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[best_row])
                ):
                    best_row, best_ratio = r, ratio
        if best_row is None:
            return "unbounded"
        _pivot(tableau, basis, best_row, col)


def lp_maximize(lp: LinearProgram) -> LPResult:
    """Exact optimum of ``lp`` (maximization) over the rationals.

    The returned assignment satisfies every constraint exactly; callers can
    (and in tests do) replay the constraints against it.
    """
    if len(lp.objective) != lp.num_vars:
        raise ValueError("objective arity does not match variable count")
    rows = []
    senses = []
    for coeffs, sense, rhs in lp.constraints:
        if len(coeffs) != lp.num_vars:
            raise ValueError("constraint arity does not match variable count")
        coeffs = [rat(c) for c in coeffs]
        rhs = rat(rhs)
        if rhs < 0:  # normalize to non-negative right-hand sides
            coeffs = [-c for c in coeffs]
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        rows.append((coeffs, rhs))
        senses.append(sense)

    n = lp.num_vars
    num_slack = sum(1 for s in senses if s in ("<=", ">="))
    num_art = sum(1 for s in senses if s in ("=", ">="))
    num_cols = n + num_slack + num_art
    tableau = []
    basis = []
    art_cols = []
    slack_at = n
    art_at = n + num_slack
    for (coeffs, rhs), sense in zip(rows, senses):
        line = list(coeffs) + [_ZERO] * (num_slack + num_art) + [rhs]
        if sense == "<=":
            line[slack_at] = _ONE
            basis.append(slack_at)
            slack_at += 1
        elif sense == ">=":
            line[slack_at] = -_ONE
            slack_at += 1
            line[art_at] = _ONE
            basis.append(art_at)
            art_cols.append(art_at)
            art_at += 1
        else:
            line[art_at] = _ONE
            basis.append(art_at)
            art_cols.append(art_at)
            art_at += 1
        tableau.append(line)

    if art_cols:
        # phase 1: maximize -sum(artificials)
        z = [_ZERO] * (num_cols + 1)
        for col in art_cols:
            z[col] = -_ONE
        tableau.append(z)
        for r, b in enumerate(basis):
            if b in art_cols:
                tableau[-1] = [
                    x + y for x, y in zip(tableau[-1], tableau[r])
                ]
        _simplex(tableau, basis, num_cols)
        if tableau[-1][-1] != 0:
            return LPResult("infeasible", None, None)
        tableau.pop()
        # drive leftover artificials out of the basis
        art_set = set(art_cols)
        for r in range(len(tableau)):
            if basis[r] in art_set:
                col = next(
                    (
                        j
                        for j in range(num_cols)
                        if j not in art_set and tableau[r][j] != 0
                    ),
                    None,
                )
                if col is not None:
                    _pivot(tableau, basis, r, col)
        keep = [r for r in range(len(tableau)) if basis[r] not in art_set]
        tableau = [tableau[r] for r in keep]
        basis = [basis[r] for r in keep]
        for line in tableau:
            for col in art_cols:
                line[col] = _ZERO

    # phase 2: reduced-cost row starts at the raw objective coefficients,
    # then basic columns are zeroed out by row operations
    z = [rat(c) for c in lp.objective] + [_ZERO] * (num_slack + num_art + 1)
    tableau.append(z)
    for r, b in enumerate(basis):
        if tableau[-1][b] != 0:
            factor = tableau[-1][b]
            tableau[-1] = [
                x - factor * y for x, y in zip(tableau[-1], tableau[r])
            ]
    status = _simplex(tableau, basis, num_cols)
    if status == "unbounded":
        return LPResult("unbounded", None, None)
    assignment = [_ZERO] * lp.num_vars
    for r, b in enumerate(basis[: len(tableau) - 1]):
        if b < lp.num_vars:
            assignment[b] = tableau[r][-1]
    objective = sum(
        (rat(c) * x for c, x in zip(lp.objective, assignment)), _ZERO
    )
    return LPResult("optimal", objective, tuple(assignment))


# ---------------------------------------------------------------------------
# max-flow / min-cut with rational capacities


class FlowNetwork:
    """Directed flow network with exact rational capacities (Dinic)."""

    class _Edge:
        __slots__ = ("dst", "cap", "rev")

        def __init__(self, dst, cap, rev):
            self.dst = dst
            self.cap = cap
            self.rev = rev

    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self.adj = [[] for _ in range(num_nodes)]

    def add_edge(self, src: int, dst: int, cap):
        cap = rat(cap)
        if cap < 0:
            raise ValueError("capacities must be non-negative")
        self.adj[src].append(self._Edge(dst, cap, len(self.adj[dst])))
        self.adj[dst].append(self._Edge(src, _ZERO, len(self.adj[src]) - 1))

    def _bfs(self, s, t, level):
        for i in range(self.num_nodes):
            level[i] = -1
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                if e.cap > 0 and level[e.dst] < 0:
                    level[e.dst] = level[u] + 1
                    queue.append(e.dst)
        return level[t] >= 0

    def _dfs(self, u, t, pushed, level, it):
        if u == t:
            return pushed
        while it[u] < len(self.adj[u]):
            e = self.adj[u][it[u]]
            if e.cap > 0 and level[e.dst] == level[u] + 1:
                limit = pushed if (pushed is not None and pushed < e.cap) else e.cap
                flow = self._dfs(e.dst, t, limit, level, it)
                if flow > 0:
                    e.cap -= flow
                    self.adj[e.dst][e.rev].cap += flow
                    return flow
            it[u] += 1
        return _ZERO

    def max_flow(self, s: int, t: int):
        """Exact maximum-flow value from ``s`` to ``t``."""
        flow = _ZERO
        level = [-1] * self.num_nodes
        while self._bfs(s, t, level):
            it = [0] * self.num_nodes
            while True:
                pushed = self._dfs(s, t, None, level, it)
                if pushed == 0:
                    break
                flow += pushed
        return flow

    def min_cut_source_side(self, s: int) -> set:
        """Nodes reachable from ``s`` in the residual graph (run after
        :meth:`max_flow`); by max-flow/min-cut duality this is a minimum cut."""
        seen = [False] * self.num_nodes
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                if e.cap > 0 and not seen[e.dst]:
                    seen[e.dst] = True
                    queue.append(e.dst)
        return {i for i in range(self.num_nodes) if seen[i]}


def min_coverage_minus_modular(
    items_by_member: Mapping, weights: Mapping, alpha
) -> tuple:
    """Minimize ``f(S) = weight(union of items of S) - alpha * |S|`` exactly.

    ``items_by_member`` maps each ground-set member to the items it covers;
    ``weights`` assigns each item a non-negative rational weight.  Returns
    ``(min_value, argmin_set)`` with the empty set allowed (``f({}) = 0``).

    Uses the project-selection encoding: a source arc of capacity ``alpha``
    per member, an item-to-sink arc of capacity ``weight(item)``, and
    uncuttable member-to-item arcs; the minimizer is the source side of a
    minimum cut.
    """
    alpha = rat(alpha)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    members = list(items_by_member)
    items = sorted({it for its in items_by_member.values() for it in its})
    weight = {it: rat(weights[it]) for it in items}
    if any(w < 0 for w in weight.values()):
        raise ValueError("item weights must be non-negative")

    num_nodes = 2 + len(members) + len(items)
    source, sink = 0, num_nodes - 1
    member_node = {mem: 1 + idx for idx, mem in enumerate(members)}
    item_node = {it: 1 + len(members) + idx for idx, it in enumerate(items)}
    infinite = alpha * len(members) + sum(weight.values(), _ZERO) + 1

    net = FlowNetwork(num_nodes)
    for mem in members:
        net.add_edge(source, member_node[mem], alpha)
        for it in set(items_by_member[mem]):
            net.add_edge(member_node[mem], item_node[it], infinite)
    for it in items:
        net.add_edge(item_node[it], sink, weight[it])

    flow = net.max_flow(source, sink)
    min_value = flow - alpha * len(members)
    cut = net.min_cut_source_side(source)
    argmin = frozenset(mem for mem in members if member_node[mem] in cut)
    return min_value, argmin
