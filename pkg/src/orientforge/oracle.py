"""Exact solvers: orientation enumeration, Partial Orientation, MEDEP(3) and SAT."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Union

import numpy as np

from .graph import (
    EdgeState,
    MedepInstance,
    PartialOrientationInstance,
    PathPacking,
    PathTriple,
    PortedInstance,
)

DEFAULT_BUDGET = 10**8
DEFAULT_CAP = 16

FWD, BWD, UND = EdgeState.FORWARD, EdgeState.BACKWARD, EdgeState.UNDIRECTED
IN, OUT, THETA = 0, 1, 2


class BudgetExceeded(RuntimeError):
    """Search gave up after the configured node count or time limit."""

    def __init__(self, nodes: int, message: str = ""):
        super().__init__(message or f"search budget exhausted after {nodes} nodes")
        self.nodes = nodes


class TooManyVariables(ValueError):
    pass


class PortConstraint(enum.Enum):
    MUST_BE_TOWARD = "toward"
    MUST_BE_AWAY = "away"
    MUST_BE_UNDIRECTED = "undirected"
    FREE_DIRECTED_ONLY = "directed"
    FREE = "free"

    def allowed(self) -> tuple[EdgeState, ...]:
        return _ALLOWED[self]


_ALLOWED = {
    PortConstraint.MUST_BE_AWAY: (FWD,),
    PortConstraint.MUST_BE_TOWARD: (BWD,),
    PortConstraint.MUST_BE_UNDIRECTED: (UND,),
    PortConstraint.FREE_DIRECTED_ONLY: (FWD, BWD),
    PortConstraint.FREE: (FWD, BWD, UND),
}


class Witness(NamedTuple):
    """Port states (FORWARD = away from the subgraph) and edge states."""

    ports: tuple[EdgeState, ...]
    edges: tuple[EdgeState, ...]

    def key(self) -> tuple[int, ...]:
        return tuple(self.ports) + tuple(self.edges)

    def edge_orientation(self) -> dict[int, EdgeState]:
        return dict(enumerate(self.edges))


@dataclass
class EnumerationResult:
    count: int
    witnesses: list[Witness] = field(default_factory=list)
    capped: bool = False
    nodes: int = 0


class Status(enum.Enum):
    SOLVABLE = "solvable"
    UNSOLVABLE = "unsolvable"
    BUDGET_EXCEEDED = "budget-exceeded"


@dataclass
class SolveResult:
    status: Status
    witness: object = None
    nodes: int = 0

    @property
    def solvable(self) -> bool:
        return self.status is Status.SOLVABLE


class _Budget:
    def __init__(self, nodes: int, seconds: Optional[float]):
        self.limit = nodes
        self.deadline = None if seconds is None else time.monotonic() + seconds
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(self.used)
        if self.deadline is not None and (self.used & 1023) == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded(self.used, f"time limit reached after {self.used} nodes")


def _as_ported(sub: Union[PortedInstance, PartialOrientationInstance]) -> PortedInstance:
    if isinstance(sub, PartialOrientationInstance):
        return PortedInstance(sub, ())
    return sub


def enumerate_orientations(
    sub: Union[PortedInstance, PartialOrientationInstance],
    constraints: Optional[Mapping[int, PortConstraint]] = None,
    cap: int = DEFAULT_CAP,
    budget: int = DEFAULT_BUDGET,
) -> EnumerationResult:
    """Count the assignments to edges and ports that satisfy every degree spec.

    Ports are assigned first (by port id), then edges (by edge id), each in
    FORWARD < BACKWARD < UNDIRECTED order, so witnesses come out sorted.  The
    only pruning is that no prescribed count may go negative; since the counts
    sum to the degree, a full assignment that never overdraws is exact.  Stops
    at ``cap`` solutions with ``capped=True``.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    sub = _as_ported(sub)
    constraints = dict(constraints or {})
    g = sub.graph
    n = g.num_vertices
    need = [[s.rho, s.delta, s.theta] for s in sub.specs]
    left = sub.degrees()

    # (endpoint_a, endpoint_b or -1, allowed states)
    items: list[tuple[int, int, tuple[EdgeState, ...]]] = []
    for pid, port in enumerate(sub.ports):
        allowed = constraints.get(pid, PortConstraint.FREE).allowed()
        items.append((port.vertex, -1, allowed))
    for a, b in g.edges:
        items.append((a, b, (FWD, BWD, UND)))
    num_ports = len(sub.ports)

    if any(need[v][0] + need[v][1] + need[v][2] != left[v] for v in range(n)):
        return EnumerationResult(0)

    budget_ = _Budget(budget, None)
    found: list[Witness] = []
    states: list[EdgeState] = [UND] * len(items)

    # category consumed at (a, b) for each state; ports consume at a only
    cat_a = {FWD: OUT, BWD: IN, UND: THETA}
    cat_b = {FWD: IN, BWD: OUT, UND: THETA}

    def feasible(v: int) -> bool:
        r, d, t = need[v]
        return r >= 0 and d >= 0 and t >= 0

    def rec(i: int) -> bool:
        if i == len(items):
            found.append(Witness(tuple(states[:num_ports]), tuple(states[num_ports:])))
            return len(found) >= cap
        budget_.tick()
        a, b, allowed = items[i]
        for st in allowed:
            ca = cat_a[st]
            need[a][ca] -= 1
            if b >= 0:
                cb = cat_b[st]
                need[b][cb] -= 1
            stop = False
            if feasible(a) and (b < 0 or feasible(b)):
                states[i] = st
                stop = rec(i + 1)
            need[a][ca] += 1
            if b >= 0:
                need[b][cb] += 1
            if stop:
                return True
        return False

    capped = rec(0)
    return EnumerationResult(len(found), found, capped, budget_.used)


class _POSearch:
    """Backtracking with domain propagation for Partial Orientation."""

    def __init__(self, instance: PartialOrientationInstance, budget: _Budget):
        g = instance.graph
        self.edges = g.edges
        self.inc = g.incident()
        self.need = [[s.rho, s.delta, s.theta] for s in instance.specs]
        self.free = [len(x) for x in self.inc]
        self.state: list[Optional[EdgeState]] = [None] * g.num_edges
        self.trail: list[int] = []
        self.budget = budget

    def allowed(self, e: int) -> list[EdgeState]:
        a, b = self.edges[e]
        na, nb = self.need[a], self.need[b]
        out = []
        if na[OUT] > 0 and nb[IN] > 0:
            out.append(FWD)
        if na[IN] > 0 and nb[OUT] > 0:
            out.append(BWD)
        if na[THETA] > 0 and nb[THETA] > 0:
            out.append(UND)
        return out

    def assign(self, e: int, st: EdgeState) -> bool:
        a, b = self.edges[e]
        ca, cb = (OUT, IN) if st is FWD else (IN, OUT) if st is BWD else (THETA, THETA)
        self.state[e] = st
        self.trail.append(e)
        self.need[a][ca] -= 1
        self.need[b][cb] -= 1
        self.free[a] -= 1
        self.free[b] -= 1
        return self.need[a][ca] >= 0 and self.need[b][cb] >= 0

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            e = self.trail.pop()
            st = self.state[e]
            a, b = self.edges[e]
            ca, cb = (OUT, IN) if st is FWD else (IN, OUT) if st is BWD else (THETA, THETA)
            self.need[a][ca] += 1
            self.need[b][cb] += 1
            self.free[a] += 1
            self.free[b] += 1
            self.state[e] = None

    def propagate(self, queue: list[int]) -> bool:
        pending = list(queue)
        while pending:
            v = pending.pop()
            need = self.need[v]
            if need[0] + need[1] + need[2] != self.free[v]:
                return False
            if self.free[v] == 0:
                continue
            support = [[], [], []]
            forced: list[tuple[int, EdgeState]] = []
            for e in self.inc[v]:
                if self.state[e] is not None:
                    continue
                dom = self.allowed(e)
                if not dom:
                    return False
                a = self.edges[e][0]
                for st in dom:
                    if st is UND:
                        support[THETA].append(e)
                    elif (st is FWD) == (a == v):
                        support[OUT].append((e, st))
                    else:
                        support[IN].append((e, st))
                if len(dom) == 1:
                    forced.append((e, dom[0]))
            for c in (IN, OUT, THETA):
                if len(support[c]) < need[c]:
                    return False
                if need[c] and len(support[c]) == need[c]:
                    if c == THETA:
                        forced.extend((e, UND) for e in support[c])
                    else:
                        forced.extend(support[c])
            for e, st in forced:
                cur = self.state[e]
                if cur is not None:
                    if cur is not st:
                        return False
                    continue
                if st not in self.allowed(e):
                    return False
                if not self.assign(e, st):
                    return False
                pending.extend(self.edges[e])
        return True

    def pick_edge(self) -> Optional[int]:
        best_v, best_free = -1, None
        for v, f in enumerate(self.free):
            if f and (best_free is None or f < best_free):
                best_v, best_free = v, f
        if best_v < 0:
            return None
        return min(e for e in self.inc[best_v] if self.state[e] is None)

    def search(self) -> bool:
        e = self.pick_edge()
        if e is None:
            return True
        self.budget.tick()
        for st in self.allowed(e):
            mark = len(self.trail)
            if self.assign(e, st) and self.propagate(list(self.edges[e])) and self.search():
                return True
            self.undo_to(mark)
        return False


def solve_po(
    instance: PartialOrientationInstance,
    budget: int = DEFAULT_BUDGET,
    time_limit: Optional[float] = None,
) -> SolveResult:
    """Decide a Partial Orientation instance exactly.

    Branches on the lowest-id free edge of the vertex with the fewest free
    edges, trying FORWARD, BACKWARD, UNDIRECTED in that order.  The witness is
    a dict EdgeId -> EdgeState.
    """
    if instance.sum_mismatches():
        return SolveResult(Status.UNSOLVABLE)
    b = _Budget(budget, time_limit)
    search = _POSearch(instance, b)
    try:
        ok = search.propagate(list(range(instance.graph.num_vertices))) and search.search()
    except BudgetExceeded:
        return SolveResult(Status.BUDGET_EXCEEDED, nodes=b.used)
    if not ok:
        return SolveResult(Status.UNSOLVABLE, nodes=b.used)
    return SolveResult(Status.SOLVABLE, dict(enumerate(search.state)), nodes=b.used)


def candidate_triples(instance: MedepInstance) -> list[PathTriple]:
    """Every simple length-3 s-t path, as edge-id triples in ascending order."""
    g = instance.graph
    s, t = instance.s, instance.t
    inc = g.incident()
    out = []
    for e1 in inc[s]:
        u = g.other_end(e1, s)
        if u == t:
            continue
        for e2 in inc[u]:
            v = g.other_end(e2, u)
            if v in (s, t, u):
                continue
            for e3 in inc[v]:
                if g.other_end(e3, v) == t:
                    out.append(PathTriple(e1, e2, e3, u, v))
    out.sort()
    return out


def solve_medep(
    instance: MedepInstance,
    budget: int = DEFAULT_BUDGET,
    time_limit: Optional[float] = None,
) -> SolveResult:
    """Decide whether k edge-disjoint length-3 s-t paths exist.

    Branches on the terminal edge (at s or t) with the fewest live candidate
    paths: either one of its paths is taken, or the edge is left unused when
    enough other terminal edges remain.
    """
    triples = candidate_triples(instance)
    k = instance.k
    g = instance.graph
    s_edges = [e for e in range(g.num_edges) if instance.s in g.edges[e]]
    t_edges = [e for e in range(g.num_edges) if instance.t in g.edges[e]]
    by_edge: dict[int, list[int]] = {}
    for idx, p in enumerate(triples):
        for e in p.edge_ids:
            by_edge.setdefault(e, []).append(idx)

    used: set[int] = set()
    banned: set[int] = set()
    chosen: list[int] = []
    b = _Budget(budget, time_limit)

    def live(idx: int) -> bool:
        return all(e not in used and e not in banned for e in triples[idx].edge_ids)

    def rec() -> bool:
        if len(chosen) == k:
            return True
        b.tick()
        remaining = k - len(chosen)
        counts = {}
        for side in (s_edges, t_edges):
            n_live = 0
            for e in side:
                if e in used or e in banned:
                    continue
                c = sum(1 for idx in by_edge.get(e, ()) if live(idx))
                if c:
                    n_live += 1
                    counts[e] = c
            if n_live < remaining:
                return False
        if not counts:
            return False
        e = min(counts, key=lambda x: (counts[x], x))
        for idx in by_edge[e]:
            if not live(idx):
                continue
            chosen.append(idx)
            used.update(triples[idx].edge_ids)
            if rec():
                return True
            used.difference_update(triples[idx].edge_ids)
            chosen.pop()
        banned.add(e)
        ok = rec()
        banned.discard(e)
        return ok

    try:
        ok = rec()
    except BudgetExceeded:
        return SolveResult(Status.BUDGET_EXCEEDED, nodes=b.used)
    if not ok:
        return SolveResult(Status.UNSOLVABLE, nodes=b.used)
    packing = PathPacking(tuple(sorted(triples[i] for i in chosen)))
    return SolveResult(Status.SOLVABLE, packing, nodes=b.used)


def solve_sat_bruteforce(formula, max_vars: int = 24) -> SolveResult:
    """Scan the truth table in ascending binary order.

    Variable 1 is the most significant bit, so the first candidate is all
    false and the last variable flips fastest.  The witness is a dict
    variable -> bool.
    """
    n = formula.num_vars
    if n > max_vars:
        raise TooManyVariables(f"{n} variables exceeds the brute-force limit of {max_vars}")
    if not formula.clauses:
        return SolveResult(Status.SOLVABLE, {v: False for v in range(1, n + 1)})
    chunk = 1 << min(n, 20)
    total = 1 << n
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        sat = np.ones(idx.shape, dtype=bool)
        for clause in formula.clauses:
            cl = np.zeros(idx.shape, dtype=bool)
            for lit in clause:
                bit = (idx >> (n - abs(lit))) & 1
                cl |= (bit == 1) if lit > 0 else (bit == 0)
            sat &= cl
        hits = np.flatnonzero(sat)
        if hits.size:
            code = int(idx[hits[0]])
            return SolveResult(Status.SOLVABLE, {v: bool((code >> (n - v)) & 1) for v in range(1, n + 1)})
    return SolveResult(Status.UNSOLVABLE)
