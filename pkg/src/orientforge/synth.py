"""Bounded search for variable gadgets, deduplicated up to isomorphism.

Candidates are built from connected simple graphs, grown one vertex at a
time and kept only in canonical form.  Instead of guessing degree types
directly, each candidate fixes a TRUE orientation (a state per edge and a
direction per port) and reads the types off it; the gadget oracle then
decides whether that typed subgraph really has exactly the two intended
orientations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .gadgets import GadgetRejected, GadgetTemplate, build_template
from .graph import DegreeSpec, EdgeState, Multigraph, PartialOrientationInstance, Polarity, Port, PortedInstance
from .oracle import DEFAULT_BUDGET, BudgetExceeded, PortConstraint, enumerate_orientations

FWD, BWD, UND = EdgeState.FORWARD, EdgeState.BACKWARD, EdgeState.UNDIRECTED


def default_alphabet() -> tuple[DegreeSpec, ...]:
    return tuple(DegreeSpec(r, d, t) for r in (0, 1) for d in (0, 1) for t in range(5))


def tree_alphabet() -> tuple[DegreeSpec, ...]:
    """The four degree types a tree gadget vertex may take: ρδ, ρθ, δθ, ρδθ."""
    return (DegreeSpec(1, 1, 0), DegreeSpec(1, 0, 1), DegreeSpec(0, 1, 1), DegreeSpec(1, 1, 1))


# ---------------------------------------------------------------- canonical form


def _refine(n: int, adj: Sequence[Sequence[int]], colors: list) -> list[int]:
    """Colour refinement; returns a stable integer colour per vertex."""
    cur = list(colors)
    while True:
        sig = [(cur[v], tuple(sorted(cur[u] for u in adj[v]))) for v in range(n)]
        ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(set(new)) == len(set(cur)):
            return new
        cur = new


def canonical_code(n: int, edges: Iterable[tuple[int, int]], colors: Optional[Sequence] = None) -> tuple:
    """Minimal (colours, adjacency) code over refinement-compatible orderings.

    Individualises one vertex of the first non-singleton cell at a time, so
    the search is exact (not a hash); fine for the small graphs used here.
    """
    edges = list(edges)
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    base = list(colors) if colors is not None else [0] * n
    ranks = {c: i for i, c in enumerate(sorted(set(base)))}
    start = [ranks[c] for c in base]
    best: list = [None]

    def code_for(order: list[int]) -> tuple:
        pos = {v: i for i, v in enumerate(order)}
        bits = tuple(sorted(tuple(sorted((pos[a], pos[b]))) for a, b in edges))
        return (tuple(base[v] for v in order), bits)

    def search(cols: list[int]) -> None:
        cols = _refine(n, adj, cols)
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(cols):
            cells.setdefault(c, []).append(v)
        target = next((c for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            order = sorted(range(n), key=lambda v: cols[v])
            code = code_for(order)
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        for v in cells[target]:
            nxt = [2 * c for c in cols]
            nxt[v] -= 1
            search(nxt)

    search(start)
    return best[0]


# ---------------------------------------------------------------- graph generation


def connected_graphs(max_vertices: int, max_degree: int) -> Iterable[tuple[int, tuple[tuple[int, int], ...]]]:
    """Connected simple graphs up to isomorphism, by vertex count then code.

    Every connected graph has a vertex whose removal keeps it connected, so
    adding one vertex (joined to a non-empty subset) to each smaller graph
    reaches all of them; degree caps survive vertex deletion.
    """
    if max_vertices < 1:
        return
    level = {canonical_code(1, ()): (1, ())}
    for n in range(1, max_vertices + 1):
        for code in sorted(level):
            yield level[code]
        if n == max_vertices:
            return
        nxt: dict = {}
        for size, edges in level.values():
            deg = [0] * size
            for a, b in edges:
                deg[a] += 1
                deg[b] += 1
            open_vs = [v for v in range(size) if deg[v] < max_degree]
            for k in range(1, min(max_degree, len(open_vs)) + 1):
                for nbrs in itertools.combinations(open_vs, k):
                    new_edges = edges + tuple((v, size) for v in nbrs)
                    code = canonical_code(size + 1, new_edges)
                    if code not in nxt:
                        nxt[code] = (size + 1, tuple(code[1]))
        level = nxt


# ---------------------------------------------------------------- synthesis


@dataclass
class SynthResult:
    template: Optional[GadgetTemplate]
    status: str  # "found", "not-found", "budget-exceeded"
    candidates: int = 0

    @property
    def found(self) -> bool:
        return self.template is not None


def _port_layouts(deg: list[int], num_ports: int, max_total: int, per_vertex: int) -> Iterable[tuple[int, ...]]:
    n = len(deg)

    def rec(v: int, left: int, acc: list[int]):
        if v == n:
            if left == 0:
                yield tuple(acc)
            return
        for c in range(min(left, max_total - deg[v], per_vertex), -1, -1):
            acc.append(c)
            yield from rec(v + 1, left - c, acc)
            acc.pop()

    yield from rec(0, num_ports, [])


def _true_orientations(n, edges, port_counts, t_ports, allowed: set[tuple[int, int, int]]):
    """Yield (specs, t_per_vertex) for every TRUE orientation whose types lie in ``allowed``."""
    max_r = max(s[0] for s in allowed)
    max_d = max(s[1] for s in allowed)
    counts = [[0, 0, 0] for _ in range(n)]

    def ok(v):
        return counts[v][0] <= max_r and counts[v][1] <= max_d

    def ports(v: int, t_left: int, acc: list[int]):
        if v == n:
            if t_left == 0:
                specs = tuple(tuple(c) for c in counts)
                if all(s in allowed for s in specs):
                    yield specs, tuple(acc)
            return
        c = port_counts[v]
        for x in range(min(c, t_left), -1, -1):
            # x ports leave v (t-ports), c - x enter it (f-ports)
            counts[v][1] += x
            counts[v][0] += c - x
            if ok(v):
                acc.append(x)
                yield from ports(v + 1, t_left - x, acc)
                acc.pop()
            counts[v][1] -= x
            counts[v][0] -= c - x

    def edge(i: int):
        if i == len(edges):
            yield from ports(0, t_ports, [])
            return
        a, b = edges[i]
        for ca, cb in ((1, 0), (0, 1), (2, 2)):
            counts[a][ca] += 1
            counts[b][cb] += 1
            if ok(a) and ok(b):
                yield from edge(i + 1)
            counts[a][ca] -= 1
            counts[b][cb] -= 1

    yield from edge(0)


def _make_sub(n, edges, specs, port_counts, t_per_vertex) -> PortedInstance:
    ports = []
    for v in range(n):
        ports += [Port(v, Polarity.TPORT)] * t_per_vertex[v]
    for v in range(n):
        ports += [Port(v, Polarity.FPORT)] * (port_counts[v] - t_per_vertex[v])
    inst = PartialOrientationInstance(Multigraph(n, edges), tuple(DegreeSpec(*s) for s in specs))
    return PortedInstance(inst, tuple(ports))


def synth_gadget(
    t_ports: int,
    f_ports: int,
    max_vertices: int,
    alphabet: Optional[Sequence[DegreeSpec]] = None,
    budget: int = DEFAULT_BUDGET,
    one_port_per_vertex: bool = True,
) -> SynthResult:
    """Find the first verified variable gadget in canonical enumeration order.

    Order: vertex count, then graph code, then typed-candidate code.  The
    budget bounds the total oracle nodes spent on candidates.  By default a
    vertex carries at most one port: two leftover ports on one vertex would
    become parallel mirror edges and spoil simplicity downstream.
    """
    alphabet = tuple(alphabet) if alphabet is not None else default_alphabet()
    allowed = {(s.rho, s.delta, s.theta) for s in alphabet}
    totals = {sum(s) for s in allowed}
    max_total = max(totals)
    num_ports = t_ports + f_ports
    spent = 0
    candidates = 0
    if t_ports < 1 or f_ports < 1:
        return SynthResult(None, "not-found")
    try:
        current_n = None
        batch: dict = {}

        def flush():
            nonlocal spent
            for code in sorted(batch):
                sub = batch[code]
                true_pattern = {
                    pid: (PortConstraint.MUST_BE_AWAY if p.polarity is Polarity.TPORT else PortConstraint.MUST_BE_TOWARD)
                    for pid, p in enumerate(sub.ports)
                }
                quick = enumerate_orientations(sub, true_pattern, cap=2, budget=budget - spent)
                spent += quick.nodes
                if quick.count != 1:
                    continue
                false_pattern = {
                    pid: (PortConstraint.MUST_BE_TOWARD if c is PortConstraint.MUST_BE_AWAY else PortConstraint.MUST_BE_AWAY)
                    for pid, c in true_pattern.items()
                }
                quick = enumerate_orientations(sub, false_pattern, cap=2, budget=budget - spent)
                spent += quick.nodes
                if quick.count != 1:
                    continue
                try:
                    return build_template(sub, "variable", budget=max(1, budget - spent))
                except GadgetRejected:
                    continue
            return None

        for n, edges in connected_graphs(max_vertices, max_total):
            if n != current_n:
                if batch:
                    hit = flush()
                    if hit is not None:
                        return SynthResult(hit, "found", candidates)
                batch = {}
                current_n = n
            deg = [0] * n
            for a, b in edges:
                deg[a] += 1
                deg[b] += 1
            for layout in _port_layouts(deg, num_ports, max_total, 1 if one_port_per_vertex else num_ports):
                if any(deg[v] + layout[v] not in totals for v in range(n)):
                    continue
                for specs, t_per in _true_orientations(n, edges, layout, t_ports, allowed):
                    colors = [(specs[v], t_per[v], layout[v] - t_per[v]) for v in range(n)]
                    code = canonical_code(n, edges, colors)
                    if code not in batch:
                        candidates += 1
                        batch[code] = _make_sub(n, edges, specs, layout, t_per)
        if batch:
            hit = flush()
            if hit is not None:
                return SynthResult(hit, "found", candidates)
    except BudgetExceeded:
        return SynthResult(None, "budget-exceeded", candidates)
    return SynthResult(None, "not-found", candidates)
