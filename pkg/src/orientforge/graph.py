"""Multigraphs, degree prescriptions, MEDEP instances and the solution checkers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

PATH_LENGTH = 3


class GraphError(ValueError):
    """Structural problem with a graph or instance."""


class SelfLoopError(GraphError):
    pass


class MissingEdgeState(GraphError):
    pass


class UnknownEdge(GraphError):
    pass


class EdgeState(enum.IntEnum):
    """State of an edge relative to its stored endpoint order.

    For a port (an edge with one endpoint inside a subgraph) FORWARD means
    pointing away from the attached vertex and BACKWARD pointing toward it.
    The integer values fix the canonical search/sort order.
    """

    FORWARD = 0
    BACKWARD = 1
    UNDIRECTED = 2

    @property
    def token(self) -> str:
        return _STATE_TOKENS[self]

    @classmethod
    def from_token(cls, token: str) -> "EdgeState":
        try:
            return _TOKEN_STATES[token]
        except KeyError:
            raise ValueError(f"unknown edge state {token!r}") from None

    def reversed(self) -> "EdgeState":
        if self is EdgeState.UNDIRECTED:
            return self
        return EdgeState.BACKWARD if self is EdgeState.FORWARD else EdgeState.FORWARD


_STATE_TOKENS = {EdgeState.FORWARD: "fwd", EdgeState.BACKWARD: "bwd", EdgeState.UNDIRECTED: "und"}
_TOKEN_STATES = {v: k for k, v in _STATE_TOKENS.items()}

# Orientation: EdgeId -> EdgeState, total over the instance's edges.
Orientation = dict


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph with dense vertex ids and stable edge ids.

    ``edges[i]`` is the stored ``(endpoint_a, endpoint_b)`` pair of edge ``i``;
    the stored order is what FORWARD refers to.
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        if self.num_vertices < 0:
            raise GraphError("negative vertex count")
        for eid, (a, b) in enumerate(self.edges):
            if a == b:
                raise SelfLoopError(f"edge {eid} is a self-loop at vertex {a}")
            if not (0 <= a < self.num_vertices and 0 <= b < self.num_vertices):
                raise GraphError(f"edge {eid} references a vertex outside 0..{self.num_vertices - 1}")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.num_vertices
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def incident(self) -> list[list[int]]:
        inc: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for eid, (a, b) in enumerate(self.edges):
            inc[a].append(eid)
            inc[b].append(eid)
        return inc

    def other_end(self, eid: int, v: int) -> int:
        a, b = self.edges[eid]
        if v == a:
            return b
        if v == b:
            return a
        raise GraphError(f"vertex {v} is not an endpoint of edge {eid}")


@dataclass(frozen=True, order=True)
class DegreeSpec:
    """Prescribed in-degree (rho), out-degree (delta) and undirected degree (theta)."""

    rho: int = 0
    delta: int = 0
    theta: int = 0

    def __post_init__(self) -> None:
        if min(self.rho, self.delta, self.theta) < 0:
            raise GraphError(f"negative prescribed degree in {self}")

    @property
    def total(self) -> int:
        return self.rho + self.delta + self.theta

    @property
    def label(self) -> str:
        """Letter-string label such as ``ρδθθθ``."""
        return "ρ" * self.rho + "δ" * self.delta + "θ" * self.theta

    def mirrored(self) -> "DegreeSpec":
        return DegreeSpec(self.delta, self.rho, self.theta)


@dataclass(frozen=True)
class PartialOrientationInstance:
    graph: Multigraph
    specs: tuple[DegreeSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "specs", tuple(self.specs))
        if len(self.specs) != self.graph.num_vertices:
            raise GraphError("every vertex needs exactly one degree spec")

    def sum_mismatches(self) -> list[int]:
        """Vertices whose rho + delta + theta differs from their degree."""
        deg = self.graph.degrees()
        return [v for v, s in enumerate(self.specs) if s.total != deg[v]]

    @property
    def total_rho(self) -> int:
        return sum(s.rho for s in self.specs)

    @property
    def total_delta(self) -> int:
        return sum(s.delta for s in self.specs)


class Polarity(enum.Enum):
    TPORT = "tport"
    FPORT = "fport"
    LITERAL = "literal"
    RESOLUTION = "resolution"


@dataclass(frozen=True)
class Port:
    """Unfinished edge: one endpoint inside the subgraph, the other open."""

    vertex: int
    polarity: Polarity = Polarity.RESOLUTION


@dataclass(frozen=True)
class PortedInstance:
    """Subgraph with unfinished edges.

    Degree specs count port incidences, so ``instance.sum_mismatches()`` is
    not meaningful here; use :meth:`sum_mismatches` instead.
    """

    instance: PartialOrientationInstance
    ports: tuple[Port, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ports", tuple(self.ports))
        for pid, port in enumerate(self.ports):
            if not 0 <= port.vertex < self.instance.graph.num_vertices:
                raise GraphError(f"port {pid} attached to unknown vertex {port.vertex}")

    @property
    def graph(self) -> Multigraph:
        return self.instance.graph

    @property
    def specs(self) -> tuple[DegreeSpec, ...]:
        return self.instance.specs

    def degrees(self) -> list[int]:
        deg = self.graph.degrees()
        for port in self.ports:
            deg[port.vertex] += 1
        return deg

    def sum_mismatches(self) -> list[int]:
        deg = self.degrees()
        return [v for v, s in enumerate(self.specs) if s.total != deg[v]]

    def ports_at(self, v: int) -> list[int]:
        return [pid for pid, p in enumerate(self.ports) if p.vertex == v]


@dataclass(frozen=True)
class MedepInstance:
    graph: Multigraph
    s: int
    t: int
    k: int

    def __post_init__(self) -> None:
        if self.s == self.t:
            raise GraphError("s and t must differ")
        if self.k < 1:
            raise GraphError("k must be positive")
        for v in (self.s, self.t):
            if not 0 <= v < self.graph.num_vertices:
                raise GraphError(f"terminal {v} is not a vertex")


@dataclass(frozen=True, order=True)
class PathTriple:
    first: int
    middle: int
    last: int
    inner_u: int
    inner_v: int

    @property
    def edge_ids(self) -> tuple[int, int, int]:
        return (self.first, self.middle, self.last)


@dataclass(frozen=True)
class PathPacking:
    paths: tuple[PathTriple, ...] = ()

    @classmethod
    def from_edge_triples(
        cls, instance: MedepInstance, triples: Sequence[tuple[int, int, int]]
    ) -> "PathPacking":
        """Build triples from bare edge ids, reading inner vertices off the graph.

        Inner vertices are taken as the far ends of the first and last edges
        from s and t; chaining problems are left for :func:`check_packing`.
        """
        g = instance.graph
        paths = []
        for e1, e2, e3 in triples:
            for e in (e1, e2, e3):
                if not 0 <= e < g.num_edges:
                    raise UnknownEdge(f"edge {e} is not in the instance")
            a, b = g.edges[e1]
            u = b if a == instance.s else a
            a, b = g.edges[e3]
            v = a if b == instance.t else b
            paths.append(PathTriple(e1, e2, e3, u, v))
        return cls(tuple(paths))

    def edge_triples(self) -> list[tuple[int, int, int]]:
        return [p.edge_ids for p in self.paths]


@dataclass(frozen=True)
class CheckResult:
    """Verdict of a checker; truthy iff valid."""

    valid: bool
    reason: str = ""
    vertex: Optional[int] = None
    kind: str = ""

    def __bool__(self) -> bool:
        return self.valid


VALID = CheckResult(True)


def vertex_counts(graph: Multigraph, states: Mapping[int, EdgeState]) -> list[list[int]]:
    """Per-vertex ``[in, out, undirected]`` counts under ``states``."""
    counts = [[0, 0, 0] for _ in range(graph.num_vertices)]
    for eid, (a, b) in enumerate(graph.edges):
        st = states[eid]
        if st is EdgeState.FORWARD:
            counts[a][1] += 1
            counts[b][0] += 1
        elif st is EdgeState.BACKWARD:
            counts[a][0] += 1
            counts[b][1] += 1
        else:
            counts[a][2] += 1
            counts[b][2] += 1
    return counts


def _require_total(graph: Multigraph, cand: Mapping[int, EdgeState]) -> None:
    for eid in cand:
        if not (isinstance(eid, int) and 0 <= eid < graph.num_edges):
            raise UnknownEdge(f"orientation references unknown edge {eid}")
    missing = [eid for eid in range(graph.num_edges) if eid not in cand]
    if missing:
        raise MissingEdgeState(f"no state for edge {missing[0]} ({len(missing)} missing)")


def check_orientation(instance: PartialOrientationInstance, cand: Mapping[int, EdgeState]) -> CheckResult:
    """Check a candidate orientation against every vertex's degree triple.

    Invalid results name the first offending vertex in id order.
    """
    _require_total(instance.graph, cand)
    counts = vertex_counts(instance.graph, cand)
    names = ("in", "out", "undirected")
    for v, spec in enumerate(instance.specs):
        want = (spec.rho, spec.delta, spec.theta)
        for idx in range(3):
            if counts[v][idx] != want[idx]:
                return CheckResult(
                    False,
                    f"vertex {v}: {names[idx]}-count {counts[v][idx]} != {want[idx]}",
                    vertex=v,
                    kind=names[idx],
                )
    return VALID


def check_packing(instance: MedepInstance, cand: PathPacking) -> CheckResult:
    """Check that ``cand`` is k edge-disjoint simple s-t paths of length 3."""
    g = instance.graph
    s, t = instance.s, instance.t
    seen: set[int] = set()
    for idx, p in enumerate(cand.paths):
        for e in p.edge_ids:
            if not 0 <= e < g.num_edges:
                raise UnknownEdge(f"path {idx} uses unknown edge {e}")
        u, v = p.inner_u, p.inner_v
        if len({s, t, u, v}) != 4:
            return CheckResult(False, f"path {idx}: s, {u}, {v}, t not pairwise distinct", kind="EndpointMismatch")
        hops = ((p.first, s, u), (p.middle, u, v), (p.last, v, t))
        for e, x, y in hops:
            if set(g.edges[e]) != {x, y}:
                return CheckResult(False, f"path {idx}: edge {e} does not join {x} and {y}", kind="EndpointMismatch")
        for e in p.edge_ids:
            if e in seen:
                return CheckResult(False, f"path {idx}: edge {e} reused", kind="EdgeReuse")
            seen.add(e)
    if len(cand.paths) != instance.k:
        return CheckResult(False, f"{len(cand.paths)} paths given, k = {instance.k}", kind="Count")
    return VALID


@dataclass(frozen=True)
class SimplicityReport:
    simple: bool
    parallel_pairs: tuple[tuple[int, int], ...] = field(default=())

    def __bool__(self) -> bool:
        return self.simple


def is_simple(graph: Multigraph) -> SimplicityReport:
    """Report whether no two edges share an unordered endpoint pair.

    ``parallel_pairs`` lists each offending pair of edge ids (lower id first).
    """
    first: dict[frozenset, list[int]] = {}
    for eid, (a, b) in enumerate(graph.edges):
        first.setdefault(frozenset((a, b)), []).append(eid)
    pairs = []
    for eids in first.values():
        for i in range(len(eids)):
            for j in range(i + 1, len(eids)):
                pairs.append((eids[i], eids[j]))
    pairs.sort()
    return SimplicityReport(not pairs, tuple(pairs))
