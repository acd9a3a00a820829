"""Line-oriented text formats for formulas, instances, certificates and gadgets.

Grammars (one record per line, ``#`` starts a comment, LF endings)::

    po <numVertices> <numEdges>           medep <numVertices> <numEdges> <s> <t> <k>
    v <vertexId> <rho> <delta> <theta>     e <edgeId> <a> <b>
    e <edgeId> <a> <b>

    o <edgeId> fwd|bwd|und                 p <edge1> <edge2> <edge3>

Gadget templates use the ``po`` grammar plus ``kind variable|clause`` and
``port <portId> <vertex> tport|fport|literal|resolution`` records.  CNF input
is DIMACS.  Writers always end the text with a newline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .graph import (
    DegreeSpec,
    EdgeState,
    GraphError,
    MedepInstance,
    Multigraph,
    PartialOrientationInstance,
    PathPacking,
    Polarity,
    Port,
    PortedInstance,
)


class FormatError(ValueError):
    """Malformed input text; ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class ParseError(FormatError):
    pass


class ClauseTooLong(FormatError):
    def __init__(self, index: int, line: int = 0):
        super().__init__(f"clause {index} has more than 3 literals", line)
        self.index = index


class HeaderMismatch(FormatError):
    pass


class SelfLoop(FormatError):
    pass


class KMustBePositive(FormatError):
    pass


class SEqualsT(FormatError):
    pass


class DuplicateEdgeRecord(FormatError):
    pass


class SumMismatchWarning(UserWarning):
    """rho + delta + theta differs from a vertex's degree (checkers re-verify)."""


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for idx, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise ValueError(f"clause {idx} does not have exactly 3 literals")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"clause {idx}: literal {lit} out of range")

    def satisfied_by(self, assignment: Mapping[int, bool]) -> bool:
        return all(any(assignment[abs(l)] == (l > 0) for l in c) for c in self.clauses)

    def occurrences(self) -> dict[int, tuple[int, int]]:
        """variable -> (positive count, negative count)."""
        occ = {v: [0, 0] for v in range(1, self.num_vars + 1)}
        for clause in self.clauses:
            for lit in clause:
                occ[abs(lit)][lit < 0] += 1
        return {v: (p, n) for v, (p, n) in occ.items()}


def _records(text: str, comment: str = "#") -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.split(comment, 1)[0].strip()
        if line:
            yield lineno, line.split()


def _ints(tokens: Sequence[str], lineno: int, nonneg: bool = True) -> list[int]:
    try:
        vals = [int(tok) for tok in tokens]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", lineno) from None
    if nonneg and any(v < 0 for v in vals):
        raise ParseError("negative value", lineno)
    return vals


# ---------------------------------------------------------------- CNF


def parse_cnf(text: str) -> CnfFormula:
    """Read DIMACS CNF, padding 1- and 2-literal clauses by repeating the last literal."""
    header = None
    clauses: list[tuple[int, int, int]] = []
    current: list[int] = []
    current_line = 0
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("bad or repeated header, expected 'p cnf <vars> <clauses>'", lineno)
            header = _ints(parts[2:], lineno)
            continue
        if header is None:
            raise ParseError("clause before 'p cnf' header", lineno)
        for lit in _ints(line.split(), lineno, nonneg=False):
            if lit == 0:
                if not current:
                    raise ParseError("empty clause", lineno)
                while len(current) < 3:
                    current.append(current[-1])
                clauses.append(tuple(current))
                current = []
                continue
            if len(current) == 3:
                raise ClauseTooLong(len(clauses), current_line)
            if abs(lit) > header[0]:
                raise ParseError(f"literal {lit} exceeds declared variable count {header[0]}", lineno)
            if not current:
                current_line = lineno
            current.append(lit)
    if header is None:
        raise ParseError("missing 'p cnf' header")
    if current:
        raise ParseError("last clause is not terminated by 0", current_line)
    if len(clauses) != header[1]:
        raise HeaderMismatch(f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses))


def write_cnf(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in formula.clauses]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- PO / MEDEP


def _edge_lines(graph: Multigraph) -> list[str]:
    return [f"e {eid} {a} {b}" for eid, (a, b) in enumerate(graph.edges)]


def write_po(instance: PartialOrientationInstance) -> str:
    g = instance.graph
    lines = [f"po {g.num_vertices} {g.num_edges}"]
    lines += [f"v {v} {s.rho} {s.delta} {s.theta}" for v, s in enumerate(instance.specs)]
    lines += _edge_lines(g)
    return "\n".join(lines) + "\n"


def _collect_edges(records, num_vertices: int, num_edges: int) -> Multigraph:
    edges: dict[int, tuple[int, int]] = {}
    for lineno, toks in records:
        if len(toks) != 4:
            raise ParseError("expected 'e <edgeId> <a> <b>'", lineno)
        eid, a, b = _ints(toks[1:], lineno)
        if eid in edges:
            raise DuplicateEdgeRecord(f"edge {eid} listed twice", lineno)
        if eid >= num_edges:
            raise ParseError(f"edge id {eid} outside 0..{num_edges - 1}", lineno)
        if a == b:
            raise SelfLoop(f"edge {eid} is a self-loop at vertex {a}", lineno)
        if a >= num_vertices or b >= num_vertices:
            raise ParseError(f"edge {eid} references an unknown vertex", lineno)
        edges[eid] = (a, b)
    if len(edges) != num_edges:
        raise HeaderMismatch(f"header declares {num_edges} edges, found {len(edges)}")
    return Multigraph(num_vertices, tuple(edges[i] for i in range(num_edges)))


def _split(text: str, header_word: str, header_len: int, allowed: set[str]):
    recs = list(_records(text))
    if not recs or recs[0][1][0] != header_word:
        raise ParseError(f"missing '{header_word}' header", recs[0][0] if recs else 0)
    lineno, toks = recs[0]
    if len(toks) != header_len:
        raise ParseError(f"'{header_word}' header needs {header_len - 1} fields", lineno)
    header = _ints(toks[1:], lineno)
    grouped: dict[str, list] = {key: [] for key in allowed}
    for lineno, toks in recs[1:]:
        if toks[0] not in allowed:
            raise ParseError(f"unknown record {toks[0]!r}", lineno)
        grouped[toks[0]].append((lineno, toks))
    return header, grouped


def _collect_specs(records, num_vertices: int) -> tuple[DegreeSpec, ...]:
    specs: dict[int, DegreeSpec] = {}
    for lineno, toks in records:
        if len(toks) != 5:
            raise ParseError("expected 'v <vertexId> <rho> <delta> <theta>'", lineno)
        v, r, d, t = _ints(toks[1:], lineno)
        if v >= num_vertices:
            raise ParseError(f"vertex id {v} outside 0..{num_vertices - 1}", lineno)
        if v in specs:
            raise ParseError(f"vertex {v} listed twice", lineno)
        specs[v] = DegreeSpec(r, d, t)
    if len(specs) != num_vertices:
        raise HeaderMismatch(f"header declares {num_vertices} vertices, found {len(specs)}")
    return tuple(specs[v] for v in range(num_vertices))


def parse_po(text: str) -> PartialOrientationInstance:
    """Parse a ``po`` file; degree-sum mismatches only raise SumMismatchWarning."""
    (n, m), grouped = _split(text, "po", 3, {"v", "e"})
    specs = _collect_specs(grouped["v"], n)
    graph = _collect_edges(grouped["e"], n, m)
    inst = PartialOrientationInstance(graph, specs)
    bad = inst.sum_mismatches()
    if bad:
        warnings.warn(f"rho+delta+theta != degree at vertices {bad}", SumMismatchWarning, stacklevel=2)
    return inst


def write_medep(instance: MedepInstance) -> str:
    g = instance.graph
    lines = [f"medep {g.num_vertices} {g.num_edges} {instance.s} {instance.t} {instance.k}"]
    lines += _edge_lines(g)
    return "\n".join(lines) + "\n"


def parse_medep(text: str) -> MedepInstance:
    (n, m, s, t, k), grouped = _split(text, "medep", 6, {"e"})
    if k < 1:
        raise KMustBePositive("k must be at least 1")
    if s == t:
        raise SEqualsT("s and t must differ")
    if s >= n or t >= n:
        raise ParseError("terminal outside the vertex range")
    graph = _collect_edges(grouped["e"], n, m)
    return MedepInstance(graph, s, t, k)


# ---------------------------------------------------------------- certificates


def write_orientation(states: Mapping[int, EdgeState]) -> str:
    return "".join(f"o {eid} {states[eid].token}\n" for eid in sorted(states))


def parse_orientation(text: str) -> dict[int, EdgeState]:
    """Parse an orientation certificate; totality is checked at use time."""
    out: dict[int, EdgeState] = {}
    for lineno, toks in _records(text):
        if toks[0] != "o" or len(toks) != 3:
            raise ParseError("expected 'o <edgeId> fwd|bwd|und'", lineno)
        (eid,) = _ints(toks[1:2], lineno)
        try:
            st = EdgeState.from_token(toks[2])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if eid in out:
            raise DuplicateEdgeRecord(f"edge {eid} has two records", lineno)
        out[eid] = st
    return out


def write_packing(packing: PathPacking) -> str:
    return "".join(f"p {a} {b} {c}\n" for a, b, c in packing.edge_triples())


def parse_packing(text: str) -> list[tuple[int, int, int]]:
    """Parse a packing certificate into edge-id triples."""
    out: list[tuple[int, int, int]] = []
    seen: set[int] = set()
    for lineno, toks in _records(text):
        if toks[0] != "p" or len(toks) != 4:
            raise ParseError("expected 'p <edge1> <edge2> <edge3>'", lineno)
        triple = tuple(_ints(toks[1:], lineno))
        if seen.intersection(triple) or len(set(triple)) < 3:
            raise DuplicateEdgeRecord(f"edge reused in packing record {triple}", lineno)
        seen.update(triple)
        out.append(triple)
    return out


# ---------------------------------------------------------------- gadget templates


def write_gadget(sub: PortedInstance, kind: str) -> str:
    g = sub.graph
    lines = [f"po {g.num_vertices} {g.num_edges}", f"kind {kind}"]
    lines += [f"v {v} {s.rho} {s.delta} {s.theta}" for v, s in enumerate(sub.specs)]
    lines += _edge_lines(g)
    lines += [f"port {pid} {p.vertex} {p.polarity.value}" for pid, p in enumerate(sub.ports)]
    return "\n".join(lines) + "\n"


def parse_gadget(text: str) -> tuple[PortedInstance, str]:
    """Parse a gadget template file into ``(subgraph, kind)``."""
    (n, m), grouped = _split(text, "po", 3, {"v", "e", "kind", "port"})
    if len(grouped["kind"]) != 1 or len(grouped["kind"][0][1]) != 2:
        raise ParseError("exactly one 'kind variable|clause' record required")
    lineno, toks = grouped["kind"][0]
    kind = toks[1]
    if kind not in ("variable", "clause"):
        raise ParseError(f"unknown gadget kind {kind!r}", lineno)
    specs = _collect_specs(grouped["v"], n)
    graph = _collect_edges(grouped["e"], n, m)
    ports: dict[int, Port] = {}
    for lineno, toks in grouped["port"]:
        if len(toks) != 4:
            raise ParseError("expected 'port <id> <vertex> <polarity>'", lineno)
        pid, v = _ints(toks[1:3], lineno)
        try:
            pol = Polarity(toks[3])
        except ValueError:
            raise ParseError(f"unknown polarity {toks[3]!r}", lineno) from None
        if pid in ports:
            raise ParseError(f"port {pid} listed twice", lineno)
        if v >= n:
            raise ParseError(f"port {pid} attached to unknown vertex {v}", lineno)
        ports[pid] = Port(v, pol)
    if sorted(ports) != list(range(len(ports))):
        raise ParseError("port ids must be dense from 0")
    try:
        sub = PortedInstance(PartialOrientationInstance(graph, specs), tuple(ports[i] for i in range(len(ports))))
    except GraphError as exc:
        raise ParseError(str(exc)) from None
    return sub, kind
