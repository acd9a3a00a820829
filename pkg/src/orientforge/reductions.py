"""3-SAT -> Partial Orientation -> MEDEP(3) reductions and witness translation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .formats import CnfFormula, FormatError, ParseError
from .gadgets import ALL_AWAY, GadgetStore, NotInStore, clause_gadget, mirror_complete
from .graph import (
    EdgeState,
    MedepInstance,
    Multigraph,
    PartialOrientationInstance,
    PathPacking,
    PathTriple,
    Polarity,
    Port,
    PortedInstance,
)

FWD, BWD, UND = EdgeState.FORWARD, EdgeState.BACKWARD, EdgeState.UNDIRECTED


class GadgetUnavailable(LookupError):
    def __init__(self, m: int, variable: int):
        super().__init__(f"variable {variable} needs a variable gadget with m={m}, which the store lacks")
        self.m = m
        self.variable = variable


class NotSatisfying(ValueError):
    pass


class IncoherentGadgetState(ValueError):
    pass


class CopyExhausted(ValueError):
    pass


# ---------------------------------------------------------------- provenance


@dataclass
class VariableRecord:
    var: int
    m: int
    vertices: tuple[int, ...]
    # internal edge -> (state in TRUE, state in FALSE)
    edges: dict[int, tuple[EdgeState, EdgeState]]
    # instance edges standing for t_1..t_m and f_1..f_m; the tree vertex is endpoint a
    tports: tuple[int, ...]
    fports: tuple[int, ...]

    def expected(self, value: bool) -> dict[int, EdgeState]:
        out = {e: (pair[0] if value else pair[1]) for e, pair in self.edges.items()}
        out.update({e: FWD if value else BWD for e in self.tports})
        out.update({e: BWD if value else FWD for e in self.fports})
        return out


@dataclass
class ClauseRecord:
    index: int
    literals: tuple[int, int, int]
    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    # per clause-gadget port: (instance edge, +1 if port-away is FORWARD else -1)
    ports: tuple[tuple[int, int], ...]


@dataclass
class SatProvenance:
    num_vars: int
    variables: list[VariableRecord] = field(default_factory=list)
    clauses: list[ClauseRecord] = field(default_factory=list)
    primal_vertices: int = 0
    primal_edges: int = 0
    # link edge -> primal vertex it leaves from
    links: dict[int, int] = field(default_factory=dict)

    def formula(self) -> CnfFormula:
        return CnfFormula(self.num_vars, tuple(c.literals for c in self.clauses))

    def mirror_of(self, v: int) -> int:
        return v + self.primal_vertices


@dataclass
class MedepProvenance:
    s: int
    t: int
    k: int
    po_vertices: int
    # po edge -> medep edge (middle layer)
    middle: dict[int, int] = field(default_factory=dict)
    s_edges: dict[int, list[int]] = field(default_factory=dict)
    t_edges: dict[int, list[int]] = field(default_factory=dict)

    def medep_vertex(self, v: int) -> int:
        return v + 1

    def po_vertex(self, w: int) -> int:
        return w - 1


@dataclass
class ProvenanceMap:
    sat: Optional[SatProvenance] = None
    medep: Optional[MedepProvenance] = None

    def to_text(self) -> str:
        lines = []
        if self.sat is not None:
            sp = self.sat
            lines.append(f"prov formula {sp.num_vars} {len(sp.clauses)} {sp.primal_vertices} {sp.primal_edges}")
            for rec in sp.variables:
                lines.append(f"prov var {rec.var} {rec.m} " + " ".join(map(str, rec.vertices)))
                for e, (ts, fs) in sorted(rec.edges.items()):
                    lines.append(f"prov vedge {rec.var} {e} {ts.token} {fs.token}")
                for j, e in enumerate(rec.tports):
                    lines.append(f"prov tport {rec.var} {j} {e}")
                for j, e in enumerate(rec.fports):
                    lines.append(f"prov fport {rec.var} {j} {e}")
            for c in sp.clauses:
                ports = " ".join(f"{e}{'+' if sign > 0 else '-'}" for e, sign in c.ports)
                lines.append(
                    f"prov clause {c.index} {' '.join(map(str, c.literals))} | "
                    f"{' '.join(map(str, c.vertices))} | {' '.join(map(str, c.edges))} | {ports}"
                )
            for e, v in sorted(sp.links.items()):
                lines.append(f"prov link {e} {v}")
        if self.medep is not None:
            mp = self.medep
            lines.append(f"prov po2medep {mp.s} {mp.t} {mp.k} {mp.po_vertices}")
            for pe, me in sorted(mp.middle.items()):
                lines.append(f"prov middle {pe} {me}")
            for side, table in (("sedge", mp.s_edges), ("tedge", mp.t_edges)):
                for v, eids in sorted(table.items()):
                    for e in eids:
                        lines.append(f"prov {side} {v} {e}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "ProvenanceMap":
        try:
            return _parse_provenance(text)
        except FormatError:
            raise
        except (ValueError, IndexError, KeyError) as exc:
            raise ParseError(f"malformed provenance: {exc}") from None


def _parse_provenance(text: str) -> ProvenanceMap:
    out = ProvenanceMap()
    vars_by_id: dict[int, VariableRecord] = {}
    tports: dict[int, dict[int, int]] = {}
    fports: dict[int, dict[int, int]] = {}
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] != "prov" or len(toks) < 2:
            raise ParseError("expected a 'prov <kind> ...' record", lineno)
        kind, rest = toks[1], toks[2:]
        sp, mp = out.sat, out.medep
        if kind == "formula":
            nv, _nc, pv, pe = map(int, rest)
            out.sat = SatProvenance(nv, primal_vertices=pv, primal_edges=pe)
        elif kind == "po2medep":
            s, t, k, n = map(int, rest)
            out.medep = MedepProvenance(s, t, k, n)
        elif sp is None and kind in ("var", "vedge", "tport", "fport", "clause", "link"):
            raise ParseError(f"'{kind}' record before 'prov formula'", lineno)
        elif kind == "var":
            rec = VariableRecord(int(rest[0]), int(rest[1]), tuple(map(int, rest[2:])), {}, (), ())
            vars_by_id[rec.var] = rec
            sp.variables.append(rec)
        elif kind == "vedge":
            var, e = int(rest[0]), int(rest[1])
            vars_by_id[var].edges[e] = (EdgeState.from_token(rest[2]), EdgeState.from_token(rest[3]))
        elif kind in ("tport", "fport"):
            var, j, e = map(int, rest)
            (tports if kind == "tport" else fports).setdefault(var, {})[j] = e
        elif kind == "clause":
            parts = " ".join(rest).split("|")
            head = list(map(int, parts[0].split()))
            ports = tuple((int(tok[:-1]), 1 if tok[-1] == "+" else -1) for tok in parts[3].split())
            sp.clauses.append(ClauseRecord(
                head[0], tuple(head[1:4]), tuple(map(int, parts[1].split())),
                tuple(map(int, parts[2].split())), ports,
            ))
        elif kind == "link":
            e, v = map(int, rest)
            sp.links[e] = v
        elif mp is None and kind in ("middle", "sedge", "tedge"):
            raise ParseError(f"'{kind}' record before 'prov po2medep'", lineno)
        elif kind == "middle":
            pe, me = map(int, rest)
            mp.middle[pe] = me
        elif kind in ("sedge", "tedge"):
            v, e = map(int, rest)
            (mp.s_edges if kind == "sedge" else mp.t_edges).setdefault(v, []).append(e)
        else:
            raise ParseError(f"unknown provenance record {kind!r}", lineno)
    for var, rec in vars_by_id.items():
        rec.tports = tuple(tports.get(var, {})[j] for j in range(len(tports.get(var, {}))))
        rec.fports = tuple(fports.get(var, {})[j] for j in range(len(fports.get(var, {}))))
    return out


# ---------------------------------------------------------------- CNF preprocessing


def bound_occurrences(formula: CnfFormula, max_occ: int = 3) -> CnfFormula:
    """Rewrite so no variable occurs more than ``max_occ`` times per polarity.

    An overused variable x is split into copies x^1..x^k linked by the cycle
    of implications x^i -> x^(i+1), each written as a width-3 clause padded by
    repetition.  The result is equisatisfiable; bounded formulas come back
    unchanged.
    """
    if max_occ < 3:
        raise ValueError("max_occ must be at least 3")
    occ = formula.occurrences()
    if all(p <= max_occ and n <= max_occ for p, n in occ.values()):
        return formula
    clauses = [list(c) for c in formula.clauses]
    chain: list[tuple[int, int, int]] = []
    next_var = formula.num_vars + 1
    for var in range(1, formula.num_vars + 1):
        pos, neg = occ[var]
        if pos <= max_occ and neg <= max_occ:
            continue
        # Each chain clause (-x^i, x^(i+1), pad) costs every copy one positive
        # and one negative slot; the pad repeats whichever polarity is scarcer.
        pad_negative = pos >= neg
        cap_pos = max_occ - 1 if pad_negative else max_occ - 2
        cap_neg = max_occ - 2 if pad_negative else max_occ - 1
        k = max(2, math.ceil(pos / cap_pos), math.ceil(neg / cap_neg))
        copies = [var] + list(range(next_var, next_var + k - 1))
        next_var += k - 1
        used = {c: [0, 0] for c in copies}
        for clause in clauses:
            for slot, lit in enumerate(clause):
                if abs(lit) != var:
                    continue
                polarity = int(lit < 0)
                cap = cap_neg if polarity else cap_pos
                copy = next(c for c in copies if used[c][polarity] < cap)
                used[copy][polarity] += 1
                clause[slot] = copy if lit > 0 else -copy
        for i, c in enumerate(copies):
            nxt = copies[(i + 1) % k]
            chain.append((-c, nxt, -c) if pad_negative else (-c, nxt, nxt))
    return CnfFormula(next_var - 1, tuple(tuple(c) for c in clauses) + tuple(chain))


# ---------------------------------------------------------------- 3-SAT -> PO


def sat_to_po(formula: CnfFormula, store: Optional[GadgetStore] = None
              ) -> tuple[PartialOrientationInstance, ProvenanceMap]:
    """Build the mirrored Partial Orientation instance for a 3-CNF formula.

    Vertices are laid out variable gadgets first, then clause gadgets, then
    the mirror copy.  Edges: gadget-internal edges, then one fused edge per
    literal (tree vertex first), then the mirror copies, then one link edge
    per leftover port.
    """
    store = store if store is not None else GadgetStore.load()
    occ = formula.occurrences()
    edges: list[tuple[int, int]] = []
    specs = []
    prov = SatProvenance(formula.num_vars)
    free_t: dict[int, list[int]] = {}
    free_f: dict[int, list[int]] = {}
    var_ports: dict[int, list[tuple[int, int]]] = {}  # var -> [(polarity slot, vertex)]

    for var in range(1, formula.num_vars + 1):
        m = max(occ[var][0], occ[var][1], 1)
        try:
            tmpl = store.variable_gadget(m)
        except NotInStore:
            raise GadgetUnavailable(m, var) from None
        base = len(specs)
        specs.extend(tmpl.sub.specs)
        true_w, false_w = tmpl.canonical
        rec_edges = {}
        for i, (a, b) in enumerate(tmpl.sub.graph.edges):
            rec_edges[len(edges)] = (true_w.edges[i], false_w.edges[i])
            edges.append((a + base, b + base))
        prov.variables.append(VariableRecord(var, m, tuple(range(base, len(specs))), rec_edges, (), ()))
        free_t[var] = [tmpl.sub.ports[p].vertex + base for p in tmpl.port_ids(Polarity.TPORT)]
        free_f[var] = [tmpl.sub.ports[p].vertex + base for p in tmpl.port_ids(Polarity.FPORT)]

    clause_tmpl = clause_gadget()
    clause_bases = []
    clause_edge_ids = []
    for clause in formula.clauses:
        base = len(specs)
        clause_bases.append(base)
        specs.extend(clause_tmpl.sub.specs)
        ids = []
        for a, b in clause_tmpl.sub.graph.edges:
            ids.append(len(edges))
            edges.append((a + base, b + base))
        clause_edge_ids.append(tuple(ids))

    # fused literal edges, tree vertex first
    t_used = {v: 0 for v in free_t}
    f_used = {v: 0 for v in free_f}
    port_edge: dict[tuple[int, str, int], int] = {}
    clause_port_edges: list[list[tuple[int, int]]] = []
    for j, clause in enumerate(formula.clauses):
        cp = []
        for slot, lit in enumerate(clause):
            var = abs(lit)
            kind = "t" if lit > 0 else "f"
            used = t_used if lit > 0 else f_used
            pool = free_t[var] if lit > 0 else free_f[var]
            tree_v = pool[used[var]]
            port_edge[(var, kind, used[var])] = len(edges)
            used[var] += 1
            clause_v = clause_tmpl.sub.ports[slot].vertex + clause_bases[j]
            cp.append((len(edges), -1))
            edges.append((tree_v, clause_v))
        clause_port_edges.append(cp)

    primal_edges = len(edges)
    leftover: list[Port] = []
    leftover_keys: list[tuple] = []
    for var in range(1, formula.num_vars + 1):
        for kind, pool, used in (("t", free_t[var], t_used[var]), ("f", free_f[var], f_used[var])):
            for j in range(used, len(pool)):
                leftover.append(Port(pool[j]))
                leftover_keys.append((var, kind, j))
    for j in range(len(formula.clauses)):
        for p in range(3, len(clause_tmpl.sub.ports)):
            leftover.append(Port(clause_tmpl.sub.ports[p].vertex + clause_bases[j]))
            leftover_keys.append(("clause", j, p))

    primal = PartialOrientationInstance(Multigraph(len(specs), edges), specs)
    prov.primal_vertices = len(specs)
    prov.primal_edges = primal_edges
    if leftover:
        instance = mirror_complete(PortedInstance(primal, leftover))
    else:
        instance = primal

    for idx, key in enumerate(leftover_keys):
        e = 2 * primal_edges + idx
        prov.links[e] = leftover[idx].vertex
        if key[0] == "clause":
            clause_port_edges[key[1]].append((e, 1))
        else:
            port_edge[key] = e

    for rec in prov.variables:
        rec.tports = tuple(port_edge[(rec.var, "t", j)] for j in range(len(free_t[rec.var])))
        rec.fports = tuple(port_edge[(rec.var, "f", j)] for j in range(len(free_f[rec.var])))
    for j, clause in enumerate(formula.clauses):
        base = clause_bases[j]
        prov.clauses.append(ClauseRecord(
            j, tuple(clause), tuple(range(base, base + 7)), clause_edge_ids[j], tuple(clause_port_edges[j]),
        ))
    return instance, ProvenanceMap(sat=prov)


def encode_assignment(formula: CnfFormula, assignment: Mapping[int, bool],
                      provenance: ProvenanceMap) -> dict[int, EdgeState]:
    """Orientation of the ``sat_to_po`` instance that realises a satisfying assignment."""
    sp = provenance.sat
    if sp is None:
        raise ValueError("provenance has no sat_to_po section")
    states: dict[int, EdgeState] = {}
    for rec in sp.variables:
        states.update(rec.expected(bool(assignment[rec.var])))
    table = clause_gadget().extension_table
    for rec, clause in zip(sp.clauses, formula.clauses):
        pattern = tuple(BWD if bool(assignment[abs(l)]) == (l > 0) else FWD for l in clause)
        if pattern == ALL_AWAY:
            raise NotSatisfying(f"clause {rec.index} {clause} has no true literal")
        ext = table[pattern]
        for e, st in zip(rec.edges, ext.edges):
            states[e] = st
        for (e, sign), st in zip(rec.ports, ext.ports):
            st = st if sign > 0 else st.reversed()
            if states.setdefault(e, st) is not st:
                raise IncoherentGadgetState(f"edge {e} disagrees between clause {rec.index} and its variable")
    for e in range(sp.primal_edges):
        states[e + sp.primal_edges] = states[e].reversed()
    return states


def decode_orientation(orientation: Mapping[int, EdgeState], provenance: ProvenanceMap) -> dict[int, bool]:
    """Read each variable off its gadget: TRUE orientation means true."""
    sp = provenance.sat
    if sp is None:
        raise ValueError("provenance has no sat_to_po section")
    out = {}
    for rec in sp.variables:
        got = None
        for value in (True, False):
            if all(orientation[e] is st for e, st in rec.expected(value).items()):
                got = value
                break
        if got is None:
            raise IncoherentGadgetState(f"gadget of variable {rec.var} is in neither TRUE nor FALSE state")
        out[rec.var] = got
    if not sp.formula().satisfied_by(out):
        raise IncoherentGadgetState("decoded assignment does not satisfy the formula")
    return out


# ---------------------------------------------------------------- PO -> MEDEP


@dataclass(frozen=True)
class TriviallyInfeasible:
    reason: str

    def __bool__(self) -> bool:
        return False


def po_to_medep(instance: PartialOrientationInstance
                ) -> Union[tuple[MedepInstance, ProvenanceMap], TriviallyInfeasible]:
    """Attach s and t: s meets v delta(v) times, t meets v rho(v) times; k = deg(s).

    Layout: s is vertex 0, PO vertex v becomes v + 1, t is the last vertex.
    Edges: the s-edges (by vertex), then the PO edges in id order, then the
    t-edges.
    """
    out_sum, in_sum = instance.total_delta, instance.total_rho
    if out_sum != in_sum:
        return TriviallyInfeasible(f"trivially infeasible: total out-degree {out_sum} != total in-degree {in_sum}")
    if out_sum == 0:
        return TriviallyInfeasible("trivially infeasible: no prescribed directed edges, so k would be 0")
    n = instance.graph.num_vertices
    s, t = 0, n + 1
    prov = MedepProvenance(s, t, out_sum, n)
    edges: list[tuple[int, int]] = []
    for v, spec in enumerate(instance.specs):
        for _ in range(spec.delta):
            prov.s_edges.setdefault(v, []).append(len(edges))
            edges.append((s, v + 1))
    for pe, (a, b) in enumerate(instance.graph.edges):
        prov.middle[pe] = len(edges)
        edges.append((a + 1, b + 1))
    for v, spec in enumerate(instance.specs):
        for _ in range(spec.rho):
            prov.t_edges.setdefault(v, []).append(len(edges))
            edges.append((v + 1, t))
    medep = MedepInstance(Multigraph(n + 2, edges), s, t, out_sum)
    return medep, ProvenanceMap(medep=prov)


def orientation_to_packing(orientation: Mapping[int, EdgeState], po_instance: PartialOrientationInstance,
                           provenance: ProvenanceMap) -> PathPacking:
    """Turn each directed edge u->v into the path s-u-v-t, taking s/t copies in id order."""
    mp = provenance.medep
    next_s = {v: 0 for v in mp.s_edges}
    next_t = {v: 0 for v in mp.t_edges}
    paths = []
    for pe, (a, b) in enumerate(po_instance.graph.edges):
        st = orientation[pe]
        if st is UND:
            continue
        u, v = (a, b) if st is FWD else (b, a)
        try:
            first = mp.s_edges[u][next_s[u]]
            last = mp.t_edges[v][next_t[v]]
        except (KeyError, IndexError):
            raise CopyExhausted(f"no unused s-edge at {u} or t-edge at {v} for PO edge {pe}") from None
        next_s[u] += 1
        next_t[v] += 1
        paths.append(PathTriple(first, mp.middle[pe], last, mp.medep_vertex(u), mp.medep_vertex(v)))
    return PathPacking(tuple(paths))


def packing_to_orientation(packing: PathPacking, po_instance: PartialOrientationInstance,
                           provenance: ProvenanceMap) -> dict[int, EdgeState]:
    """Orient each middle edge along its path; PO edges on no path stay undirected."""
    mp = provenance.medep
    by_middle = {me: pe for pe, me in mp.middle.items()}
    states = {pe: UND for pe in mp.middle}
    for p in packing.paths:
        pe = by_middle.get(p.middle)
        if pe is None:
            raise ValueError(f"edge {p.middle} is not a middle-layer edge")
        a, _b = po_instance.graph.edges[pe]
        states[pe] = FWD if mp.po_vertex(p.inner_u) == a else BWD
    return states
