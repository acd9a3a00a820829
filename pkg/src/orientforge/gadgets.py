"""Variable and clause gadgets, their verification, the template store and mirroring."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from . import formats
from .graph import (
    DegreeSpec,
    EdgeState,
    Multigraph,
    PartialOrientationInstance,
    Polarity,
    Port,
    PortedInstance,
)
from .oracle import DEFAULT_BUDGET, BudgetExceeded, PortConstraint, Witness, enumerate_orientations

FWD, BWD, UND = EdgeState.FORWARD, EdgeState.BACKWARD, EdgeState.UNDIRECTED

STORE_ENV = "ORIENTFORGE_GADGET_STORE"

# clause-gadget vertex ids
V_A, V_B, V_C, V_AA, V_BB, V_CC, V_X = range(7)
LITERAL_PORTS = (0, 1, 2)

# all literal-port direction patterns, seen from the clause (FORWARD = away)
PATTERNS = tuple(itertools.product((FWD, BWD), repeat=3))
ALL_AWAY = (FWD, FWD, FWD)


class NotInStore(LookupError):
    def __init__(self, m: int):
        super().__init__(
            f"no verified variable gadget with m={m} in the store; run "
            f"'orientforge gadget synth --t {m} --f {m} ...' or add a transcribed "
            f"var_m{m}.gadget file, then re-verify"
        )
        self.m = m


@dataclass
class GadgetTemplate:
    """A subgraph with ports plus the oracle-derived behaviour.

    ``canonical`` holds the (TRUE, FALSE) witnesses of a variable gadget;
    ``extension_table`` maps each literal-port pattern of a clause gadget to
    its first extension in canonical order, or None when none exists.  Both
    are recomputed from the subgraph, never read from disk.
    """

    sub: PortedInstance
    kind: str
    canonical: Optional[tuple[Witness, Witness]] = None
    extension_table: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return sum(p.polarity is Polarity.TPORT for p in self.sub.ports)

    def port_ids(self, polarity: Polarity) -> list[int]:
        return [pid for pid, p in enumerate(self.sub.ports) if p.polarity is polarity]


@dataclass
class Verification:
    ok: bool
    problems: list[str] = field(default_factory=list)
    witnesses: list[Witness] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def report(self) -> str:
        if self.ok:
            return "verified"
        return "failed:\n" + "\n".join(f"  - {p}" for p in self.problems)


def _fmt_witness(w: Witness) -> str:
    ports = " ".join(s.token for s in w.ports)
    edges = " ".join(s.token for s in w.edges)
    return f"ports[{ports}] edges[{edges}]"


def clause_gadget() -> GadgetTemplate:
    """The seven-vertex clause subgraph with literal ports on the triangle."""
    specs = (
        [DegreeSpec(1, 1, 3)] * 3  # v_a, v_b, v_c
        + [DegreeSpec(1, 0, 1)] * 3  # v_aa, v_bb, v_cc
        + [DegreeSpec(0, 1, 3)]  # v_x
    )
    edges = (
        (V_A, V_B), (V_B, V_C), (V_C, V_A),
        (V_X, V_A), (V_X, V_B), (V_X, V_C),
        (V_A, V_AA), (V_B, V_BB), (V_C, V_CC),
    )
    ports = [Port(v, Polarity.LITERAL) for v in (V_A, V_B, V_C)]
    ports += [Port(v, Polarity.RESOLUTION) for v in (V_AA, V_BB, V_CC, V_X)]
    sub = PortedInstance(PartialOrientationInstance(Multigraph(7, edges), specs), ports)
    return build_template(sub, "clause")


def single_edge_variable_gadget() -> PortedInstance:
    """m=1: two rho-delta vertices joined by one edge, port t1 on vertex 0."""
    inst = PartialOrientationInstance(Multigraph(2, ((0, 1),)), (DegreeSpec(1, 1, 0), DegreeSpec(1, 1, 0)))
    return PortedInstance(inst, (Port(0, Polarity.TPORT), Port(1, Polarity.FPORT)))


def ring_variable_gadget(m: int) -> PortedInstance:
    """Cycle of 2m rho-delta-theta hubs, each carrying one port.

    Consecutive hubs are joined through a rho-theta or delta-theta vertex,
    alternating around the ring.  Odd hubs carry the t-ports, even hubs the
    f-ports; the two orientations are the two rotation senses of the ring.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    hubs = 2 * m
    specs = [DegreeSpec(1, 1, 1)] * hubs
    edges = []
    for i in range(hubs):
        mid = hubs + i
        specs.append(DegreeSpec(1, 0, 1) if i % 2 == 0 else DegreeSpec(0, 1, 1))
        edges.append((i, mid))
        edges.append((mid, (i + 1) % hubs))
    ports = [Port(v, Polarity.TPORT) for v in range(1, hubs, 2)]
    ports += [Port(v, Polarity.FPORT) for v in range(0, hubs, 2)]
    return PortedInstance(PartialOrientationInstance(Multigraph(2 * hubs, edges), specs), ports)


def _degree_bound_problems(sub: PortedInstance) -> list[str]:
    out = []
    for v, s in enumerate(sub.specs):
        if s.rho > 1 or s.delta > 1:
            out.append(f"vertex {v} has type {s.label}: rho and delta must be at most 1")
    for v in sub.sum_mismatches():
        out.append(f"vertex {v}: rho+delta+theta != incident edges and ports")
    return out


def _verify_variable(sub: PortedInstance, budget: int) -> tuple[Verification, Optional[tuple[Witness, Witness]]]:
    problems = _degree_bound_problems(sub)
    tports = [pid for pid, p in enumerate(sub.ports) if p.polarity is Polarity.TPORT]
    fports = [pid for pid, p in enumerate(sub.ports) if p.polarity is Polarity.FPORT]
    if len(tports) != len(fports) or not tports:
        problems.append(f"needs m >= 1 t-ports and as many f-ports, has {len(tports)} and {len(fports)}")
    others = [pid for pid, p in enumerate(sub.ports) if p.polarity not in (Polarity.TPORT, Polarity.FPORT)]
    if others:
        problems.append(f"ports {others} are neither t- nor f-ports")
    res = enumerate_orientations(sub, {}, cap=16, budget=budget)
    if res.count != 2 or res.capped:
        count = f">= {res.count}" if res.capped else str(res.count)
        problems.append(f"{count} orientations with ports free, expected exactly 2")
    true_w = false_w = None
    for w in res.witnesses:
        undirected = [pid for pid, st in enumerate(w.ports) if st is UND]
        if undirected:
            problems.append(f"ports {undirected} undirected in {_fmt_witness(w)}")
            continue
        is_true = all(w.ports[p] is FWD for p in tports) and all(w.ports[p] is BWD for p in fports)
        is_false = all(w.ports[p] is BWD for p in tports) and all(w.ports[p] is FWD for p in fports)
        if is_true:
            true_w = w
        elif is_false:
            false_w = w
        else:
            problems.append(f"mixed port polarities in {_fmt_witness(w)}")
    if res.count == 2 and not problems and (true_w is None or false_w is None):
        problems.append("orientations do not split into one TRUE and one FALSE")
    ok = not problems
    return Verification(ok, problems, res.witnesses), ((true_w, false_w) if ok else None)


def _clause_table(sub: PortedInstance, budget: int) -> dict:
    table = {}
    for pattern in PATTERNS:
        cons = {pid: (PortConstraint.MUST_BE_AWAY if st is FWD else PortConstraint.MUST_BE_TOWARD)
                for pid, st in zip(LITERAL_PORTS, pattern)}
        res = enumerate_orientations(sub, cons, cap=1, budget=budget)
        table[pattern] = res.witnesses[0] if res.count else None
    return table


def _verify_clause(sub: PortedInstance, budget: int) -> tuple[Verification, dict]:
    problems = _degree_bound_problems(sub)
    lits = [pid for pid, p in enumerate(sub.ports) if p.polarity is Polarity.LITERAL]
    if lits != list(LITERAL_PORTS):
        problems.append(f"literal ports must be ports 0, 1, 2; found {lits}")
        return Verification(False, problems), {}
    table = _clause_table(sub, budget)
    if table[ALL_AWAY] is not None:
        problems.append(f"all literal ports away still extends: {_fmt_witness(table[ALL_AWAY])}")
    for pattern in PATTERNS:
        if pattern != ALL_AWAY and table[pattern] is None:
            problems.append(f"pattern {' '.join(s.token for s in pattern)} has no extension")
    return Verification(not problems, problems, [w for w in table.values() if w is not None]), table


def verify_gadget(template: GadgetTemplate | PortedInstance, kind: Optional[str] = None,
                  budget: int = DEFAULT_BUDGET) -> Verification:
    """Run every oracle check for the template's kind and report all violations."""
    if isinstance(template, GadgetTemplate):
        sub, kind = template.sub, template.kind
    else:
        sub = template
    if kind == "variable":
        return _verify_variable(sub, budget)[0]
    if kind == "clause":
        return _verify_clause(sub, budget)[0]
    raise ValueError(f"unknown gadget kind {kind!r}")


class GadgetRejected(ValueError):
    def __init__(self, kind: str, verification: Verification):
        super().__init__(f"{kind} gadget rejected: {verification.report()}")
        self.verification = verification


def build_template(sub: PortedInstance, kind: str, budget: int = DEFAULT_BUDGET) -> GadgetTemplate:
    """Verify ``sub`` and attach its canonical orientations / extension table."""
    if kind == "variable":
        ver, canon = _verify_variable(sub, budget)
        if not ver:
            raise GadgetRejected(kind, ver)
        return GadgetTemplate(sub, kind, canonical=canon)
    if kind == "clause":
        ver, table = _verify_clause(sub, budget)
        if not ver:
            raise GadgetRejected(kind, ver)
        return GadgetTemplate(sub, kind, extension_table=table)
    raise ValueError(f"unknown gadget kind {kind!r}")


# ---------------------------------------------------------------- store


def default_store_path() -> Path:
    env = os.environ.get(STORE_ENV)
    if env:
        return Path(env)
    local = Path("gadgets")
    if local.is_dir():
        return local
    return Path(str(resources.files("orientforge") / "store"))


@dataclass
class GadgetStore:
    """Verified templates loaded from a directory of ``*.gadget`` files.

    Files that fail verification are kept in ``rejected`` (name -> report)
    instead of aborting the load.
    """

    path: Optional[Path] = None
    variables: dict[int, GadgetTemplate] = field(default_factory=dict)
    clause: Optional[GadgetTemplate] = None
    rejected: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path: Optional[os.PathLike] = None, budget: int = DEFAULT_BUDGET) -> "GadgetStore":
        root = Path(path) if path is not None else default_store_path()
        store = cls(root)
        if not root.is_dir():
            return store
        for file in sorted(root.glob("*.gadget")):
            try:
                sub, kind = formats.parse_gadget(file.read_text(encoding="utf-8"))
                tmpl = build_template(sub, kind, budget)
            except (formats.FormatError, GadgetRejected) as exc:
                store.rejected[file.name] = str(exc)
                continue
            except BudgetExceeded as exc:
                store.rejected[file.name] = f"verification unfinished: {exc}"
                continue
            if kind == "clause":
                store.clause = tmpl
            elif file.stem != f"var_m{tmpl.m}":
                store.rejected[file.name] = f"file name does not match m={tmpl.m}"
            else:
                store.variables[tmpl.m] = tmpl
        return store

    def variable_gadget(self, m: int) -> GadgetTemplate:
        if m not in self.variables:
            raise NotInStore(m)
        return self.variables[m]

    @property
    def max_m(self) -> int:
        return max(self.variables, default=0)

    def add(self, template: GadgetTemplate, write: bool = True) -> Path:
        if template.kind != "variable":
            raise ValueError("only variable gadgets are added by m")
        self.variables[template.m] = template
        if self.path is None:
            raise ValueError("store has no directory")
        self.path.mkdir(parents=True, exist_ok=True)
        target = self.path / f"var_m{template.m}.gadget"
        if write:
            target.write_text(formats.write_gadget(template.sub, "variable"), encoding="utf-8")
        return target


def write_default_store(path: os.PathLike, ms: Sequence[int] = (1, 2, 3)) -> None:
    """Write the built-in templates (single edge for m=1, rings above) plus the clause gadget."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for m in ms:
        sub = single_edge_variable_gadget() if m == 1 else ring_variable_gadget(m)
        (root / f"var_m{m}.gadget").write_text(formats.write_gadget(sub, "variable"), encoding="utf-8")
    (root / "clause.gadget").write_text(formats.write_gadget(clause_gadget().sub, "clause"), encoding="utf-8")


# ---------------------------------------------------------------- mirroring


def mirror_complete(sub: PortedInstance) -> PartialOrientationInstance:
    """Close off every port by adding the mirrored copy of the construction.

    Layout of the result, with n vertices, E edges and P ports in ``sub``:
    vertex ``v + n`` mirrors ``v`` (rho and delta swapped), edge ``e + E``
    mirrors edge ``e``, and edge ``2E + p`` joins port p's vertex to its
    mirror (one edge per port).
    """
    if not sub.ports:
        raise ValueError("mirror completion needs at least one port")
    g = sub.graph
    n = g.num_vertices
    edges = list(g.edges)
    edges += [(a + n, b + n) for a, b in g.edges]
    edges += [(p.vertex, p.vertex + n) for p in sub.ports]
    specs = list(sub.specs) + [s.mirrored() for s in sub.specs]
    return PartialOrientationInstance(Multigraph(2 * n, edges), specs)


def close_with_pendants(sub: PortedInstance, port_states: Sequence[EdgeState]) -> PartialOrientationInstance:
    """Materialise each port as an edge to a fresh leaf typed to accept ``port_states``.

    Port p becomes edge ``E + p`` from its vertex to leaf ``n + p``, so the
    closed instance is oriented by the internal states followed by the
    port states.
    """
    g = sub.graph
    n = g.num_vertices
    edges = list(g.edges) + [(p.vertex, n + i) for i, p in enumerate(sub.ports)]
    leaf = {FWD: DegreeSpec(1, 0, 0), BWD: DegreeSpec(0, 1, 0), UND: DegreeSpec(0, 0, 1)}
    specs = list(sub.specs) + [leaf[st] for st in port_states]
    return PartialOrientationInstance(Multigraph(n + len(sub.ports), edges), specs)


def mirror_orientation(edge_states: Sequence[EdgeState], port_states: Sequence[EdgeState]) -> dict[int, EdgeState]:
    """Extend a primal orientation to the mirror-completed instance.

    Mirror edges take the reversed primal state; each port edge keeps the
    state the port had at its primal vertex.
    """
    num_edges = len(edge_states)
    out = {e: st for e, st in enumerate(edge_states)}
    out.update({e + num_edges: st.reversed() for e, st in enumerate(edge_states)})
    out.update({2 * num_edges + p: st for p, st in enumerate(port_states)})
    return out
