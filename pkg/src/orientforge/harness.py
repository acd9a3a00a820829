"""Seeded generators and the equivalence experiments behind the acceptance report."""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .formats import CnfFormula
from .gadgets import (
    ALL_AWAY,
    PATTERNS,
    GadgetStore,
    clause_gadget,
    ring_variable_gadget,
    single_edge_variable_gadget,
    verify_gadget,
)
from .graph import (
    DegreeSpec,
    EdgeState,
    Multigraph,
    PartialOrientationInstance,
    Polarity,
    Port,
    PortedInstance,
    check_orientation,
    check_packing,
    is_simple,
)
from .oracle import (
    BudgetExceeded,
    PortConstraint,
    Status,
    enumerate_orientations,
    solve_medep,
    solve_po,
    solve_sat_bruteforce,
)
from .reductions import (
    TriviallyInfeasible,
    bound_occurrences,
    decode_orientation,
    encode_assignment,
    orientation_to_packing,
    packing_to_orientation,
    po_to_medep,
    sat_to_po,
)


class InfeasibleCap(ValueError):
    pass


def derive_seed(root: int, *path: int) -> int:
    """Child seed for the instance at ``path`` under ``root`` (counted splitting)."""
    ss = np.random.SeedSequence(root, spawn_key=tuple(path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def gen_random_cnf(num_vars: int, num_clauses: int, seed: int,
                   occurrence_cap: Optional[int] = None) -> CnfFormula:
    """Uniform random 3-CNF; ``occurrence_cap`` bounds each literal's count.

    With a cap, every draw is made uniformly among the literals that still
    have room, which is rejection sampling one literal at a time.
    """
    if num_vars < 1:
        raise ValueError("need at least one variable")
    if occurrence_cap is not None and 2 * occurrence_cap * num_vars < 3 * num_clauses:
        raise InfeasibleCap(
            f"{num_vars} variables with at most {occurrence_cap} occurrences per polarity "
            f"cannot fill {num_clauses} clauses"
        )
    rng = _rng(seed)
    literals = [v for v in range(1, num_vars + 1)] + [-v for v in range(1, num_vars + 1)]
    used = {lit: 0 for lit in literals}
    clauses = []
    for _ in range(num_clauses):
        clause = []
        for _ in range(3):
            pool = literals if occurrence_cap is None else [l for l in literals if used[l] < occurrence_cap]
            lit = pool[int(rng.integers(len(pool)))]
            used[lit] += 1
            clause.append(lit)
        clauses.append(tuple(clause))
    return CnfFormula(num_vars, tuple(clauses))


def gen_random_po(num_vertices: int, num_edges: int, max_rho: int, max_delta: int, seed: int,
                  planted: bool = False) -> PartialOrientationInstance:
    """Random multigraph with sampled degree triples.

    Unplanted: rho and delta are drawn per vertex and theta fills the rest,
    resampling a bounded number of times before clamping.  Planted: a random
    orientation is drawn (edges that would break the caps become undirected)
    and the triples are read off it, so the instance is solvable.
    """
    rng = _rng(seed)
    if num_edges and num_vertices < 2:
        raise ValueError("edges need at least two vertices")
    edges = []
    for _ in range(num_edges):
        a = int(rng.integers(num_vertices))
        b = int(rng.integers(num_vertices - 1))
        edges.append((a, b + (b >= a)))
    graph = Multigraph(num_vertices, edges)
    deg = graph.degrees()
    specs = []
    if planted:
        counts = [[0, 0, 0] for _ in range(num_vertices)]
        for a, b in edges:
            st = int(rng.integers(3))
            if st == 0 and counts[a][1] < max_delta and counts[b][0] < max_rho:
                counts[a][1] += 1
                counts[b][0] += 1
            elif st == 1 and counts[a][0] < max_rho and counts[b][1] < max_delta:
                counts[a][0] += 1
                counts[b][1] += 1
            else:
                counts[a][2] += 1
                counts[b][2] += 1
        specs = [DegreeSpec(*c) for c in counts]
    else:
        for v in range(num_vertices):
            for _ in range(16):
                r = int(rng.integers(max_rho + 1))
                d = int(rng.integers(max_delta + 1))
                if r + d <= deg[v]:
                    break
            else:
                r = min(r, deg[v])
                d = min(d, deg[v] - r)
            specs.append(DegreeSpec(r, d, deg[v] - r - d))
    return PartialOrientationInstance(graph, specs)


def perturb_balanced(instance: PartialOrientationInstance, seed: int) -> PartialOrientationInstance:
    """Move one unit of rho from one vertex to another, trading it against theta.

    Degree sums stay equal, so the result survives the trivial sum test
    while usually losing its planted solution.
    """
    rng = _rng(seed)
    specs = list(instance.specs)
    donors = [v for v, s in enumerate(specs) if s.rho > 0]
    takers = [v for v, s in enumerate(specs) if s.theta > 0]
    pairs = [(a, b) for a in donors for b in takers if a != b]
    if not pairs:
        return instance
    a, b = pairs[int(rng.integers(len(pairs)))]
    specs[a] = DegreeSpec(specs[a].rho - 1, specs[a].delta, specs[a].theta + 1)
    specs[b] = DegreeSpec(specs[b].rho + 1, specs[b].delta, specs[b].theta - 1)
    return PartialOrientationInstance(instance.graph, specs)


def _equivalence_instance(seed: int, i: int) -> PartialOrientationInstance:
    kind = i % 3
    inst = gen_random_po(6, 8, 2, 2, seed, planted=kind != 0)
    return perturb_balanced(inst, seed + 1) if kind == 2 else inst


# ---------------------------------------------------------------- experiments


@dataclass
class ExperimentConfig:
    seed: int = 8128
    store: Optional[str] = None
    properties: Optional[list] = None
    oracle_agreement_instances: int = 200
    equivalence_instances: int = 100
    simplicity_formulas: int = 20
    sat_side_formulas: int = 50
    round_trip_instances: int = 25
    node_budget: int = 10**8
    sat_side_seconds: float = 5.0
    unsat_side_seconds: float = 600.0
    timings: bool = False

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


@dataclass
class PropertyOutcome:
    name: str
    instances: int = 0
    passes: int = 0
    failures: int = 0
    budget_exceeded: int = 0
    seconds: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.budget_exceeded == 0 and self.instances > 0

    def ok(self) -> None:
        self.instances += 1
        self.passes += 1

    def fail(self, note: str) -> None:
        self.instances += 1
        self.failures += 1
        self.notes.append(note)

    def over_budget(self, note: str) -> None:
        self.instances += 1
        self.budget_exceeded += 1
        self.notes.append(note)

    def check(self, cond: bool, note: str) -> None:
        if cond:
            self.ok()
        else:
            self.fail(note)


@dataclass
class Report:
    outcomes: list[PropertyOutcome]
    config: ExperimentConfig

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def to_text(self) -> str:
        lines = [f"orientforge equivalence report (seed {self.config.seed})"]
        for o in self.outcomes:
            verdict = "PASS" if o.passed else "FAIL"
            lines.append(
                f"{verdict} {o.name}: instances={o.instances} passes={o.passes} "
                f"failures={o.failures} budget_exceeded={o.budget_exceeded}"
            )
            lines += [f"    {note}" for note in o.notes]
        total_fail = sum(not o.passed for o in self.outcomes)
        lines.append(f"summary: {len(self.outcomes) - total_fail} passed, {total_fail} failed")
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        rows = ["property\tinstances\tpasses\tfailures\tbudget_exceeded\tseconds"]
        for o in self.outcomes:
            secs = f"{o.seconds:.3f}" if self.config.timings else "-"
            rows.append(f"{o.name}\t{o.instances}\t{o.passes}\t{o.failures}\t{o.budget_exceeded}\t{secs}")
        return "\n".join(rows) + "\n"

    def write(self, directory) -> None:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(self.to_text(), encoding="utf-8")
        (out / "report.tsv").write_text(self.to_tsv(), encoding="utf-8")


def _prop_gadget_integrity(cfg: ExperimentConfig, out: PropertyOutcome, store: GadgetStore) -> None:
    for name, why in sorted(store.rejected.items()):
        out.fail(f"template {name} rejected: {why.splitlines()[0]}")
    for m in (1, 2, 3):
        if m in store.variables:
            ver = verify_gadget(store.variables[m], budget=cfg.node_budget)
            out.check(bool(ver), f"template var_m{m}.gadget: {ver.report()}")
        else:
            out.fail(f"template var_m{m}.gadget missing from store {store.path}")


def clause_pattern_counts(sub: PortedInstance, cap: int = 16) -> dict:
    """Extension count per literal pattern, bottoms free."""
    counts = {}
    for pattern in PATTERNS:
        cons = {pid: (PortConstraint.MUST_BE_AWAY if st is EdgeState.FORWARD else PortConstraint.MUST_BE_TOWARD)
                for pid, st in enumerate(pattern)}
        counts[pattern] = enumerate_orientations(sub, cons, cap=cap).count
    return counts


def permuted_clause(perm: tuple[int, int, int]) -> PortedInstance:
    """Clause gadget with the (e_i, v_i, v_ii) triples relabelled by ``perm``."""
    base = clause_gadget().sub
    vmap = {i: perm[i] for i in range(3)}
    vmap.update({3 + i: 3 + perm[i] for i in range(3)})
    vmap[6] = 6
    edges = [(vmap[a], vmap[b]) for a, b in base.graph.edges]
    specs = [None] * 7
    for v, s in enumerate(base.specs):
        specs[vmap[v]] = s
    ports = [None] * 7
    for pid, p in enumerate(base.ports):
        new_pid = perm[pid] if pid < 3 else 3 + perm[pid - 3] if pid < 6 else 6
        ports[new_pid] = Port(vmap[p.vertex], p.polarity)
    return PortedInstance(PartialOrientationInstance(Multigraph(7, edges), specs), ports)


def _prop_clause_table(cfg: ExperimentConfig, out: PropertyOutcome) -> None:
    counts = clause_pattern_counts(clause_gadget().sub)
    for pattern, c in counts.items():
        tag = " ".join(s.token for s in pattern)
        if pattern == ALL_AWAY:
            out.check(c == 0, f"all-away pattern has {c} extensions")
        else:
            out.check(c >= 1, f"pattern {tag} has no extension")
    for perm in itertools.permutations(range(3)):
        pc = clause_pattern_counts(permuted_clause(perm))
        same = all(pc[tuple(p[perm[i]] for i in range(3))] == counts[p] for p in PATTERNS)
        out.check(same, f"extension counts not invariant under permutation {perm}")


def _prop_vg1(cfg: ExperimentConfig, out: PropertyOutcome) -> None:
    sub = single_edge_variable_gadget()
    res = enumerate_orientations(sub)
    out.check(res.count == 2 and not res.capped, f"m=1 gadget has {res.count} orientations")
    ver = verify_gadget(sub, "variable")
    out.check(bool(ver), f"m=1 gadget: {ver.report()}")


def _prop_oracle_agreement(cfg: ExperimentConfig, out: PropertyOutcome) -> None:
    for i in range(cfg.oracle_agreement_instances):
        seed = derive_seed(cfg.seed, 1, i)
        rng = _rng(seed)
        n = int(rng.integers(2, 7))
        m = int(rng.integers(0, 13))
        inst = gen_random_po(n, m, 2, 2, seed, planted=bool(i % 2))
        res = solve_po(inst, budget=cfg.node_budget)
        if res.status is Status.BUDGET_EXCEEDED:
            out.over_budget(f"instance {i}: solve_po budget exceeded")
            continue
        enum = enumerate_orientations(inst, cap=1, budget=cfg.node_budget)
        agree = res.solvable == (enum.count > 0)
        sound = not res.solvable or bool(check_orientation(inst, res.witness))
        out.check(agree and sound, f"instance {i} (seed {seed}): solve_po {res.status.value}, enumeration {enum.count}")


def _prop_po_medep(cfg: ExperimentConfig, out: PropertyOutcome) -> None:
    for i in range(cfg.equivalence_instances):
        seed = derive_seed(cfg.seed, 2, i)
        inst = _equivalence_instance(seed, i)
        po = solve_po(inst, budget=cfg.node_budget)
        reduced = po_to_medep(inst)
        if po.status is Status.BUDGET_EXCEEDED:
            out.over_budget(f"instance {i}: solve_po budget exceeded")
            continue
        note = f"instance {i} (seed {seed})"
        if isinstance(reduced, TriviallyInfeasible):
            if inst.total_rho == inst.total_delta == 0:
                # k would be 0: the only candidate is the all-undirected orientation
                everything_und = {e: EdgeState.UNDIRECTED for e in range(inst.graph.num_edges)}
                out.check(po.solvable == bool(check_orientation(inst, everything_und)), f"{note}: k=0 case disagrees")
            else:
                out.check(not po.solvable, f"{note}: PO solvable but degree sums differ")
            continue
        medep, prov = reduced
        md = solve_medep(medep, budget=cfg.node_budget)
        if md.status is Status.BUDGET_EXCEEDED:
            out.over_budget(f"{note}: solve_medep budget exceeded")
            continue
        if po.solvable != md.solvable:
            out.fail(f"{note}: PO {po.status.value} but MEDEP {md.status.value}")
            continue
        if po.solvable:
            packing = orientation_to_packing(po.witness, inst, prov)
            back = packing_to_orientation(md.witness, inst, prov)
            ok = (bool(check_packing(medep, packing)) and bool(check_packing(medep, md.witness))
                  and bool(check_orientation(inst, back)) and bool(check_orientation(inst, po.witness)))
            out.check(ok, f"{note}: witness translation failed a checker")
        else:
            out.ok()


def _simplicity_formula(cfg: ExperimentConfig, i: int) -> CnfFormula:
    seed = derive_seed(cfg.seed, 3, i)
    rng = _rng(seed)
    nv = int(rng.integers(1, 5))
    nc = int(rng.integers(1, 5))
    return bound_occurrences(gen_random_cnf(nv, nc, seed), 3)


def _prop_simplicity(cfg: ExperimentConfig, out: PropertyOutcome, store: GadgetStore) -> None:
    for i in range(cfg.simplicity_formulas):
        formula = _simplicity_formula(cfg, i)
        inst, _ = sat_to_po(formula, store)
        bound = all(s.rho <= 1 and s.delta <= 1 for s in inst.specs)
        reduced = po_to_medep(inst)
        if isinstance(reduced, TriviallyInfeasible):
            out.fail(f"formula {i}: reduction output has {reduced.reason}")
            continue
        simple = is_simple(reduced[0].graph)
        out.check(bound and bool(simple) and bool(is_simple(inst.graph)),
                  f"formula {i}: degree bound {bound}, parallel pairs {simple.parallel_pairs[:3]}")


def _prop_sat_side(cfg: ExperimentConfig, out: PropertyOutcome, store: GadgetStore) -> None:
    for i in range(cfg.sat_side_formulas):
        seed = derive_seed(cfg.seed, 4, i)
        rng = _rng(seed)
        nv = int(rng.integers(2, 5))
        # one occurrence per polarity leaves room for 2 * nv literals
        nc = int(rng.integers(1, min(2, 2 * nv // 3) + 1))
        formula = gen_random_cnf(nv, nc, seed, occurrence_cap=1)
        note = f"formula {i} {formula.clauses}"
        inst, prov = sat_to_po(formula, store)
        sat = solve_sat_bruteforce(formula)
        po = solve_po(inst, budget=cfg.node_budget, time_limit=cfg.sat_side_seconds)
        if po.status is Status.BUDGET_EXCEEDED:
            out.over_budget(f"{note}: solve_po over budget")
            continue
        if sat.solvable:
            enc = encode_assignment(formula, sat.witness, prov)
            ok = bool(check_orientation(inst, enc)) and po.solvable
            if ok:
                ok = formula.satisfied_by(decode_orientation(po.witness, prov))
            out.check(ok, f"{note}: satisfiable but PO side failed")
        else:
            out.check(po.status is Status.UNSOLVABLE, f"{note}: unsatisfiable but PO {po.status.value}")


def _prop_unsat_side(cfg: ExperimentConfig, out: PropertyOutcome, store: GadgetStore) -> None:
    formula = CnfFormula(1, ((1, 1, 1), (-1, -1, -1)))
    inst, prov = sat_to_po(formula, store)
    used_m = prov.sat.variables[0].m
    po = solve_po(inst, budget=cfg.node_budget, time_limit=cfg.unsat_side_seconds)
    if po.status is Status.BUDGET_EXCEEDED:
        out.over_budget("(x|x|x)&(-x|-x|-x): solve_po over budget")
    else:
        out.check(po.status is Status.UNSOLVABLE and used_m == 3,
                  f"(x|x|x)&(-x|-x|-x) with m={used_m}: {po.status.value}")


def _prop_round_trips(cfg: ExperimentConfig, out: PropertyOutcome, store: GadgetStore) -> None:
    formula = CnfFormula(3, ((1, 2, 3),))
    inst, prov = sat_to_po(formula, store)
    for bits in itertools.product((False, True), repeat=3):
        a = {1: bits[0], 2: bits[1], 3: bits[2]}
        if not formula.satisfied_by(a):
            continue
        enc = encode_assignment(formula, a, prov)
        out.check(bool(check_orientation(inst, enc)) and decode_orientation(enc, prov) == a,
                  f"(x|y|z) assignment {a} does not round-trip")
    for i in range(cfg.round_trip_instances):
        seed = derive_seed(cfg.seed, 5, i)
        rng = _rng(seed)
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 7))
        po_inst = gen_random_po(n, m, 1, 1, seed, planted=True)
        reduced = po_to_medep(po_inst)
        enum = enumerate_orientations(po_inst, cap=10**6, budget=cfg.node_budget)
        if isinstance(reduced, TriviallyInfeasible):
            # no directed demand: the only orientation is all-undirected
            out.check(enum.count == 1 and all(s is EdgeState.UNDIRECTED for s in enum.witnesses[0].edges),
                      f"po instance {i}: k=0 instance has {enum.count} orientations")
            continue
        medep, mprov = reduced
        ok = True
        for w in enum.witnesses:
            o = w.edge_orientation()
            packing = orientation_to_packing(o, po_inst, mprov)
            back = packing_to_orientation(packing, po_inst, mprov)
            ok &= bool(check_packing(medep, packing)) and back == o
        out.check(ok and enum.count > 0, f"po instance {i} (seed {seed}): packing/orientation round trip broke")


PROPERTIES: dict[str, Callable] = {
    "gadget_integrity": _prop_gadget_integrity,
    "clause_truth_table": _prop_clause_table,
    "variable_gadget_m1": _prop_vg1,
    "oracle_agreement": _prop_oracle_agreement,
    "po_medep_equivalence": _prop_po_medep,
    "simplicity": _prop_simplicity,
    "sat_side": _prop_sat_side,
    "unsat_side": _prop_unsat_side,
    "round_trips": _prop_round_trips,
}
_NEEDS_STORE = {"gadget_integrity", "simplicity", "sat_side", "unsat_side", "round_trips"}


def run_equivalence_experiments(config: Optional[ExperimentConfig] = None,
                                store: Optional[GadgetStore] = None) -> Report:
    """Run each configured property; outcomes are listed in a fixed order."""
    cfg = config or ExperimentConfig()
    names = cfg.properties or list(PROPERTIES)
    unknown = [n for n in names if n not in PROPERTIES]
    if unknown:
        raise ValueError(f"unknown properties: {unknown}")
    if store is None:
        store = GadgetStore.load(cfg.store)
    outcomes = []
    for name in names:
        out = PropertyOutcome(name)
        start = time.perf_counter()
        try:
            if name in _NEEDS_STORE:
                PROPERTIES[name](cfg, out, store)
            else:
                PROPERTIES[name](cfg, out)
        except BudgetExceeded as exc:
            out.over_budget(f"aborted: {exc}")
        except Exception as exc:  # a crashing property is a failing property
            out.fail(f"aborted: {type(exc).__name__}: {exc}")
        out.seconds = time.perf_counter() - start
        outcomes.append(out)
    return Report(outcomes, cfg)
