"""Command-line entry point: ``orientforge <group> <action> ...``.

Exit status: 0 yes/success, 1 no/infeasible/property failure, 2 input or
usage error, 3 budget exceeded.  Verdicts and generated data go to stdout,
diagnostics to stderr, certificates and provenance only to files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import formats
from .gadgets import GadgetRejected, GadgetStore, NotInStore, verify_gadget
from .graph import GraphError, PathPacking, check_orientation, check_packing, is_simple
from .harness import ExperimentConfig, InfeasibleCap, gen_random_cnf, gen_random_po, run_equivalence_experiments
from .oracle import DEFAULT_BUDGET, BudgetExceeded, Status, enumerate_orientations, solve_medep, solve_po, solve_sat_bruteforce
from .reductions import (
    GadgetUnavailable,
    ProvenanceMap,
    TriviallyInfeasible,
    bound_occurrences,
    po_to_medep,
    sat_to_po,
)
from .synth import default_alphabet, tree_alphabet, synth_gadget

OK, NO, INPUT_ERROR, OVER_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one line instead of argparse's usage dump
        raise UsageError(message)


def _err(msg: str) -> None:
    print(f"orientforge: {msg}", file=sys.stderr)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- reduce


def _sat2po(args):
    formula = bound_occurrences(formats.parse_cnf(_read(args.input)), args.max_occ)
    return sat_to_po(formula, GadgetStore.load())


def _po2medep(instance, require_simple: bool):
    reduced = po_to_medep(instance)
    if isinstance(reduced, TriviallyInfeasible):
        _err(reduced.reason)
        return None, NO
    medep, prov = reduced
    if require_simple:
        report = is_simple(medep.graph)
        if not report:
            a, b = report.parallel_pairs[0]
            _err(f"--require-simple: output edges {a} and {b} are parallel")
            return None, INPUT_ERROR
    return (medep, prov), OK


def cmd_reduce(args) -> int:
    if args.action == "sat2po":
        inst, prov = _sat2po(args)
        _write(args.out, formats.write_po(inst))
        _write(args.prov, prov.to_text())
        return OK
    if args.action == "po2medep":
        inst = formats.parse_po(_read(args.input))
        result, status = _po2medep(inst, args.require_simple)
        if result is None:
            return status
        medep, prov = result
        _write(args.out, formats.write_medep(medep))
        _write(args.prov, prov.to_text())
        return OK
    # sat2smedep: both steps, one provenance file holding both maps
    inst, sat_prov = _sat2po(args)
    if args.po_out:
        _write(args.po_out, formats.write_po(inst))
    result, status = _po2medep(inst, args.require_simple)
    if result is None:
        return status
    medep, medep_prov = result
    _write(args.out, formats.write_medep(medep))
    _write(args.prov, ProvenanceMap(sat_prov.sat, medep_prov.medep).to_text())
    return OK


# ---------------------------------------------------------------- solve / verify


def cmd_solve(args) -> int:
    if args.problem == "sat":
        res = solve_sat_bruteforce(formats.parse_cnf(_read(args.input)))
        cert = None
        if res.solvable:
            lits = [v if val else -v for v, val in sorted(res.witness.items())]
            cert = "v " + " ".join(map(str, lits)) + " 0\n"
    elif args.problem == "po":
        res = solve_po(formats.parse_po(_read(args.input)), budget=args.budget, time_limit=args.time_limit)
        cert = formats.write_orientation(res.witness) if res.solvable else None
    else:
        res = solve_medep(formats.parse_medep(_read(args.input)), budget=args.budget, time_limit=args.time_limit)
        cert = formats.write_packing(res.witness) if res.solvable else None
    if res.status is Status.BUDGET_EXCEEDED:
        print("UNKNOWN")
        _err(f"budget exceeded after {res.nodes} nodes")
        return OVER_BUDGET
    print("YES" if res.solvable else "NO")
    if cert is not None and args.cert:
        _write(args.cert, cert)
    return OK if res.solvable else NO


def cmd_verify(args) -> int:
    if args.kind == "orientation":
        inst = formats.parse_po(_read(args.input))
        result = check_orientation(inst, formats.parse_orientation(_read(args.cert)))
    else:
        inst = formats.parse_medep(_read(args.input))
        packing = PathPacking.from_edge_triples(inst, formats.parse_packing(_read(args.cert)))
        result = check_packing(inst, packing)
    if result:
        print("VALID")
        return OK
    print("INVALID")
    _err(result.reason)
    return NO


# ---------------------------------------------------------------- gadgets


def _show(sub, kind: str) -> str:
    lines = [f"kind {kind}: {sub.graph.num_vertices} vertices, {sub.graph.num_edges} edges, {len(sub.ports)} ports"]
    for v, spec in enumerate(sub.specs):
        ports = ", ".join(f"port {pid} {sub.ports[pid].polarity.value}" for pid in sub.ports_at(v))
        lines.append(f"  vertex {v} {spec.label}" + (f" [{ports}]" if ports else ""))
    for e, (a, b) in enumerate(sub.graph.edges):
        lines.append(f"  edge {e}: {a} - {b}")
    res = enumerate_orientations(sub)
    lines.append(f"orientations with ports free: {res.count}{' (capped)' if res.capped else ''}")
    for w in res.witnesses:
        ports = " ".join(s.token for s in w.ports)
        edges = " ".join(s.token for s in w.edges)
        lines.append(f"  ports [{ports}] edges [{edges}]")
    return "\n".join(lines) + "\n"


def cmd_gadget(args) -> int:
    if args.action == "synth":
        alphabet = tree_alphabet() if args.alphabet == "tree" else default_alphabet()
        res = synth_gadget(args.t, args.f, args.max_vertices, alphabet, args.budget)
        if res.status == "budget-exceeded":
            _err(f"budget exceeded after {res.candidates} candidates")
            return OVER_BUDGET
        if not res.found:
            print("NOT FOUND")
            _err(f"no gadget with {args.t} t-ports and {args.f} f-ports within {args.max_vertices} vertices")
            return NO
        _write(args.out, formats.write_gadget(res.template.sub, "variable"))
        print(f"FOUND {res.template.sub.graph.num_vertices} vertices after {res.candidates} candidates")
        return OK
    sub, kind = formats.parse_gadget(_read(args.template))
    if args.action == "show":
        sys.stdout.write(_show(sub, kind))
        return OK
    ver = verify_gadget(sub, kind, budget=args.budget)
    print("VERIFIED" if ver else "REJECTED")
    if not ver:
        _err(ver.report())
    return OK if ver else NO


# ---------------------------------------------------------------- gen / experiment


def cmd_gen(args) -> int:
    if args.kind == "cnf":
        formula = gen_random_cnf(args.vars, args.clauses, args.seed, args.occurrence_cap)
        _emit(formats.write_cnf(formula), args.out)
    else:
        inst = gen_random_po(args.vertices, args.edges, args.max_rho, args.max_delta, args.seed, args.planted)
        _emit(formats.write_po(inst), args.out)
    return OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    if args.timings:
        cfg.timings = True
    report = run_equivalence_experiments(cfg)
    report.write(args.out)
    sys.stdout.write(report.to_text())
    if any(o.failures for o in report.outcomes):
        return NO
    if not report.passed:
        return OVER_BUDGET
    return OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="orientforge", description="3-SAT / partial orientation / MEDEP reduction workbench")
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    red = sub.add_parser("reduce", help="run a reduction")
    red_sub = red.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("sat2po", "po2medep", "sat2smedep"):
        r = red_sub.add_parser(name)
        r.add_argument("--in", dest="input", required=True)
        r.add_argument("--out", required=True)
        r.add_argument("--prov", required=True)
        if name != "po2medep":
            r.add_argument("--max-occ", type=int, default=3)
        if name != "sat2po":
            r.add_argument("--require-simple", action="store_true")
        if name == "sat2smedep":
            r.add_argument("--po-out", help="also write the intermediate PO instance")
    red.set_defaults(func=cmd_reduce)

    sol = sub.add_parser("solve", help="decide an instance exactly")
    sol.add_argument("problem", choices=("po", "medep", "sat"))
    sol.add_argument("--in", dest="input", required=True)
    sol.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sol.add_argument("--time-limit", type=float, default=None)
    sol.add_argument("--cert")
    sol.set_defaults(func=cmd_solve)

    ver = sub.add_parser("verify", help="check a certificate")
    ver.add_argument("kind", choices=("orientation", "packing"))
    ver.add_argument("--in", dest="input", required=True)
    ver.add_argument("--cert", required=True)
    ver.set_defaults(func=cmd_verify)

    gad = sub.add_parser("gadget", help="verify, show or synthesize gadgets")
    gad_sub = gad.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("verify", "show"):
        g = gad_sub.add_parser(name)
        g.add_argument("--template", required=True)
        g.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    syn = gad_sub.add_parser("synth")
    syn.add_argument("--t", type=int, required=True)
    syn.add_argument("--f", type=int, required=True)
    syn.add_argument("--max-vertices", type=int, required=True)
    syn.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    syn.add_argument("--alphabet", choices=("default", "tree"), default="default")
    syn.add_argument("--out", required=True)
    gad.set_defaults(func=cmd_gadget)

    gen = sub.add_parser("gen", help="seeded random instances")
    gen_sub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    cnf = gen_sub.add_parser("cnf")
    cnf.add_argument("--vars", type=int, required=True)
    cnf.add_argument("--clauses", type=int, required=True)
    cnf.add_argument("--occurrence-cap", type=int)
    po = gen_sub.add_parser("po")
    po.add_argument("--vertices", type=int, required=True)
    po.add_argument("--edges", type=int, required=True)
    po.add_argument("--max-rho", type=int, default=1)
    po.add_argument("--max-delta", type=int, default=1)
    po.add_argument("--planted", action="store_true")
    for g in (cnf, po):
        g.add_argument("--seed", type=int, required=True)
        g.add_argument("--out")
    gen.set_defaults(func=cmd_gen)

    exp = sub.add_parser("experiment", help="run the equivalence experiments")
    exp.add_argument("--config")
    exp.add_argument("--out", default=".")
    exp.add_argument("--timings", action="store_true", help="fill the seconds column")
    exp.set_defaults(func=cmd_experiment)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        _err(f"usage error: {exc}")
        return INPUT_ERROR
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        _err(f"budget exceeded: {exc}")
        return OVER_BUDGET
    except (OSError, formats.FormatError, GraphError, InfeasibleCap, GadgetUnavailable,
            NotInStore, GadgetRejected, ValueError) as exc:
        _err(str(exc).splitlines()[0] if str(exc) else type(exc).__name__)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
