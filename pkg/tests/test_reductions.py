import itertools

import pytest
from hypothesis import given, strategies as st

from orientforge.formats import CnfFormula
from orientforge.gadgets import GadgetStore, write_default_store
from orientforge.graph import (
    DegreeSpec,
    EdgeState,
    Multigraph,
    PartialOrientationInstance,
    PathPacking,
    check_orientation,
    check_packing,
    is_simple,
)
from orientforge.harness import derive_seed, gen_random_cnf, gen_random_po
from orientforge.oracle import Status, enumerate_orientations, solve_po, solve_sat_bruteforce
from orientforge.reductions import (
    GadgetUnavailable,
    IncoherentGadgetState,
    NotSatisfying,
    ProvenanceMap,
    TriviallyInfeasible,
    bound_occurrences,
    decode_orientation,
    encode_assignment,
    orientation_to_packing,
    packing_to_orientation,
    po_to_medep,
    sat_to_po,
)

FWD, BWD, UND = EdgeState.FORWARD, EdgeState.BACKWARD, EdgeState.UNDIRECTED
XYZ = CnfFormula(3, ((1, 2, 3),))


def all_assignments(n):
    for bits in itertools.product((False, True), repeat=n):
        yield dict(zip(range(1, n + 1), bits))


# ---------------------------------------------------------------- bound_occurrences


def test_bound_unchanged_when_bounded():
    f = CnfFormula(3, ((1, 2, 3), (-1, -2, 3)))
    assert bound_occurrences(f) is f
    xxx = CnfFormula(1, ((1, 1, 1),))
    assert bound_occurrences(xxx, 3) is xxx


def test_bound_splits_five_occurrences():
    f = CnfFormula(2, ((1, 1, 1), (1, 1, -2), (2, 2, 2)))
    g = bound_occurrences(f, 3)
    assert g.num_vars > f.num_vars
    assert all(p <= 3 and n <= 3 for p, n in g.occurrences().values())
    assert solve_sat_bruteforce(g).solvable == solve_sat_bruteforce(f).solvable


def test_bound_rejects_small_cap():
    with pytest.raises(ValueError):
        bound_occurrences(XYZ, 2)


@given(st.integers(0, 2**32 - 1), st.integers(3, 4))
def test_bound_equisatisfiable(seed, cap):
    f = gen_random_cnf(3, 5, seed)
    g = bound_occurrences(f, cap)
    assert all(p <= cap and n <= cap for p, n in g.occurrences().values())
    sat_f = solve_sat_bruteforce(f)
    sat_g = solve_sat_bruteforce(g)
    assert sat_f.solvable == sat_g.solvable
    if sat_g.solvable:
        # the first copy keeps the original id, so the restriction satisfies f
        assert f.satisfied_by({v: sat_g.witness[v] for v in range(1, f.num_vars + 1)})


# ---------------------------------------------------------------- sat_to_po


def test_xyz_census(store):
    inst, prov = sat_to_po(XYZ, store)
    assert inst.graph.num_vertices == 26
    assert inst.graph.num_edges == 37
    assert is_simple(inst.graph)
    assert all(s.rho <= 1 and s.delta <= 1 for s in inst.specs)
    assert prov.sat.primal_vertices == 13
    assert all(rec.m == 1 for rec in prov.sat.variables)


def test_empty_formula(store):
    inst, prov = sat_to_po(CnfFormula(0, ()), store)
    assert inst.graph.num_vertices == 0
    assert solve_po(inst).solvable
    assert encode_assignment(CnfFormula(0, ()), {}, prov) == {}
    assert check_orientation(inst, {})


def test_gadget_unavailable(tmp_path):
    write_default_store(tmp_path, ms=(1,))
    with pytest.raises(GadgetUnavailable) as exc:
        sat_to_po(CnfFormula(1, ((1, 1, 1),)), GadgetStore.load(tmp_path))
    assert exc.value.m == 3 and exc.value.variable == 1


def test_m_uses_larger_polarity(store):
    f = CnfFormula(2, ((1, 1, -2), (-1, 2, 2)))
    _, prov = sat_to_po(f, store)
    assert [rec.m for rec in prov.sat.variables] == [2, 2]


# ---------------------------------------------------------------- encode / decode


def test_encode_xyz_all_true(store):
    inst, prov = sat_to_po(XYZ, store)
    o = encode_assignment(XYZ, {1: True, 2: True, 3: True}, prov)
    assert check_orientation(inst, o)


def test_encode_not_satisfying(store):
    _, prov = sat_to_po(XYZ, store)
    with pytest.raises(NotSatisfying):
        encode_assignment(XYZ, {1: False, 2: False, 3: False}, prov)


def test_decode_encode_identity_xyz(store):
    inst, prov = sat_to_po(XYZ, store)
    count = 0
    for a in all_assignments(3):
        if XYZ.satisfied_by(a):
            o = encode_assignment(XYZ, a, prov)
            assert check_orientation(inst, o)
            assert decode_orientation(o, prov) == a
            count += 1
    assert count == 7


def test_solver_orientation_decodes(store):
    inst, prov = sat_to_po(XYZ, store)
    res = solve_po(inst)
    assert res.solvable
    a = decode_orientation(res.witness, prov)
    assert XYZ.satisfied_by(a)


def test_flipped_internal_edge_is_invalid(store):
    inst, prov = sat_to_po(XYZ, store)
    o = encode_assignment(XYZ, {1: True, 2: False, 3: False}, prov)
    e = next(iter(prov.sat.variables[0].edges))
    o[e] = o[e].reversed()
    assert not check_orientation(inst, o)


def test_decode_rejects_incoherent_gadget(store):
    _, prov = sat_to_po(XYZ, store)
    o = encode_assignment(XYZ, {1: True, 2: True, 3: True}, prov)
    e = next(iter(prov.sat.variables[0].edges))
    o[e] = UND
    with pytest.raises(IncoherentGadgetState):
        decode_orientation(o, prov)


def test_unsat_formula_unsolvable(store):
    f = CnfFormula(1, ((1, 1, 1), (-1, -1, -1)))
    inst, prov = sat_to_po(f, store)
    assert prov.sat.variables[0].m == 3
    assert solve_po(inst).status is Status.UNSOLVABLE


@pytest.mark.parametrize("index", range(12))
def test_sat_side_small_formulas(store, index):
    seed = derive_seed(99, index)
    f = gen_random_cnf(3, 2, seed, occurrence_cap=1)
    inst, prov = sat_to_po(f, store)
    sat = solve_sat_bruteforce(f)
    res = solve_po(inst)
    assert res.solvable == sat.solvable
    if sat.solvable:
        assert check_orientation(inst, encode_assignment(f, sat.witness, prov))
        assert f.satisfied_by(decode_orientation(res.witness, prov))


def test_every_valid_orientation_decodes(store):
    # exhaustive over the (x|y|z) instance: decode never fails on valid input
    inst, prov = sat_to_po(XYZ, store)
    res = enumerate_orientations(inst, cap=10**6)
    assert res.count > 0 and not res.capped
    decoded = {tuple(sorted(decode_orientation(w.edge_orientation(), prov).items())) for w in res.witnesses}
    sat = {tuple(sorted(a.items())) for a in all_assignments(3) if XYZ.satisfied_by(a)}
    assert decoded == sat


# ---------------------------------------------------------------- provenance


def test_provenance_round_trip(store):
    f = CnfFormula(2, ((1, -2, 2), (-1, -1, 2)))
    inst, prov = sat_to_po(f, store)
    medep, mprov = po_to_medep(inst)
    both = ProvenanceMap(prov.sat, mprov.medep)
    text = both.to_text()
    back = ProvenanceMap.from_text(text)
    assert back == both
    assert back.to_text() == text
    assert back.sat.formula() == f


def test_provenance_owns_every_edge(store):
    f = CnfFormula(3, ((1, 2, -3), (-1, 2, 3)))
    inst, prov = sat_to_po(f, store)
    sp = prov.sat
    owned = []
    for rec in sp.variables:
        owned += list(rec.edges)
    for c in sp.clauses:
        owned += list(c.edges)
        owned += [e for e, sign in c.ports if sign < 0]  # fused literal edges
    owned += [e + sp.primal_edges for e in range(sp.primal_edges)]
    owned += list(sp.links)
    assert sorted(owned) == list(range(inst.graph.num_edges))


def test_provenance_malformed():
    from orientforge.formats import FormatError
    with pytest.raises(FormatError):
        ProvenanceMap.from_text("prov var x\n")


# ---------------------------------------------------------------- PO -> MEDEP


def test_f1_to_f3(f1, f3):
    medep, prov = po_to_medep(f1)
    assert medep == f3
    assert prov.medep.middle == {0: 1}
    packing = orientation_to_packing({0: FWD}, f1, prov)
    assert packing.edge_triples() == [(0, 1, 2)]
    assert packing_to_orientation(packing, f1, prov) == {0: FWD}


def test_trivially_infeasible_sums():
    inst = PartialOrientationInstance(Multigraph(3, [(0, 2), (1, 2)]),
                                      [DegreeSpec(0, 1, 0), DegreeSpec(0, 1, 0), DegreeSpec(1, 0, 1)])
    res = po_to_medep(inst)
    assert isinstance(res, TriviallyInfeasible) and not res
    assert "trivially infeasible" in res.reason


def test_k_zero_is_trivially_infeasible():
    inst = PartialOrientationInstance(Multigraph(2, [(0, 1)]), [DegreeSpec(0, 0, 1)] * 2)
    assert isinstance(po_to_medep(inst), TriviallyInfeasible)
    assert solve_po(inst).solvable  # answered directly at the PO level


def test_zero_caps_all_theta():
    inst = gen_random_po(5, 7, 0, 0, 3)
    assert all(s.rho == s.delta == 0 for s in inst.specs)
    res = solve_po(inst)
    assert res.solvable and set(res.witness.values()) <= {UND}


def test_sat_output_reduces_to_simple(store):
    inst, _ = sat_to_po(XYZ, store)
    medep, _ = po_to_medep(inst)
    assert is_simple(medep.graph)


@given(st.integers(0, 2**32 - 1))
def test_packing_orientation_round_trip(seed):
    inst = gen_random_po(5, 6, 2, 2, seed, planted=True)
    reduced = po_to_medep(inst)
    if not reduced:
        return
    medep, prov = reduced
    for w in enumerate_orientations(inst, cap=64).witnesses:
        o = w.edge_orientation()
        packing = orientation_to_packing(o, inst, prov)
        assert check_packing(medep, packing)
        assert packing_to_orientation(packing, inst, prov) == o
        assert check_orientation(inst, packing_to_orientation(packing, inst, prov))


def test_packing_with_foreign_middle_edge(f1):
    medep, prov = po_to_medep(f1)
    bad = PathPacking.from_edge_triples(medep, [(0, 0, 2)])
    with pytest.raises(ValueError):
        packing_to_orientation(bad, f1, prov)
