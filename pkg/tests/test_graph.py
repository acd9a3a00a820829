import pytest
from hypothesis import given, strategies as st

from orientforge.gadgets import ALL_AWAY, PATTERNS, clause_gadget, close_with_pendants
from orientforge.graph import (
    DegreeSpec,
    EdgeState,
    MedepInstance,
    MissingEdgeState,
    Multigraph,
    PartialOrientationInstance,
    PathPacking,
    PathTriple,
    SelfLoopError,
    UnknownEdge,
    check_orientation,
    check_packing,
    is_simple,
    vertex_counts,
)

FWD, BWD, UND = EdgeState.FORWARD, EdgeState.BACKWARD, EdgeState.UNDIRECTED


def test_self_loop_rejected():
    with pytest.raises(SelfLoopError):
        Multigraph(2, [(1, 1)])


def test_degrees_count_parallel_edges():
    g = Multigraph(3, [(0, 1), (0, 1), (1, 2)])
    assert g.degrees() == [2, 3, 1]


def test_degree_spec_labels():
    assert DegreeSpec(1, 1, 3).label == "ρδθθθ"
    assert DegreeSpec(1, 0, 1).label == "ρθ"
    assert DegreeSpec(0, 1, 1).mirrored() == DegreeSpec(1, 0, 1)


def test_f1_forward_is_valid(f1):
    assert check_orientation(f1, {0: FWD})


def test_f1_undirected_names_u(f1):
    res = check_orientation(f1, {0: UND})
    assert not res
    assert res.vertex == 0 and res.kind == "out"
    assert "out-count 0 != 1" in res.reason


def test_f1_backward_invalid(f1):
    res = check_orientation(f1, {0: BWD})
    assert not res and res.vertex == 0


def test_missing_and_unknown_edges(f1):
    with pytest.raises(MissingEdgeState):
        check_orientation(f1, {})
    with pytest.raises(UnknownEdge):
        check_orientation(f1, {0: FWD, 5: FWD})


def test_clause_gadget_closed_all_toward_valid():
    tmpl = clause_gadget()
    ext = tmpl.extension_table[(BWD, BWD, BWD)]
    closed = close_with_pendants(tmpl.sub, ext.ports)
    states = {e: s for e, s in enumerate(ext.edges + ext.ports)}
    assert check_orientation(closed, states)


def test_clause_gadget_closed_every_extension_valid():
    tmpl = clause_gadget()
    for pattern in PATTERNS:
        ext = tmpl.extension_table[pattern]
        if pattern == ALL_AWAY:
            assert ext is None
            continue
        closed = close_with_pendants(tmpl.sub, ext.ports)
        assert check_orientation(closed, dict(enumerate(ext.edges + ext.ports)))


@given(st.data())
def test_valid_orientation_balances_in_and_out(data):
    n = data.draw(st.integers(2, 5))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1])
    edges = data.draw(st.lists(pairs, max_size=8))
    g = Multigraph(n, edges)
    states = {e: data.draw(st.sampled_from(list(EdgeState))) for e in range(len(edges))}
    counts = vertex_counts(g, states)
    inst = PartialOrientationInstance(g, [DegreeSpec(*c) for c in counts])
    # degree triples read off an orientation always accept it, and the sums balance
    assert check_orientation(inst, states)
    directed = sum(s is not UND for s in states.values())
    assert inst.total_rho == inst.total_delta == directed


def test_f3_packing_valid(f3):
    assert check_packing(f3, PathPacking((PathTriple(0, 1, 2, 1, 2),)))


def test_f3_packing_edge_reuse():
    inst = MedepInstance(Multigraph(4, [(0, 1), (1, 2), (2, 3)]), 0, 3, 2)
    p = PathTriple(0, 1, 2, 1, 2)
    res = check_packing(inst, PathPacking((p, p)))
    assert not res and res.kind == "EdgeReuse"


def test_f3_inner_u_equal_t(f3):
    res = check_packing(f3, PathPacking((PathTriple(0, 1, 2, 3, 2),)))
    assert not res and res.kind == "EndpointMismatch"


def test_packing_wrong_count(f3):
    res = check_packing(f3, PathPacking(()))
    assert not res and res.kind == "Count"


def test_packing_unknown_edge(f3):
    with pytest.raises(UnknownEdge):
        check_packing(f3, PathPacking((PathTriple(0, 1, 9, 1, 2),)))


def test_packing_from_edge_triples(f3):
    packing = PathPacking.from_edge_triples(f3, [(0, 1, 2)])
    assert packing.paths[0] == PathTriple(0, 1, 2, 1, 2)
    assert packing.edge_triples() == [(0, 1, 2)]


def test_medep_instance_validation():
    g = Multigraph(2, [(0, 1)])
    with pytest.raises(ValueError):
        MedepInstance(g, 0, 0, 1)
    with pytest.raises(ValueError):
        MedepInstance(g, 0, 1, 0)


def test_is_simple(f3):
    assert is_simple(f3.graph)
    rep = is_simple(Multigraph(3, [(0, 1), (1, 2), (1, 0)]))
    assert not rep and rep.parallel_pairs == ((0, 2),)
