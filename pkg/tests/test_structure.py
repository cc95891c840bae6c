import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sparsevine.errors import ConfigError, DomainError, StructureError
from sparsevine.structure import (
    RVineStructure,
    VineEdge,
    allowed_pairs,
    dvine,
    max_spanning_tree,
    validate,
)

E = VineEdge

# five-variable example, 0-based labels
T1 = (E((0, 1)), E((0, 2)), E((2, 4)), E((2, 3)))
T2 = (E((1, 2), (0,)), E((0, 4), (2,)), E((0, 3), (2,)))
T3 = (E((1, 3), (0, 2)), E((3, 4), (0, 2)))
T4 = (E((1, 4), (0, 2, 3)),)
EXAMPLE = RVineStructure(5, (T1, T2, T3, T4))


def test_edge_normalization_and_errors():
    e = E((3, 1), (4, 2))
    assert e.conditioned == (1, 3) and e.conditioning == (2, 4)
    assert e.tree_level == 3
    assert str(e) == "1,3;2,4"
    with pytest.raises(DomainError):
        E((1, 1))
    with pytest.raises(DomainError):
        E((1, 2), (2,))


def test_example_structure_is_valid():
    report = validate(EXAMPLE)
    assert report.valid, report.violations
    assert EXAMPLE.is_complete


def test_mutated_third_tree_is_reported():
    bad = RVineStructure(5, (T1, T2, (E((1, 4), (0, 2)), T3[1]), T4))
    report = validate(bad)
    assert not report.valid
    assert any("not present" in v or "proximity" in v for v in report.violations)


def test_proximity_violation_reported():
    # (1,3;0,2) needs two tree-2 edges sharing a node; (1,2;0) and (0,3;2) share {0,2}.
    # (1,4;0,2) built from (1,2;0) and (0,4;2) would be fine, but joining
    # two tree-1 edges without a common vertex is not
    t2 = (E((1, 2), (0,)), E((0, 4), (2,)), E((3, 4), (2,)))
    bad = RVineStructure(5, (T1, t2))
    assert validate(bad).valid
    t2_bad = (E((1, 4), (0, 2)),)
    report = validate(RVineStructure(5, (T1, t2_bad)))
    assert not report.valid


def test_two_dimensional_structure():
    s = RVineStructure(2, ((E((0, 1)),),))
    assert validate(s).valid


def test_wrong_edge_count_and_cycles():
    s = RVineStructure(4, ((E((0, 1)), E((1, 2)), E((0, 2))),))
    report = validate(s)
    assert not report.valid
    assert any("cycle" in v for v in report.violations)
    s = RVineStructure(4, ((E((0, 1)), E((1, 2))),))
    assert any("expected 3" in v for v in validate(s).violations)


def test_all_violations_listed():
    s = RVineStructure(4, ((E((0, 1)), E((0, 1)), E((0, 9))),))
    assert len(validate(s).violations) >= 2


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_dvine_valid(d):
    assert validate(dvine(d)).valid


def test_parents_and_lookup():
    e = T3[0]
    lo, hi = EXAMPLE.parents(e)
    assert {lo, hi} == {T2[0], T2[2]}
    assert EXAMPLE.parents(T1[0]) == (None, None)
    assert EXAMPLE.edge_by_union(2, frozenset({0, 1, 2})) == T2[0]


def test_dict_round_trip():
    assert RVineStructure.from_dict(EXAMPLE.to_dict()) == EXAMPLE
    with pytest.raises(StructureError):
        RVineStructure.from_dict({"d": 3})


# ---------------------------------------------------------------- spanning trees


def test_mst_three_nodes():
    out = max_spanning_tree([("A", "B", 0.9), ("B", "C", 0.5), ("A", "C", 0.1)], ["A", "B", "C"])
    assert set(out) == {("A", "B"), ("B", "C")}


def test_mst_ties_lexicographic():
    nodes = list(range(4))
    pairs = [(i, j, 0.3) for i, j in itertools.combinations(nodes, 2)]
    assert max_spanning_tree(pairs, nodes) == [(0, 1), (0, 2), (0, 3)]


def test_mst_two_nodes_and_errors():
    assert max_spanning_tree([(0, 1, 0.2)], [0, 1]) == [(0, 1)]
    with pytest.raises(StructureError):
        max_spanning_tree([(0, 1, 0.2), (2, 3, 0.2)], [0, 1, 2, 3])
    with pytest.raises(DomainError):
        max_spanning_tree([(0, 1, 1.5)], [0, 1])


@given(st.integers(3, 6), st.data())
@settings(max_examples=60, deadline=None)
def test_mst_is_maximal(n, data):
    pairs = list(itertools.combinations(range(n), 2))
    w = {p: data.draw(st.floats(0, 1)) for p in pairs}
    out = max_spanning_tree([(a, b, w[(a, b)]) for a, b in pairs], list(range(n)))
    assert len(out) == n - 1
    assert sum(w[p] for p in out) == pytest.approx(oracles.brute_force_mst_weight(n, w), abs=1e-12)


# ---------------------------------------------------------------- allowed pairs


def test_allowed_pairs_tree1_all_pairs():
    s = RVineStructure(6)
    assert len(allowed_pairs(s, 1)) == 15


def test_allowed_pairs_example_tree2():
    cands = {c.edge for c in allowed_pairs(RVineStructure(5, (T1,)), 2)}
    assert E((1, 2), (0,)) in cands
    assert E((0, 3), (2,)) in cands
    # (0,1) and (2,4) share no vertex
    assert all(not (c.conditioning == () or len(c.union) != 3) for c in cands)
    assert len(cands) == 4  # 0-1/0-2, 0-2/2-4, 0-2/2-3, 2-4/2-3


def test_allowed_pairs_path_gives_one_candidate():
    s = RVineStructure(3, ((E((0, 1)), E((1, 2))),))
    assert [c.edge for c in allowed_pairs(s, 2)] == [E((0, 2), (1,))]


def test_allowed_pairs_level_errors():
    with pytest.raises(ConfigError):
        allowed_pairs(RVineStructure(4), 4)
    with pytest.raises(ConfigError):
        allowed_pairs(RVineStructure(4), 3)
