"""Models, structures, file formats, abstraction and extraction."""

import random
from fractions import Fraction

import pytest

from ctlz import (
    AbstractionTable,
    Constraint,
    ConstraintKripke,
    EQ,
    LT,
    SigmaStructure,
    StructureError,
    TableEntry,
    abstract_model,
    const_rel,
    element_id,
    extract_constraint_graph,
    gamma_map,
    model_from_text,
    model_to_text,
    structure_from_text,
    structure_to_text,
    tree_shape,
    validate_model,
    validate_structure,
    Z_DOMAIN,
)
from conftest import random_graph_model, random_tree_model


def _graph():
    return ConstraintKripke(
        ["s0", "s1"],
        {("s0", "s1"), ("s1", "s0"), ("s1", "s1")},
        {"s0": frozenset({"p"})},
        {("s0", "x"): 0, ("s1", "x"): 5},
        ["x"],
    )


def _two_level_tree(values):
    nodes = ["", "1", "2"]
    edges = {("", "1"), ("", "2")}
    registers = {(n, "x"): values[n] for n in nodes}
    return ConstraintKripke(nodes, edges, {}, registers, ["x"], tree_shape(2, 1))


# ---------------------------------------------------------------------------
# Validation


def test_graph_must_be_total():
    m = _graph()
    m.edges.discard(("s1", "s0"))
    m.edges.discard(("s1", "s1"))
    with pytest.raises(StructureError, match="not total"):
        validate_model(m)


def test_edge_endpoints_must_exist():
    m = _graph()
    m.edges.add(("s0", "ghost"))
    with pytest.raises(StructureError, match="unknown node"):
        validate_model(m)


def test_every_register_must_be_present():
    m = _graph()
    del m.registers[("s1", "x")]
    with pytest.raises(StructureError, match="missing register"):
        validate_model(m)


def test_reserved_prop_rejected_by_default():
    m = _graph()
    m.labels["s0"] = frozenset({"__c0"})
    with pytest.raises(StructureError, match="reserved"):
        validate_model(m)
    validate_model(m, allow_reserved=True)


def test_tree_nodes_prefix_closed_and_bounded():
    t = _two_level_tree({"": 0, "1": 1, "2": 2})
    validate_model(t)
    bad = ConstraintKripke(["", "11"], set(), {}, {("", "x"): 0, ("11", "x"): 1}, ["x"], tree_shape(2, 2))
    with pytest.raises(StructureError, match="prefix closed"):
        validate_model(bad)
    deep = ConstraintKripke(
        ["", "1", "11"],
        set(),
        {},
        {("", "x"): 0, ("1", "x"): 0, ("11", "x"): 0},
        ["x"],
        tree_shape(2, 1),
    )
    with pytest.raises(StructureError, match="deeper"):
        validate_model(deep)


def test_structure_validation():
    s = SigmaStructure(["a", "b"], {LT: [("a", "b")]})
    validate_structure(s)
    with pytest.raises(StructureError, match="unknown element"):
        validate_structure(SigmaStructure(["a"], {LT: [("a", "c")]}))
    with pytest.raises(StructureError, match="ary"):
        validate_structure(SigmaStructure(["a"], {LT: [("a",)]}))
    with pytest.raises(StructureError, match="duplicate"):
        validate_structure(SigmaStructure(["a", "a"], {}))


# ---------------------------------------------------------------------------
# File formats


def test_model_text_round_trip_graph():
    m = _graph()
    assert model_from_text(model_to_text(m)) == m


def test_model_text_round_trip_tree():
    t = _two_level_tree({"": 3, "1": -1, "2": 0})
    text = model_to_text(t)
    assert "SHAPE tree 2 1" in text
    assert "\neps x 3" in text  # the root is written as eps
    assert model_from_text(text) == t


def test_model_text_round_trip_random():
    rng = random.Random(5)
    for _ in range(25):
        m = random_graph_model(rng, rng.randint(1, 4), ("x", "y"), props=("p", "q"))
        assert model_from_text(model_to_text(m)) == m
        t = random_tree_model(rng, depth=2, k=2, variables=("x",), props=("p",))
        assert model_from_text(model_to_text(t)) == t


def test_model_file_comments_and_blank_lines():
    text = """# a tiny model
SHAPE graph
VARS x

NODES
s0
EDGES
s0 s0   # self loop
REGISTERS
s0 x 7
"""
    m = model_from_text(text)
    assert m.nodes == ["s0"] and m.registers[("s0", "x")] == 7


def test_model_file_fraction_and_tuple_registers():
    text = """SHAPE graph
VARS x
NODES
s0
EDGES
s0 s0
REGISTERS
s0 x 1/2
"""
    assert model_from_text(text).registers[("s0", "x")] == Fraction(1, 2)
    text2 = text.replace("1/2", "(1,2)")
    assert model_from_text(text2).registers[("s0", "x")] == (1, 2)


def test_model_file_errors():
    with pytest.raises(StructureError, match="SHAPE"):
        model_from_text("VARS x\nNODES\ns0\n")
    with pytest.raises(StructureError, match="bad register value"):
        model_from_text("SHAPE graph\nVARS x\nNODES\ns0\nEDGES\ns0 s0\nREGISTERS\ns0 x pi\n")
    with pytest.raises(StructureError):
        model_from_text("SHAPE tree 2\nVARS x\nNODES\neps\nREGISTERS\neps x 0\n")


def test_structure_text_round_trip():
    s = SigmaStructure(
        ["a", "b", "c"],
        {LT: [("a", "b"), ("b", "c")], EQ: [], const_rel(0): [("a",)]},
    )
    text = structure_to_text(s)
    assert text.startswith("ELEMENTS\n")
    back = structure_from_text(text)
    assert back.elements == s.elements
    assert {r.name: sorted(t) for r, t in back.interpretation.items()} == {
        r.name: sorted(t) for r, t in s.interpretation.items()
    }


def test_structure_file_errors():
    with pytest.raises(StructureError, match="ELEMENTS"):
        structure_from_text("REL lt\na b\n")
    with pytest.raises(StructureError):
        structure_from_text("ELEMENTS\na\nREL lt\na b c\n")


# ---------------------------------------------------------------------------
# Abstraction on trees


def _lt_step_table():
    c = Constraint(LT, ((0, "x"), (1, "x")))
    return AbstractionTable((TableEntry(c, "p", 1),))


def test_abstract_model_places_props_by_window():
    t = _two_level_tree({"": 1, "1": 5, "2": 0})
    out = abstract_model(t, _lt_step_table(), Z_DOMAIN)
    assert out.label("1") == frozenset({"p"})  # 1 < 5 seen from the parent
    assert out.label("2") == frozenset()
    assert out.label("") == frozenset()  # no ancestor window at the root


def test_abstract_model_rejects_existing_table_prop():
    t = _two_level_tree({"": 1, "1": 5, "2": 0})
    t.labels["1"] = frozenset({"p"})
    with pytest.raises(StructureError, match="already carries"):
        abstract_model(t, _lt_step_table(), Z_DOMAIN)


def test_abstract_model_rejects_graphs_and_unknown_vars():
    with pytest.raises(StructureError, match="tree"):
        abstract_model(_graph(), _lt_step_table(), Z_DOMAIN)
    t = _two_level_tree({"": 1, "1": 5, "2": 0})
    bad = AbstractionTable((TableEntry(Constraint(LT, ((0, "y"), (1, "y"))), "p", 1),))
    with pytest.raises(StructureError, match="register"):
        abstract_model(t, bad, Z_DOMAIN)


def test_extract_reads_rows_off_labels():
    t = _two_level_tree({"": 1, "1": 5, "2": 0})
    labeled = abstract_model(t, _lt_step_table(), Z_DOMAIN)
    graph = extract_constraint_graph(labeled, _lt_step_table())
    rows = graph.interpretation[LT]
    assert rows == [(element_id("", "x"), element_id("1", "x"))]
    assert set(graph.elements) == {element_id(n, "x") for n in t.nodes}


def test_extract_requires_deep_enough_label():
    t = _two_level_tree({"": 1, "1": 5, "2": 0})
    t.labels[""] = frozenset({"p"})
    with pytest.raises(StructureError, match="ancestors"):
        extract_constraint_graph(t, _lt_step_table())


def test_gamma_map_is_registers_by_element_id():
    t = _two_level_tree({"": 1, "1": 5, "2": 0})
    gm = gamma_map(t)
    assert gm[element_id("1", "x")] == 5
    assert len(gm) == 3


def test_round_trip_gamma_verifies_extracted_graph():
    rng = random.Random(11)
    c = Constraint(LT, ((0, "x"), (1, "x")))
    table = AbstractionTable((TableEntry(c, "p", 1),))
    from ctlz import verify_hom

    for _ in range(30):
        t = random_tree_model(rng, depth=2, k=2, variables=("x",), value_range=3)
        labeled = abstract_model(t, table, Z_DOMAIN)
        graph = extract_constraint_graph(labeled, table)
        assert verify_hom(graph, gamma_map(t), "Z")
