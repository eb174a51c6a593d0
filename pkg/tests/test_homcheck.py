"""Homomorphism decisions: reasons, witnesses, bounds, brute-force agreement."""

import json
import random
from fractions import Fraction

import pytest

from ctlz import (
    DomainError,
    EQ,
    LT,
    SigmaStructure,
    brute_force_hom,
    const_rel,
    decide_hom,
    mod_rel,
    verify_hom,
    witness_bound,
)
from ctlz.homcheck import build_quotient, crt_pair, partition_bgsr, sim_closure
from conftest import SIGMA0, random_sigma0_structure


def _s(elements, **rels):
    interp = {}
    names = {"lt": LT, "eq": EQ}
    for key, rows in rels.items():
        if key in names:
            rel = names[key]
        elif key.startswith("eqc"):
            rel = const_rel(int(key[3:].replace("m", "-")))
        else:
            a, b = key[3:].split("_")
            rel = mod_rel(int(a), int(b))
        interp[rel] = rows
    return SigmaStructure(list(elements), interp)


# ---------------------------------------------------------------------------
# verify_hom


def test_verify_accepts_and_rejects():
    s = _s("ab", lt=[("a", "b")])
    assert verify_hom(s, {"a": 0, "b": 1}, "Z")
    assert not verify_hom(s, {"a": 1, "b": 0}, "Z")


def test_verify_explains_first_violation():
    s = _s("ab", lt=[("a", "b")], eq=[("a", "a")])
    ok, reason = verify_hom(s, {"a": 2, "b": 1}, "Z", explain=True)
    assert not ok
    assert reason[0] == "lt" and tuple(reason[1]) == ("a", "b")


def test_verify_checks_value_membership():
    s = _s("a")
    assert not verify_hom(s, {"a": -1}, "N")
    assert not verify_hom(s, {"a": 0}, "negZ")
    assert verify_hom(s, {"a": Fraction(1, 2)}, "Q")
    assert not verify_hom(s, {"a": Fraction(1, 2)}, "Z")


def test_verify_requires_total_map():
    s = _s("ab", lt=[("a", "b")])
    assert not verify_hom(s, {"a": 0}, "Z")


# ---------------------------------------------------------------------------
# Decision reasons


def test_cycle_reason():
    s = _s("abc", lt=[("a", "b"), ("b", "c"), ("c", "a")])
    d = decide_hom(s, "Z")
    assert not d.verdict
    assert d.reason.kind == "cycle"
    assert set(d.reason.details["elements"]) <= {"a", "b", "c"}


def test_equality_loops_do_not_make_cycles():
    s = _s("ab", lt=[("a", "b")], eq=[("a", "a"), ("b", "b")])
    assert decide_hom(s, "Z").verdict


def test_constant_clash_through_equality():
    s = _s("ab", eq=[("a", "b")], eqc0=[("a",)], eqc2=[("b",)])
    d = decide_hom(s, "Z")
    assert not d.verdict and d.reason.kind == "constant_clash"


def test_modulo_contradiction():
    s = _s("a", mod0_2=[("a",)], mod1_2=[("a",)])
    d = decide_hom(s, "Z")
    assert not d.verdict and d.reason.kind == "modulo_contradiction"


def test_compatible_moduli_combine():
    s = _s("a", mod1_2=[("a",)], mod1_3=[("a",)])
    d = decide_hom(s, "Z")
    assert d.verdict and d.witness["a"] % 6 == 1


def test_strict_gap_with_no_integer_room():
    s = _s(["c0", "x", "c1"], lt=[("c0", "x"), ("x", "c1")], eqc0=[("c0",)], eqc1=[("c1",)])
    d = decide_hom(s, "Z")
    assert not d.verdict and d.reason.kind == "bounded_infeasible"
    q = decide_hom(s, "Q")
    assert q.verdict and q.witness["x"] == Fraction(1, 2)


def test_parity_blocked_window():
    s = _s(
        ["c0", "x", "c2"],
        lt=[("c0", "x"), ("x", "c2")],
        eqc0=[("c0",)],
        eqc2=[("c2",)],
        mod0_2=[("x",)],
    )
    d = decide_hom(s, "Z")
    assert not d.verdict and d.reason.kind == "bounded_infeasible"


def test_rational_order_constant_conflict():
    s = _s("ab", lt=[("b", "a")], eqc0=[("a",)], eqc2=[("b",)])
    d = decide_hom(s, "Q")
    assert not d.verdict and d.reason.kind == "order_constant_conflict"
    assert not decide_hom(s, "Z").verdict


def test_restricted_target_signatures():
    with pytest.raises(DomainError, match="does not accept"):
        decide_hom(_s("a", eqc0=[("a",)]), "N")
    with pytest.raises(DomainError, match="does not accept"):
        decide_hom(_s("a", mod1_2=[("a",)]), "Q")
    with pytest.raises(DomainError, match="unknown target"):
        decide_hom(_s("a"), "R")


def test_free_targets_follow_order_direction():
    s = _s("ab", lt=[("b", "a")], mod1_3=[("a",)])
    for target in ("N", "negZ"):
        d = decide_hom(s, target)
        assert d.verdict
        assert d.witness["b"] < d.witness["a"]
        assert d.witness["a"] % 3 == 1


def test_json_shape_and_fraction_rendering():
    s = SigmaStructure(["x"], {const_rel(Fraction(1, 2)): [("x",)]})
    payload = json.loads(decide_hom(s, "Q").to_json(["x"]))
    assert payload["verdict"] == "yes"
    assert payload["witness"] == {"x": "1/2"}
    s2 = _s("a", eqc2=[("a",)])
    payload2 = json.loads(decide_hom(s2, "Q").to_json())
    assert payload2["witness"] == {"a": 2}  # whole rationals print as integers


# ---------------------------------------------------------------------------
# Helpers


def test_crt_pair():
    assert crt_pair(1, 2, 1, 3) == (1, 6)
    assert crt_pair(1, 2, 2, 3) == (5, 6)
    assert crt_pair(3, 4, 1, 2) == (3, 4)
    assert crt_pair(0, 2, 1, 2) is None


def test_sim_closure_merges_equalities():
    s = _s("abc", eq=[("a", "b"), ("b", "c")])
    classes = sim_closure(s)
    assert classes["a"] == classes["b"] == classes["c"]


def test_quotient_lifts_edges_and_unaries():
    s = _s("abc", eq=[("a", "b")], lt=[("a", "c")], eqc2=[("b",)])
    q = build_quotient(s)
    ca, cc = q.class_of["a"], q.class_of["c"]
    assert q.class_of["b"] == ca
    assert (ca, cc) in q.edges
    assert q.constants[ca] == [2]


def test_partition_by_constant_reachability():
    s = _s(
        ["s", "c0", "g", "iso"],
        lt=[("s", "c0"), ("c0", "g")],
        eqc0=[("c0",)],
    )
    bounded, greater, smaller, rest = partition_bgsr(s)
    assert bounded == frozenset({"c0"})
    assert greater == frozenset({"g"})
    assert smaller == frozenset({"s"})
    assert rest == frozenset({"iso"})


def test_partition_without_constants_is_all_rest():
    s = _s("ab", lt=[("a", "b")])
    bounded, greater, smaller, rest = partition_bgsr(s)
    assert not bounded and not greater and not smaller
    assert rest == frozenset({"a", "b"})


def test_witness_bound_formula():
    s = _s(
        ["a", "b"],
        lt=[("a", "b")],
        eqc2=[("a",)],
        eqcm3=[("b",)],
        mod1_2=[("a",)],
        mod1_3=[("b",)],
    )
    # delta = 6, n = 2, m = -3, M = 2
    assert witness_bound(s) == 6 * (2 + 3 + 2 + 3)
    bare = _s("a")
    assert witness_bound(bare) == 1 * (1 + 0 + 0 + 3)


# ---------------------------------------------------------------------------
# Brute-force agreement (small smoke; the acceptance suite sweeps widely)


def test_decide_matches_brute_force_on_random_structures():
    rng = random.Random(31)
    for _ in range(150):
        s = random_sigma0_structure(rng, rng.randint(1, 4), 0.15, 0.15)
        d = decide_hom(s, "Z")
        h = brute_force_hom(s, witness_bound(s), "Z")
        assert d.verdict == (h is not None)
        if d.verdict:
            assert verify_hom(s, d.witness, "Z")


def test_decide_matches_brute_force_constant_free_targets():
    rng = random.Random(32)
    free_rels = [r for r in SIGMA0 if r.name[:3] != "eqc"]
    for _ in range(100):
        n = rng.randint(1, 4)
        elems = [f"e{i}" for i in range(n)]
        interp = {}
        for rel in free_rels:
            rows = []
            if rel.arity == 2:
                rows = [(a, b) for a in elems for b in elems if rng.random() < 0.2]
            else:
                rows = [(a,) for a in elems if rng.random() < 0.2]
            interp[rel] = rows
        s = SigmaStructure(elems, interp)
        for target in ("N", "negZ"):
            d = decide_hom(s, target)
            h = brute_force_hom(s, witness_bound(s), target)
            assert d.verdict == (h is not None), (target, s.interpretation)
            if d.verdict:
                assert verify_hom(s, d.witness, target)


def test_decide_matches_brute_force_rationals():
    rng = random.Random(33)
    rels = [LT, EQ, const_rel(0), const_rel(2), const_rel(Fraction(1, 2))]
    for _ in range(100):
        n = rng.randint(1, 4)
        elems = [f"e{i}" for i in range(n)]
        interp = {}
        for rel in rels:
            if rel.arity == 2:
                rows = [(a, b) for a in elems for b in elems if rng.random() < 0.2]
            else:
                rows = [(a,) for a in elems if rng.random() < 0.2]
            interp[rel] = rows
        s = SigmaStructure(elems, interp)
        d = decide_hom(s, "Q")
        h = brute_force_hom(s, witness_bound(s), "Q")
        assert d.verdict == (h is not None), s.interpretation
        if d.verdict:
            assert verify_hom(s, d.witness, "Q")
