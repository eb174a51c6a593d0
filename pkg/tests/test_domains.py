"""Concrete domains: relation semantics, negation tables, interpretations."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ctlz import (
    ALLEN_DOMAIN,
    Constraint,
    DomainError,
    EQ,
    LT,
    N_DOMAIN,
    NEGZ_DOMAIN,
    Q_DOMAIN,
    Z_DOMAIN,
    apply_interpretation,
    component_name,
    const_rel,
    domain_by_name,
    format_formula,
    interpretation_by_name,
    mod_rel,
    parse_formula,
    relation_from_name,
)
from ctlz.domains import ALLEN_RELATIONS, negation_formula


def test_order_and_equality_on_integers():
    assert Z_DOMAIN.eval_relation(LT, (3, 5))
    assert not Z_DOMAIN.eval_relation(LT, (5, 3))
    assert not Z_DOMAIN.eval_relation(LT, (4, 4))
    assert Z_DOMAIN.eval_relation(EQ, (4, 4))
    assert not Z_DOMAIN.eval_relation(EQ, (4, 5))


def test_constant_and_modulo_relations():
    assert Z_DOMAIN.eval_relation(const_rel(5), (5,))
    assert not Z_DOMAIN.eval_relation(const_rel(5), (6,))
    assert Z_DOMAIN.eval_relation(mod_rel(2, 3), (-7,))  # -7 = 2 - 3*3
    assert Z_DOMAIN.eval_relation(mod_rel(0, 2), (-4,))
    assert not Z_DOMAIN.eval_relation(mod_rel(1, 2), (-4,))


def test_value_membership_per_domain():
    assert Z_DOMAIN.check_value(-3) and Z_DOMAIN.check_value(0)
    assert not Z_DOMAIN.check_value(True)
    assert not Z_DOMAIN.check_value(Fraction(1, 2))
    assert N_DOMAIN.check_value(0) and not N_DOMAIN.check_value(-1)
    assert NEGZ_DOMAIN.check_value(-1) and not NEGZ_DOMAIN.check_value(0)
    assert Q_DOMAIN.check_value(Fraction(1, 2)) and Q_DOMAIN.check_value(2)


def test_rational_domain_signature():
    assert Q_DOMAIN.supports(const_rel(Fraction(1, 2)))
    assert not Z_DOMAIN.supports(const_rel(Fraction(1, 2)))
    assert not Q_DOMAIN.supports(mod_rel(1, 3))
    assert Z_DOMAIN.supports(mod_rel(1, 3))


def test_domain_by_name():
    assert domain_by_name("Z") is Z_DOMAIN
    assert domain_by_name("N") is N_DOMAIN
    assert domain_by_name("negZ") is NEGZ_DOMAIN
    assert domain_by_name("Q") is Q_DOMAIN
    assert domain_by_name("allenZ") is ALLEN_DOMAIN
    assert domain_by_name("lexZ[2]").name == "lexZ[2]"
    with pytest.raises(DomainError, match="unknown domain"):
        domain_by_name("R")


# ---------------------------------------------------------------------------
# Negation tables: the table entry must hold exactly when the relation fails,
# whenever a witness can range over enough of the universe.


def _universe(dom):
    if dom is N_DOMAIN:
        return list(range(0, 13))
    if dom is NEGZ_DOMAIN:
        return list(range(-13, 0))
    if dom is Q_DOMAIN:
        base = [Fraction(k, 2) for k in range(-12, 13)]
        return base
    return list(range(-8, 9))


def _relations_for(dom):
    rels = [LT, EQ]
    for c in (0, 2, 5):
        if dom.supports(const_rel(c)):
            rels.append(const_rel(c))
    if dom is NEGZ_DOMAIN:
        rels.append(const_rel(-3))
    if dom is Q_DOMAIN:
        rels.append(const_rel(Fraction(1, 2)))
    for rel in (mod_rel(0, 2), mod_rel(1, 2), mod_rel(2, 3)):
        if dom.supports(rel):
            rels.append(rel)
    return rels


@pytest.mark.parametrize("dom", [Z_DOMAIN, N_DOMAIN, NEGZ_DOMAIN, Q_DOMAIN], ids=lambda d: d.name)
def test_negation_table_complements_relation(dom):
    universe = _universe(dom)
    for rel in _relations_for(dom):
        entry = negation_formula(dom, rel)
        for values in itertools.product(universe, repeat=rel.arity):
            direct = dom.eval_relation(rel, values)
            negated = entry.eval(dom, values, universe)
            assert direct != negated, (dom.name, rel.name, values)


def test_negation_table_rejects_unsupported_relation():
    with pytest.raises(DomainError):
        negation_formula(Q_DOMAIN, mod_rel(1, 3))
    with pytest.raises(DomainError):
        negation_formula(Z_DOMAIN, const_rel(Fraction(1, 2)))


# ---------------------------------------------------------------------------
# Allen's interval relations


@st.composite
def _interval(draw):
    a = draw(st.integers(-10, 9))
    b = draw(st.integers(a + 1, 10))
    return (a, b)


@given(_interval(), _interval())
@settings(max_examples=300)
def test_allen_relations_partition_interval_pairs(i, j):
    holding = [
        name
        for name in ALLEN_RELATIONS
        if ALLEN_DOMAIN.eval_relation(relation_from_name(name), (i, j))
    ]
    assert len(holding) == 1


def test_allen_value_membership():
    assert ALLEN_DOMAIN.check_value((1, 3))
    assert not ALLEN_DOMAIN.check_value((3, 1))
    assert not ALLEN_DOMAIN.check_value((2, 2))
    assert not ALLEN_DOMAIN.check_value(3)


def test_allen_spot_checks():
    before = relation_from_name("b")
    meets = relation_from_name("m")
    during = relation_from_name("d")
    assert ALLEN_DOMAIN.eval_relation(before, ((0, 1), (2, 3)))
    assert ALLEN_DOMAIN.eval_relation(meets, ((0, 2), (2, 3)))
    assert ALLEN_DOMAIN.eval_relation(during, ((1, 2), (0, 3)))


# ---------------------------------------------------------------------------
# Lexicographic tuples


@given(
    st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
    st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
)
@settings(max_examples=200)
def test_lex_relations_match_tuple_comparison(u, v):
    lex = domain_by_name("lexZ[2]")
    assert lex.eval_relation(relation_from_name("ltlex"), (u, v)) == (u < v)
    assert lex.eval_relation(relation_from_name("eqlex"), (u, v)) == (u == v)


def test_lex_value_membership():
    lex = domain_by_name("lexZ[3]")
    assert lex.check_value((1, 2, 3))
    assert not lex.check_value((1, 2))
    assert not lex.check_value([1, 2, 3])


# ---------------------------------------------------------------------------
# Existential interpretations


def test_interpretations_by_name():
    assert interpretation_by_name("identity").tuple_width == 1
    assert interpretation_by_name("allenZ").tuple_width == 2
    assert interpretation_by_name("lexZ[3]").tuple_width == 3
    with pytest.raises(DomainError):
        interpretation_by_name("nope")


def test_lex_interpretation_expands_components():
    interp = interpretation_by_name("lexZ[2]")
    f = parse_formula("E X ltlex(x, X^1 y)")
    out = apply_interpretation(interp, f)
    text = format_formula(out)
    for name in (
        component_name("x", 1),
        component_name("x", 2),
        component_name("y", 1),
        component_name("y", 2),
    ):
        assert name in text
    assert "ltlex" not in text


def test_identity_interpretation_keeps_source_shape():
    interp = interpretation_by_name("identity")
    f = parse_formula("E (lt(x, X^1 x) U eq(x, x))")
    out = apply_interpretation(interp, f)
    text = format_formula(out)
    assert component_name("x", 1) in text
