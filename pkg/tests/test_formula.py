from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eslmc import formula as f
from eslmc.errors import FormulaSyntaxError, UnknownAgent
from eslmc.parser import parse_formula

from conftest import DE_DICTO, DE_RE, NESTED_DE_DICTO, NESTED_DE_RE

AG = ("A", "B")
p, q = f.Atom("p"), f.Atom("q")
win_A, win_B = f.Atom("win_A"), f.Atom("win_B")


def parse(text):
    return parse_formula(text, AG)


def test_de_dicto_tree():
    expected = f.Forall("x", "A", f.Next(f.Know("B", f.Exists("y", "B", f.Next(win_B)))))
    assert parse(DE_DICTO) == expected


def test_implication_of_atoms():
    assert parse("win_A -> win_A") == f.Implies(win_A, win_A)


def test_until_binds_tighter_than_implies():
    assert parse("p U q -> X p") == f.Implies(f.Until(p, q), f.Next(p))


@pytest.mark.parametrize(
    "text, tree",
    [
        ("p -> q -> p", f.Implies(p, f.Implies(q, p))),
        ("p U q U p", f.Until(p, f.Until(q, p))),
        ("p & q | p", f.or_(f.and_(p, q), p)),
        ("p | q & p", f.or_(p, f.and_(q, p))),
        ("!p U q", f.Until(f.Not(p), q)),
        ("X p & q", f.and_(f.Next(p), q)),
        ("K[A] p -> q", f.Implies(f.Know("A", p), q)),
        ("F p", f.eventually(p)),
        ("G p", f.globally(p)),
        ("true", f.true_()),
        ("false", f.false_()),
        ("exists x:A. p -> q", f.Exists("x", "A", f.Implies(p, q))),
        ("(exists x:A. p) -> q", f.Implies(f.Exists("x", "A", p), q)),
        ("X exists y:B. p & q", f.Next(f.Exists("y", "B", f.and_(p, q)))),
    ],
)
def test_precedence_and_desugaring(text, tree):
    assert parse(text) == tree


def test_desugared_forms_use_only_core_nodes():
    core = (f.Atom, f.Not, f.Implies, f.Next, f.Until, f.Know, f.Exists, f.Forall)
    phi = parse("G (p & q) | F true -> exists x:A. forall y:B. false")
    assert all(isinstance(n, core) for n in f.walk(phi))


@pytest.mark.parametrize("text", ["", "p &", "(p", "p q", "exists x A. p", "K[A p", "p $ q", "X"])
def test_syntax_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse(text)


def test_syntax_error_reports_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse("p & & q")
    assert info.value.position == 4


@pytest.mark.parametrize("text", ["exists x:C. p", "K[C] p", "forall x:a. p"])
def test_unknown_agent(text):
    with pytest.raises(UnknownAgent):
        parse(text)


def test_node_ids_are_distinct():
    phi = parse(NESTED_DE_RE)
    ids = [n.nid for n in f.walk(phi)]
    assert len(ids) == len(set(ids))


def test_free_agents_table_examples():
    assert f.free_agents(win_A, AG) == frozenset()
    assert f.free_agents(f.Next(win_A), AG) == {"A", "B"}
    assert f.free_agents(parse(DE_DICTO), AG) == {"B"}
    assert f.free_agents(parse("K[A] win_A -> win_B"), AG) == frozenset()
    assert f.free_agents(parse("exists x:A. p U q"), AG) == {"B"}


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exists x:A. exists y:B. X win_A", True),
        ("win_A", True),
        (DE_DICTO, False),
        (DE_RE, False),
        ("forall x:A. forall y:B. X win_A", True),
    ],
)
def test_is_sentence(text, expected):
    assert f.is_sentence(parse(text), AG) is expected


@pytest.mark.parametrize(
    "text, alt",
    [
        (DE_DICTO, 1),
        ("exists x:A. exists y:B. X win_A", 0),
        ("!(exists x:A. forall y:B. exists z:A. X win_A)", 2),
        ("win_A", 0),
        ("forall x:A. win_A", 0),
        ("(exists x:A. X p) -> exists y:B. X p", 0),
        ("(forall x:A. X p) -> exists y:B. X p", 0),
        ("forall x:A. (exists y:B. X p) -> X p", 0),
        ("forall x:A. (forall y:B. X p) -> X p", 1),
        ("exists x:A. K[B] X forall y:B. X p", 1),
        ("exists x:A. forall y:B. X p & exists z:A. X p", 2),
    ],
)
def test_alternation_depth(text, alt):
    assert f.alternation_depth(parse(text)) == alt


def test_matching_pennies_formulas_have_one_alternation():
    for text in (DE_DICTO, DE_RE, NESTED_DE_DICTO, NESTED_DE_RE):
        assert f.alternation_depth(parse(text)) == 1


def test_size_and_depth():
    phi = parse("X (p -> q)")
    assert f.size(phi) == 4
    assert f.depth(phi) == 2


def test_pretty_examples():
    assert f.pretty(parse(DE_DICTO)) == DE_DICTO
    assert f.pretty(f.Implies(f.Implies(p, q), p)) == "(p -> q) -> p"
    assert f.pretty(f.Implies(f.Exists("x", "A", p), q)) == "(exists x:A. p) -> q"


# -- properties ----------------------------------------------------------------

atoms = st.sampled_from(["p", "q", "false"]).map(f.Atom)


def _extend(children):
    return st.one_of(
        children.map(f.Not),
        children.map(f.Next),
        st.tuples(st.sampled_from(AG), children).map(lambda t: f.Know(*t)),
        st.tuples(children, children).map(lambda t: f.Implies(*t)),
        st.tuples(children, children).map(lambda t: f.Until(*t)),
        st.tuples(st.sampled_from(["x", "y"]), st.sampled_from(AG), children).map(
            lambda t: f.Exists(*t)
        ),
        st.tuples(st.sampled_from(["x", "y"]), st.sampled_from(AG), children).map(
            lambda t: f.Forall(*t)
        ),
    )


formulas = st.recursive(atoms, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_pretty_parse_round_trip(phi):
    assert parse(f.pretty(phi)) == phi


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_free_and_bound_partition_the_roster(phi):
    fr = f.free_agents(phi, AG)
    bnd = f.bound_agents(phi, AG)
    assert fr | bnd == set(AG)
    assert not fr & bnd


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_alternation_invariant_under_double_negation(phi):
    assert f.alternation_depth(f.Not(f.Not(phi))) == f.alternation_depth(phi)


@settings(max_examples=100, deadline=None)
@given(formulas)
def test_free_agents_table_covers_every_node(phi):
    table = f.free_agents_table(phi, AG)
    assert {n.nid for n in f.walk(phi)} == set(table)
