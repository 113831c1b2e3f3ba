from __future__ import annotations

import itertools
import json
import warnings

import pytest

from eslmc.errors import (
    DisabledTransition,
    DuplicateTransition,
    EmptyProtocolEntry,
    MalformedModel,
    MissingEnabledTransition,
    ModelValidationError,
    NotEnabled,
    UnknownAgent,
    UnknownIdentifier,
)
from eslmc.model import (
    SHARP,
    UnreachableAtomState,
    enabled_actions,
    epistemic_class,
    indistinguishable,
    load_model,
    model_to_document,
    outcome_of_action,
    reachable_states,
    step,
    validate_model,
)

from conftest import S0, S0L, S00, S01, S1L, S10, S11, TOY_PATH


def violations_of(doc):
    with pytest.raises(ModelValidationError) as info:
        validate_model(doc)
    return info.value.violations


def test_toy_model_summary(toy):
    assert toy.names == ("A", "B")
    assert toy.summary() == "2 agents, 7 reachable states"
    assert toy.initial == S0


def test_reachable_states_in_canonical_order(toy):
    assert reachable_states(toy) == (S0, S0L, S00, S01, S1L, S10, S11)


def test_toy_edges_are_six_drawn_plus_four_returns(toy):
    assert len(toy.edges) == 10
    returns = [e for e in toy.edges if e[1] == S0]
    assert sorted(returns) == sorted((s, S0) for s in (S00, S01, S10, S11))


def test_selfloop_model(selfloop_doc):
    m = validate_model(selfloop_doc)
    assert reachable_states(m) == (("l",),)
    assert epistemic_class(m, "A", ("l",)) == (("l",),)


def test_isolated_atom_state_does_not_change_reachability(toy_doc):
    toy_doc["agents"][0]["locals"].append("iso")
    toy_doc["agents"][0]["protocol"]["iso"] = ["skip"]
    toy_doc["atoms"]["win_A"].append(["iso", "eB"])
    with pytest.warns(UnreachableAtomState):
        m = validate_model(toy_doc)
    assert len(m.reachable) == 7


def test_missing_enabled_transition(toy_doc):
    toy_doc["transitions"] = [
        t for t in toy_doc["transitions"]
        if not (t["from"] == ["1", "1"] and t["action"] == ["skip", "skip"])
    ]
    (v,) = violations_of(toy_doc)
    assert isinstance(v, MissingEnabledTransition)
    assert v.state == S11
    assert v.joint_action == ("skip", "skip")


def test_duplicate_transition(toy_doc):
    toy_doc["transitions"].append({"from": ["1", "1"], "action": ["skip", "skip"], "to": ["0", "0"]})
    assert [type(v) for v in violations_of(toy_doc)] == [DuplicateTransition]


def test_unknown_identifiers_are_all_reported(toy_doc):
    toy_doc["transitions"][0]["to"] = ["0", "nowhere"]
    toy_doc["atoms"]["win_B"].append(["0", "zzz"])
    kinds = [type(v) for v in violations_of(toy_doc)]
    assert kinds == [UnknownIdentifier, UnknownIdentifier]


def test_empty_protocol_entry(toy_doc):
    toy_doc["agents"][0]["protocol"]["1"] = []
    assert [type(v) for v in violations_of(toy_doc)] == [EmptyProtocolEntry]


def test_missing_protocol_entry(toy_doc):
    del toy_doc["agents"][1]["protocol"]["lam"]
    assert EmptyProtocolEntry in {type(v) for v in violations_of(toy_doc)}


def test_protocol_action_must_be_declared(toy_doc):
    toy_doc["agents"][0]["protocol"]["eA"] = ["set0", "jump"]
    assert UnknownIdentifier in {type(v) for v in violations_of(toy_doc)}


def test_transition_on_disabled_action(toy_doc):
    toy_doc["transitions"].append({"from": ["0", "0"], "action": ["set0", "skip"], "to": ["0", "0"]})
    assert DisabledTransition in {type(v) for v in violations_of(toy_doc)}


def test_reserved_atom_name(toy_doc):
    toy_doc["atoms"]["true"] = []
    assert UnknownIdentifier in {type(v) for v in violations_of(toy_doc)}


@pytest.mark.parametrize("doc", [[], {"agents": "x"}, {"agents": []}])
def test_malformed_documents(doc):
    with pytest.raises(ModelValidationError):
        validate_model(doc)


def test_duplicate_locals_rejected(toy_doc):
    toy_doc["agents"][0]["locals"].append("0")
    assert violations_of(toy_doc)


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ModelValidationError) as info:
        load_model(p)
    assert isinstance(info.value.violations[0], MalformedModel)


def test_totality_not_required_at_unreachable_states(toy_doc):
    toy_doc["agents"][0]["locals"].append("iso")
    toy_doc["agents"][0]["protocol"]["iso"] = ["skip"]
    m = validate_model(toy_doc)
    assert len(m.reachable) == 7


def test_document_round_trip(toy):
    again = validate_model(json.loads(json.dumps(model_to_document(toy))))
    assert again.transitions == toy.transitions
    assert again.atoms == toy.atoms
    assert again.reachable == toy.reachable


def test_enabled_actions(toy):
    assert enabled_actions(toy, S0, ["A"]) == [("set0", SHARP), ("set1", SHARP)]
    assert enabled_actions(toy, S0L, ["B"]) == [(SHARP, "set0"), (SHARP, "set1")]
    assert enabled_actions(toy, S00, ["A", "B"]) == [("skip", "skip")]
    assert enabled_actions(toy, S0, []) == [(SHARP, SHARP)]
    with pytest.raises(UnknownAgent):
        enabled_actions(toy, S0, ["C"])


def test_step(toy):
    assert step(toy, S0, ("set0", "wait")) == S0L
    assert step(toy, S0L, ("skip", "set1")) == S01
    assert step(toy, S11, ("skip", "skip")) == S0
    with pytest.raises(NotEnabled):
        step(toy, S0, ("skip", "skip"))


def test_outcome_of_action(toy):
    assert outcome_of_action(toy, S0, ("set0", SHARP)) == {S0L}
    assert outcome_of_action(toy, S0L, (SHARP, SHARP)) == {S00, S01}
    assert outcome_of_action(toy, S00, ("skip", "skip")) == {S0}
    with pytest.raises(NotEnabled):
        outcome_of_action(toy, S0, ("skip", SHARP))


def test_indistinguishability(toy):
    assert indistinguishable(toy, "B", S0L, S1L)
    assert not indistinguishable(toy, "B", S00, S01)
    assert indistinguishable(toy, "A", S0L, S00)
    with pytest.raises(UnknownAgent):
        indistinguishable(toy, "Z", S0, S0)


def test_epistemic_classes(toy):
    assert epistemic_class(toy, "B", S0L) == (S0L, S1L)
    assert epistemic_class(toy, "A", S0L) == (S0L, S00, S01)


def test_indistinguishability_is_an_equivalence(toy):
    S = toy.reachable
    for agent in toy.names:
        rel = {(s, t) for s in S for t in S if indistinguishable(toy, agent, s, t)}
        assert all((s, s) in rel for s in S)
        assert all((t, s) in rel for s, t in rel)
        assert all((s, u) in rel for s, t in rel for t2, u in rel if t == t2)


def test_enabled_joint_actions_match_transition_keys(toy):
    for s in toy.reachable:
        keys = {j for (src, j) in toy.transitions if src == s}
        product = set(itertools.product(*(a.protocol[l] for a, l in zip(toy.agents, s))))
        assert set(toy.enabled_joint_actions(s)) == keys == product
        for j in keys:
            assert len(outcome_of_action(toy, s, j)) == 1


def test_coalition_restriction_is_enabled(toy):
    for s in toy.reachable:
        full = enabled_actions(toy, s, ["A", "B"])
        for keep in (["A"], ["B"], []):
            idx = [toy.agent_index(a) for a in keep]
            small = set(enabled_actions(toy, s, keep))
            for j in full:
                restricted = tuple(x if i in idx else SHARP for i, x in enumerate(j))
                assert restricted in small


def test_shipped_model_file_is_valid():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        load_model(TOY_PATH)
