"""Epistemic concurrent game models: loading, validation and queries.

A model is a set of agents (local states, actions, protocol), an initial
global state, a deterministic transition table defined exactly on enabled
joint actions, and an interpretation of atoms as sets of global states.
Global states and joint actions are plain tuples, positional in agent
declaration order.
"""

from __future__ import annotations

import itertools
import json
import warnings
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import (
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

#: placeholder for the slot of an agent outside the acting coalition
SHARP = "♯"

#: atom names that the formula syntax reserves for constants
RESERVED_ATOMS = frozenset({"true", "false"})

GlobalState = tuple
JointAction = tuple


class UnreachableAtomState(UserWarning):
    """An atom mentions a global state that is not reachable from s0."""


@dataclass(frozen=True)
class AgentSpec:
    name: str
    locals: tuple
    actions: tuple
    protocol: Mapping[str, tuple]

    def local_index(self, local):
        return self.locals.index(local)


class Ecgm:
    """A validated model. Treat instances as immutable."""

    def __init__(self, agents: Sequence[AgentSpec], initial, transitions, atoms):
        self.agents = tuple(agents)
        self.initial = tuple(initial)
        self.transitions = dict(transitions)
        self.atoms = {name: frozenset(states) for name, states in atoms.items()}
        self.names = tuple(a.name for a in self.agents)
        self._agent_pos = {name: i for i, name in enumerate(self.names)}
        self._local_rank = [
            {l: k for k, l in enumerate(a.locals)} for a in self.agents
        ]
        self._action_rank = [
            {x: k for k, x in enumerate(a.actions)} for a in self.agents
        ]

    def __repr__(self):
        return f"Ecgm(agents={list(self.names)}, reachable={len(self.reachable)})"

    # -- ordering helpers ----------------------------------------------------

    def state_key(self, state):
        return tuple(rank[l] for rank, l in zip(self._local_rank, state))

    def action_key(self, joint):
        return tuple(rank[x] for rank, x in zip(self._action_rank, joint))

    def agent_index(self, name) -> int:
        try:
            return self._agent_pos[name]
        except KeyError:
            raise UnknownAgent(name) from None

    def is_global_state(self, state) -> bool:
        return len(state) == len(self.agents) and all(
            l in rank for rank, l in zip(self._local_rank, state)
        )

    # -- derived structure ---------------------------------------------------

    def enabled_joint_actions(self, state) -> list:
        """All joint actions enabled at ``state``, in canonical order."""
        per_agent = [a.protocol[l] for a, l in zip(self.agents, state)]
        return [tuple(j) for j in itertools.product(*per_agent)]

    @cached_property
    def _successors(self):
        succ = {}
        for (src, joint), dst in self.transitions.items():
            succ.setdefault(src, []).append((joint, dst))
        for src in succ:
            succ[src].sort(key=lambda e: self.action_key(e[0]))
        return succ

    def successors(self, state) -> list:
        """(joint action, target) pairs leaving ``state`` in canonical action order."""
        return list(self._successors.get(tuple(state), ()))

    @cached_property
    def reachable(self) -> tuple:
        seen = {self.initial}
        queue = deque([self.initial])
        while queue:
            s = queue.popleft()
            for _, t in self._successors.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return tuple(sorted(seen, key=self.state_key))

    @cached_property
    def reachable_set(self) -> frozenset:
        return frozenset(self.reachable)

    @cached_property
    def edges(self) -> tuple:
        """Distinct pairs (s, s') with s -> s' over reachable states, canonical order."""
        out = set()
        for s in self.reachable:
            for _, t in self._successors.get(s, ()):
                out.add((s, t))
        return tuple(sorted(out, key=lambda e: (self.state_key(e[0]), self.state_key(e[1]))))

    def holds(self, atom, state) -> bool:
        return state in self.atoms.get(atom, ())

    def summary(self) -> str:
        return f"{len(self.agents)} agents, {len(self.reachable)} reachable states"


# -- loading -----------------------------------------------------------------

def _as_tuple(value, what, violations):
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        violations.append(MalformedModel(f"{what} must be a list of strings"))
        return None
    return tuple(value)


def _check_agents(raw_agents, violations):
    agents = []
    if not isinstance(raw_agents, list) or not raw_agents:
        violations.append(MalformedModel("'agents' must be a non-empty list"))
        return agents
    seen_names = set()
    for k, raw in enumerate(raw_agents):
        if not isinstance(raw, dict):
            violations.append(MalformedModel(f"agent #{k} must be an object"))
            continue
        name = raw.get("name")
        if not isinstance(name, str) or not name:
            violations.append(MalformedModel(f"agent #{k} has no name"))
            continue
        if name in seen_names:
            violations.append(MalformedModel(f"duplicate agent name {name!r}"))
        seen_names.add(name)
        locs = _as_tuple(raw.get("locals"), f"agent {name}: locals", violations)
        acts = _as_tuple(raw.get("actions"), f"agent {name}: actions", violations)
        if locs is None or acts is None:
            continue
        for what, seq in (("local state", locs), ("action", acts)):
            dups = sorted({x for x in seq if seq.count(x) > 1})
            if dups:
                violations.append(MalformedModel(f"agent {name}: duplicate {what}(s) {dups}"))
        raw_proto = raw.get("protocol")
        if not isinstance(raw_proto, dict):
            violations.append(MalformedModel(f"agent {name}: protocol must be an object"))
            continue
        protocol = {}
        for local, allowed in raw_proto.items():
            if local not in locs:
                violations.append(UnknownIdentifier(
                    f"agent {name}: protocol key {local!r} is not a local state"))
                continue
            allowed = _as_tuple(allowed, f"agent {name}: protocol[{local}]", violations)
            if allowed is None:
                continue
            if not allowed:
                violations.append(EmptyProtocolEntry(
                    f"agent {name}: protocol at {local!r} is empty"))
                continue
            unknown = [x for x in allowed if x not in acts]
            if unknown:
                violations.append(UnknownIdentifier(
                    f"agent {name}: protocol at {local!r} names unknown action(s) {unknown}"))
                continue
            # keep declaration order so enumeration is canonical
            protocol[local] = tuple(x for x in acts if x in allowed)
        for local in locs:
            if local not in protocol and local not in raw_proto:
                violations.append(EmptyProtocolEntry(
                    f"agent {name}: no protocol entry for local state {local!r}"))
        agents.append(AgentSpec(name, locs, acts, protocol))
    return agents


def _tuple_over(raw, slots, what, violations):
    """Parse a positional tuple, checking each slot against ``slots[i]``."""
    if not isinstance(raw, list) or len(raw) != len(slots):
        violations.append(MalformedModel(f"{what} must be a list of length {len(slots)}"))
        return None
    bad = [(i, x) for i, x in enumerate(raw) if x not in slots[i]]
    if bad:
        violations.append(UnknownIdentifier(f"{what}: unknown identifier(s) {bad}"))
        return None
    return tuple(raw)


def validate_model(doc) -> Ecgm:
    """Check a raw model document and build an :class:`Ecgm`.

    All violations are collected and raised together as a
    :class:`ModelValidationError`.
    """
    violations = []
    if not isinstance(doc, dict):
        raise ModelValidationError([MalformedModel("model document must be an object")])
    agents = _check_agents(doc.get("agents"), violations)
    if violations:
        raise ModelValidationError(violations)

    locals_by_slot = [a.locals for a in agents]
    actions_by_slot = [a.actions for a in agents]
    initial = _tuple_over(doc.get("initial"), locals_by_slot, "initial", violations)

    transitions = {}
    raw_transitions = doc.get("transitions", [])
    if not isinstance(raw_transitions, list):
        violations.append(MalformedModel("'transitions' must be a list"))
        raw_transitions = []
    for k, entry in enumerate(raw_transitions):
        if not isinstance(entry, dict):
            violations.append(MalformedModel(f"transition #{k} must be an object"))
            continue
        src = _tuple_over(entry.get("from"), locals_by_slot, f"transition #{k} 'from'", violations)
        joint = _tuple_over(entry.get("action"), actions_by_slot, f"transition #{k} 'action'", violations)
        dst = _tuple_over(entry.get("to"), locals_by_slot, f"transition #{k} 'to'", violations)
        if src is None or joint is None or dst is None:
            continue
        if not all(x in a.protocol[l] for a, l, x in zip(agents, src, joint)):
            violations.append(DisabledTransition(
                f"transition #{k}: joint action {joint} is not enabled at {src}"))
            continue
        if (src, joint) in transitions:
            violations.append(DuplicateTransition(
                f"transition #{k}: second entry for ({src}, {joint})"))
            continue
        transitions[(src, joint)] = dst

    raw_atoms = doc.get("atoms", {})
    atoms = {}
    if not isinstance(raw_atoms, dict):
        violations.append(MalformedModel("'atoms' must be an object"))
        raw_atoms = {}
    for name, states in raw_atoms.items():
        if name in RESERVED_ATOMS:
            violations.append(UnknownIdentifier(f"atom name {name!r} is reserved"))
            continue
        if not isinstance(states, list):
            violations.append(MalformedModel(f"atom {name!r} must map to a list of states"))
            continue
        parsed = [_tuple_over(s, locals_by_slot, f"atom {name!r} state", violations) for s in states]
        atoms[name] = frozenset(s for s in parsed if s is not None)

    if violations or initial is None:
        raise ModelValidationError(violations)

    model = Ecgm(agents, initial, transitions, atoms)
    for s in model.reachable:
        for joint in model.enabled_joint_actions(s):
            if (s, joint) not in transitions:
                violations.append(MissingEnabledTransition(s, joint))
    if violations:
        raise ModelValidationError(violations)

    for name, states in sorted(model.atoms.items()):
        stray = sorted(states - model.reachable_set, key=model.state_key)
        if stray:
            warnings.warn(
                f"atom {name!r} mentions unreachable state(s) {stray}",
                UnreachableAtomState,
                stacklevel=2,
            )
    return model


def load_model(path) -> Ecgm:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelValidationError([MalformedModel(f"invalid JSON: {exc}")]) from None
    return validate_model(doc)


def model_to_document(model: Ecgm) -> dict:
    """Inverse of :func:`validate_model` (canonical ordering)."""
    return {
        "agents": [
            {
                "name": a.name,
                "locals": list(a.locals),
                "actions": list(a.actions),
                "protocol": {l: list(a.protocol[l]) for l in a.locals if l in a.protocol},
            }
            for a in model.agents
        ],
        "initial": list(model.initial),
        "transitions": [
            {"from": list(s), "action": list(j), "to": list(t)}
            for (s, j), t in sorted(
                model.transitions.items(),
                key=lambda kv: (model.state_key(kv[0][0]), model.action_key(kv[0][1])),
            )
        ],
        "atoms": {
            name: [list(s) for s in sorted(states, key=model.state_key)]
            for name, states in model.atoms.items()
        },
    }


# -- queries -----------------------------------------------------------------

def reachable_states(model: Ecgm) -> tuple:
    return model.reachable


def _agent_positions(model, agents: Iterable[str]) -> set:
    return {model.agent_index(a) for a in agents}


def enabled_actions(model: Ecgm, state, agents: Iterable[str]) -> list:
    """D_A(s): the A-actions enabled at ``state``, ``SHARP`` outside A."""
    members = _agent_positions(model, agents)
    slots = [
        a.protocol[l] if i in members else (SHARP,)
        for i, (a, l) in enumerate(zip(model.agents, state))
    ]
    return [tuple(x) for x in itertools.product(*slots)]


def step(model: Ecgm, state, joint) -> tuple:
    try:
        return model.transitions[(tuple(state), tuple(joint))]
    except KeyError:
        raise NotEnabled(f"joint action {tuple(joint)} is not enabled at {tuple(state)}") from None


def extends(joint, partial) -> bool:
    return all(p == SHARP or p == j for j, p in zip(joint, partial))


def outcome_of_action(model: Ecgm, state, partial) -> frozenset:
    """out(s, sigma_A): targets of every enabled joint action extending ``partial``."""
    state, partial = tuple(state), tuple(partial)
    members = [model.names[i] for i, x in enumerate(partial) if x != SHARP]
    if partial not in enabled_actions(model, state, members):
        raise NotEnabled(f"{partial} is not enabled at {state}")
    return frozenset(
        model.transitions[(state, j)]
        for j in model.enabled_joint_actions(state)
        if extends(j, partial)
    )


def indistinguishable(model: Ecgm, agent: str, s, t) -> bool:
    i = model.agent_index(agent)
    return s[i] == t[i]


def epistemic_class(model: Ecgm, agent: str, state) -> tuple:
    i = model.agent_index(agent)
    return tuple(t for t in model.reachable if t[i] == state[i])
