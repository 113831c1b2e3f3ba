"""Memoised satisfaction relation for ESL.

Quantifier blocks search strategy tables lazily: the body is evaluated under a
partial table and only the entries it actually consults are branched on
(a consulted open entry raises :class:`~eslmc.strategy.NeedChoice`). A
verdict obtained without hitting an open entry holds for every completion
of the partial table, so the search is exact while visiting a small part
of the full strategy space.

Verdicts are cached under (node, state, tables of the node's free agents);
satisfaction does not depend on the strategies of bound agents.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from . import formula as f
from .model import Ecgm
from .strategy import (
    PERFECT,
    Assignment,
    NeedChoice,
    default_cap,
    strategy_space,
)


@dataclass(frozen=True)
class EvalConfig:
    recall: int = 1
    mode: str = PERFECT
    cap: int = field(default_factory=default_cap)
    cache: bool = True


@dataclass
class EvalStats:
    evaluations: int = 0
    cache_hits: int = 0
    branches: int = 0


class Evaluator:
    def __init__(self, model: Ecgm, cfg: EvalConfig | None = None):
        self.model = model
        self.cfg = cfg or EvalConfig()
        self.space = strategy_space(model, self.cfg.recall, self.cfg.mode)
        self.stats = EvalStats()
        self._cache = {}
        self._fr = {}
        self._checked = set()
        self._blocks = {}
        self._atoms = {
            name: frozenset(self.space.index[s] for s in states if s in self.space.index)
            for name, states in model.atoms.items()
        }

    # -- public entry points ---------------------------------------------------

    def default_tables(self) -> tuple:
        return tuple(self.space.least_table(i) for i in range(self.space.n_agents))

    def state_index(self, state) -> int:
        return self.space.index[tuple(state)]

    def prepare(self, phi: f.Formula):
        names = self.model.names
        for nid, agents in f.free_agents_table(phi, names).items():
            if nid not in self._fr:
                self._fr[nid] = tuple(i for i, n in enumerate(names) if n in agents)

    def satisfies(self, state, tables, phi: f.Formula) -> bool:
        """Verdict of ``phi`` at ``state`` (a global state) under internal ``tables``."""
        self.prepare(phi)
        return self.sat(phi, self.state_index(state), tables)

    def satisfies_assignment(self, state, assignment: Assignment, phi: f.Formula) -> bool:
        return self.satisfies(state, self.space.encode_assignment(assignment), phi)

    # -- core recursion ------------------------------------------------------------

    def sat(self, node, s: int, chi) -> bool:
        self.stats.evaluations += 1
        key = None
        if self.cfg.cache:
            key = (node.nid, s, tuple(chi[i] for i in self._fr[node.nid]))
            got = self._cache.get(key)
            if got is not None:
                self.stats.cache_hits += 1
                return got
        out = self._sat(node, s, chi)
        if key is not None:
            self._cache[key] = out
        return out

    def _sat(self, node, s, chi) -> bool:
        if isinstance(node, f.Atom):
            return s in self._atoms.get(node.name, ())
        if isinstance(node, f.Not):
            return not self.sat(node.sub, s, chi)
        if isinstance(node, f.Implies):
            return (not self.sat(node.left, s, chi)) or self.sat(node.right, s, chi)
        if isinstance(node, f.Next):
            t, _ = self.space.step(self.space.single[s], chi)
            return self.sat(node.sub, t, chi)
        if isinstance(node, f.Until):
            # walk the outcome run one window at a time so that only the
            # strategy entries needed for the verdict are consulted
            space = self.space
            w = space.single[s]
            t = s
            seen_windows = {w}
            seen_states = set()
            while True:
                # verdicts depend only on (state, chi): repeated states add nothing
                if t not in seen_states:
                    seen_states.add(t)
                    if self.sat(node.right, t, chi):
                        return True
                    if not self.sat(node.left, t, chi):
                        return False
                try:
                    t, w = space.step(w, chi)
                except NeedChoice:
                    if self._hopeless(node.right, t, seen_states, chi):
                        return False
                    raise
                if w in seen_windows:
                    return False
                seen_windows.add(w)
        if isinstance(node, f.Know):
            i = self.model.agent_index(node.agent)
            return all(self.sat(node.sub, t, chi) for t in self.space.classes[i][s])
        if isinstance(node, f.Quantifier):
            return self.search(node, s, chi, self.start(node))
        raise TypeError(f"not a formula node: {node!r}")

    def _hopeless(self, right, t, seen, chi) -> bool:
        """True if ``right`` fails at every unseen state reachable from ``t``.

        Verdicts depend only on (state, tables), so then no continuation of
        the run can satisfy the until and the open run entry need not be
        branched on. Entries this check consults are branched on first;
        branching on any entry keeps the search exact.
        """
        return not any(self.sat(right, u, chi) for u in self.space.reach[t] if u not in seen)

    # -- quantifier blocks ---------------------------------------------------------

    def block(self, node):
        """(body, bound agent indices, binding nodes) of the block headed by ``node``.

        Consecutive quantifiers of one kind are searched jointly. When an
        agent is bound twice in a block only the innermost binding is visible
        to the body.
        """
        got = self._blocks.get(node.nid)
        if got is None:
            kind = type(node)
            chain = []
            body = node
            while type(body) is kind:
                chain.append(body)
                body = body.sub
            binders = {}
            for q in chain:
                binders[self.model.agent_index(q.agent)] = q
            agents = tuple(sorted(binders))
            got = self._blocks[node.nid] = (body, agents, tuple(binders[i] for i in agents))
        return got

    def start(self, node) -> tuple:
        _, agents, _ = self.block(node)
        return (self.space.empty,) * len(agents)

    def _expand(self, agents, tabs, need):
        """Partial tables extending ``tabs`` at the consulted entry, or None if not ours."""
        if need.agent not in agents:
            return None
        k = agents.index(need.agent)
        out = []
        for a in self.space.options[need.agent][need.window]:
            grown = self.space.set_choice(tabs[k], need.agent, need.window, a)
            out.append(tabs[:k] + (grown,) + tabs[k + 1:])
        return out

    def _inner(self, chi, agents, tabs):
        inner = list(chi)
        for i, tab in zip(agents, tabs):
            inner[i] = tab
        return tuple(inner)

    def search(self, node, s: int, chi, tabs) -> bool:
        """Exists/forall over completions of the block's partial tables ``tabs``."""
        universal = isinstance(node, f.Forall)
        decisive = self.decide(node, s, chi, tabs)
        return universal if decisive is None else not universal

    def decide(self, node, s: int, chi, tabs):
        """Partial tables of a branch that decides the block, or None.

        For an existential block that is a branch where the body holds, for
        a universal block one where it fails; every completion of the
        returned tables gives the same body verdict.
        """
        body, agents, _ = self.block(node)
        for i in agents:
            if i not in self._checked:
                self.space.check_cap(i, self.cfg.cap)
                self._checked.add(i)
        universal = isinstance(node, f.Forall)
        # best-first on the number of non-default choices, deepest first on
        # ties; the tree is the same as plain backtracking, only the order of
        # visits differs, so the verdict is exact
        tick = itertools.count()
        heap = [(0, 0, tabs)]
        while heap:
            miss, _, cur = heapq.heappop(heap)
            self.stats.branches += 1
            try:
                verdict = self.sat(body, s, self._inner(chi, agents, cur))
            except NeedChoice as need:
                grown = self._expand(agents, cur, need)
                if grown is None:
                    raise
                for k, child in enumerate(grown):
                    heapq.heappush(heap, (miss + (k > 0), -next(tick), child))
                continue
            if verdict != universal:
                return cur
        return None

    def frontier(self, node, s: int, chi, want: int):
        """Split the search of the block headed by ``node`` into subproblems.

        Returns (decided verdicts, open partial tables); the block's verdict
        is the exists/forall reduction over both.
        """
        body, agents, _ = self.block(node)
        for i in agents:
            self.space.check_cap(i, self.cfg.cap)
        decided, pending = [], [self.start(node)]
        while pending and len(pending) < want:
            grown_all = []
            progressed = False
            for cur in pending:
                try:
                    decided.append(self.sat(body, s, self._inner(chi, agents, cur)))
                except NeedChoice as need:
                    grown = self._expand(agents, cur, need)
                    if grown is None:
                        raise
                    progressed = True
                    grown_all.extend(grown)
            pending = grown_all
            if not progressed:
                break
        return decided, pending


# -- functional API -----------------------------------------------------------------

def satisfies(model: Ecgm, state, assignment: Assignment, phi: f.Formula, cfg: EvalConfig | None = None) -> bool:
    """(model, state, assignment) |= phi."""
    cfg = cfg or EvalConfig(recall=assignment.recall)
    return Evaluator(model, cfg).satisfies_assignment(state, assignment, phi)


def universal_closure(phi: f.Formula, agents) -> f.Formula:
    fr = f.free_agents(phi, agents)
    out = phi
    names = [a for a in agents if a in fr]
    for k, a in reversed(list(enumerate(names, 1))):
        out = f.Forall(f"y{k}", a, out)
    return out


def satisfied_at_state(model: Ecgm, state, phi: f.Formula, cfg: EvalConfig | None = None) -> bool:
    """True iff ``phi`` holds at ``state`` under every assignment."""
    ev = Evaluator(model, cfg)
    return ev.satisfies(state, ev.default_tables(), universal_closure(phi, model.names))


def holds_in_model(model: Ecgm, phi: f.Formula, cfg: EvalConfig | None = None) -> bool:
    return satisfied_at_state(model, model.initial, phi, cfg)
