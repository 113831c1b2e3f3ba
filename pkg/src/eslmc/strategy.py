"""Bounded-recall strategies, assignments and their unique outcome runs.

A gamma-recall strategy maps every history window (a connected sequence of
at most gamma reachable states) to an action the agent's protocol allows at
the window's last state. Only connected windows are ever consulted by an
outcome run, so tables are indexed by exactly those.

:class:`StrategySpace` holds the integer-indexed tables the evaluator works
on; the public :class:`Strategy` / :class:`Assignment` values use names.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import cached_property

from .errors import RecallMismatch, RecallZero, SearchSpaceExceeded
from .model import Ecgm

PERFECT = "perfect"
UNIFORM = "uniform"
MODES = (PERFECT, UNIFORM)

DEFAULT_CAP = 10**7


def default_cap() -> int:
    raw = os.environ.get("ESLMC_CAP")
    return int(raw) if raw else DEFAULT_CAP


class NeedChoice(Exception):
    """Raised when a partial strategy table is consulted at an open window."""

    def __init__(self, agent: int, window: int):
        self.agent = agent
        self.window = window


@dataclass(frozen=True)
class Strategy:
    agent: str
    recall: int
    table: tuple  # ((window, action), ...) in canonical window order

    @cached_property
    def _lookup(self):
        return dict(self.table)

    def __call__(self, window):
        return self._lookup[tuple(window)]

    def lines(self) -> list:
        return [f"{format_window(w)} => {a}" for w, a in self.table]


@dataclass(frozen=True)
class Assignment:
    agents: tuple
    strategies: tuple

    def __post_init__(self):
        recalls = {s.recall for s in self.strategies}
        if len(recalls) > 1:
            raise RecallMismatch(f"strategies with different recalls {sorted(recalls)}")

    def __getitem__(self, agent) -> Strategy:
        return self.strategies[self.agents.index(agent)]

    @property
    def recall(self) -> int:
        return self.strategies[0].recall


@dataclass(frozen=True)
class LassoRun:
    origin: tuple
    prefix: tuple
    cycle: tuple

    def __len__(self):
        return len(self.prefix) + len(self.cycle)

    def state_at(self, k: int):
        if k < len(self.prefix):
            return self.prefix[k]
        return self.cycle[(k - len(self.prefix)) % len(self.cycle)]

    def expand(self, n: int) -> list:
        return [self.state_at(k) for k in range(n)]


def format_state(state) -> str:
    return ",".join(state)


def format_window(window) -> str:
    return " ; ".join(format_state(s) for s in window)


class StrategySpace:
    """Indexed windows and per-agent choice slots for one model and recall.

    States and windows are ints (positions in canonical order). Internal
    strategy tables are tuples with one action index per window; ``None``
    marks an open entry of a partial table.
    """

    def __init__(self, model: Ecgm, recall: int, mode: str = PERFECT):
        if recall < 1:
            raise RecallZero("recall must be at least 1")
        if mode not in MODES:
            raise ValueError(f"unknown strategy mode {mode!r}")
        self.model = model
        self.recall = recall
        self.mode = mode
        self.states = model.reachable
        self.index = {s: k for k, s in enumerate(self.states)}
        n_agents = len(model.agents)
        self.n_agents = n_agents

        act_pos = [{x: k for k, x in enumerate(a.actions)} for a in model.agents]
        # trans[s][joint action indices] -> target state index
        self.trans = []
        self.succ = []
        for s in self.states:
            row = {}
            for joint, t in model.successors(s):
                row[tuple(act_pos[i][x] for i, x in enumerate(joint))] = self.index[t]
            self.trans.append(row)
            self.succ.append(sorted(set(row.values())))

        windows = [(k,) for k in range(len(self.states))]
        frontier = list(windows)
        for _ in range(recall - 1):
            frontier = [w + (t,) for w in frontier for t in self.succ[w[-1]]]
            windows.extend(frontier)
        self.windows = windows
        self.window_index = {w: k for k, w in enumerate(windows)}
        self.single = list(range(len(self.states)))
        self.next_window = []
        for w in windows:
            self.next_window.append(
                {t: self.window_index[(w + (t,))[-recall:]] for t in self.succ[w[-1]]}
            )

        # options[i][w]: enabled action indices of agent i at last(w)
        self.options = []
        for i, agent in enumerate(model.agents):
            per_state = [
                tuple(act_pos[i][x] for x in agent.protocol[s[i]]) for s in self.states
            ]
            self.options.append([per_state[w[-1]] for w in windows])

        # slots[i]: groups of windows that must share one action
        self.slots = []
        self.slot_of = []
        for i in range(n_agents):
            if mode == PERFECT:
                groups = [[w] for w in range(len(windows))]
            else:
                by_view = {}
                for w, win in enumerate(windows):
                    view = tuple(self.states[k][i] for k in win)
                    by_view.setdefault(view, []).append(w)
                groups = list(by_view.values())
            slot_of = [0] * len(windows)
            for g, members in enumerate(groups):
                for w in members:
                    slot_of[w] = g
            self.slots.append([tuple(g) for g in groups])
            self.slot_of.append(slot_of)

        # reach[s]: states reachable from s in the model graph (s included)
        self.reach = []
        for k in range(len(self.states)):
            seen = {k}
            todo = [k]
            while todo:
                for t in self.succ[todo.pop()]:
                    if t not in seen:
                        seen.add(t)
                        todo.append(t)
            self.reach.append(tuple(sorted(seen)))

        self.classes = []
        for i in range(n_agents):
            by_local = {}
            for k, s in enumerate(self.states):
                by_local.setdefault(s[i], []).append(k)
            self.classes.append([tuple(by_local[s[i]]) for s in self.states])

    # -- tables -------------------------------------------------------------

    @cached_property
    def empty(self) -> tuple:
        return (None,) * len(self.windows)

    def least_table(self, agent: int) -> tuple:
        return tuple(opts[0] for opts in self.options[agent])

    def set_choice(self, table: tuple, agent: int, window: int, action: int) -> tuple:
        """Fix ``action`` at ``window`` and at every window sharing its slot."""
        members = self.slots[agent][self.slot_of[agent][window]]
        out = list(table)
        for w in members:
            out[w] = action
        return tuple(out)

    def slot_options(self, agent: int, slot: int) -> tuple:
        return self.options[agent][self.slots[agent][slot][0]]

    def space_size(self, agent: int) -> int:
        return math.prod(len(self.slot_options(agent, g)) for g in range(len(self.slots[agent])))

    def check_cap(self, agent: int, cap: int) -> int:
        size = self.space_size(agent)
        if size > cap:
            raise SearchSpaceExceeded(size, cap)
        return size

    def iter_tables(self, agent: int):
        """Every total table of ``agent``, lexicographic in slot order."""
        groups = self.slots[agent]
        choices = [self.slot_options(agent, g) for g in range(len(groups))]
        for combo in itertools.product(*choices):
            out = [None] * len(self.windows)
            for members, a in zip(groups, combo):
                for w in members:
                    out[w] = a
            yield tuple(out)

    # -- runs -------------------------------------------------------------------

    def step(self, w: int, tables) -> tuple:
        """One step of the joint strategy from window ``w``: (target, next window)."""
        joint = []
        for i, tab in enumerate(tables):
            a = tab[w]
            if a is None:
                raise NeedChoice(i, w)
            joint.append(a)
        t = self.trans[self.windows[w][-1]][tuple(joint)]
        return t, self.next_window[w][t]

    def run(self, state: int, tables) -> tuple:
        """Outcome lasso from ``state``: (state sequence, loop start).

        Raises NeedChoice if a table entry that the run needs is open.
        """
        w = self.single[state]
        seen = {w: 0}
        seq = [state]
        trans, next_window = self.trans, self.next_window
        while True:
            joint = []
            for i, tab in enumerate(tables):
                a = tab[w]
                if a is None:
                    raise NeedChoice(i, w)
                joint.append(a)
            t = trans[seq[-1]][tuple(joint)]
            w = next_window[w][t]
            if w in seen:
                return tuple(seq), seen[w]
            seen[w] = len(seq)
            seq.append(t)

    # -- conversion to public values -------------------------------------------------

    def window_states(self, w: int) -> tuple:
        return tuple(self.states[k] for k in self.windows[w])

    def decode(self, agent: int, table: tuple) -> Strategy:
        acts = self.model.agents[agent].actions
        return Strategy(
            self.model.names[agent],
            self.recall,
            tuple((self.window_states(w), acts[a]) for w, a in enumerate(table)),
        )

    def encode(self, strategy: Strategy) -> tuple:
        if strategy.recall != self.recall:
            raise RecallMismatch(f"strategy has recall {strategy.recall}, expected {self.recall}")
        i = self.model.agent_index(strategy.agent)
        acts = self.model.agents[i].actions
        return tuple(acts.index(strategy(self.window_states(w))) for w in range(len(self.windows)))

    def encode_assignment(self, assignment: Assignment) -> tuple:
        return tuple(self.encode(assignment[name]) for name in self.model.names)

    def lasso(self, state: int, tables) -> LassoRun:
        seq, start = self.run(state, tables)
        states = [self.states[k] for k in seq]
        return LassoRun(self.states[state], tuple(states[:start]), tuple(states[start:]))


# -- module-level operations ---------------------------------------------------

_spaces = {}


def strategy_space(model: Ecgm, recall: int, mode: str = PERFECT) -> StrategySpace:
    """Cached :class:`StrategySpace` per (model, recall, mode)."""
    key = (id(model), recall, mode)
    got = _spaces.get(key)
    if got is None or got.model is not model:
        got = _spaces[key] = StrategySpace(model, recall, mode)
    return got


def feasible_windows(model: Ecgm, recall: int) -> list:
    space = strategy_space(model, recall)
    return [space.window_states(w) for w in range(len(space.windows))]


def strategy_count(model: Ecgm, agent: str, recall: int, mode: str = PERFECT) -> int:
    space = strategy_space(model, recall, mode)
    return space.space_size(model.agent_index(agent))


def enumerate_strategies(model: Ecgm, agent: str, recall: int, mode: str = PERFECT, cap=None):
    """Lazily yield every strategy of ``agent`` in lexicographic order."""
    space = strategy_space(model, recall, mode)
    i = model.agent_index(agent)
    space.check_cap(i, default_cap() if cap is None else cap)
    for table in space.iter_tables(i):
        yield space.decode(i, table)


def default_assignment(model: Ecgm, recall: int) -> Assignment:
    """Every agent plays its least enabled action at every window."""
    space = strategy_space(model, recall)
    return Assignment(
        model.names,
        tuple(space.decode(i, space.least_table(i)) for i in range(len(model.agents))),
    )


def compose(assignment: Assignment):
    """Joint strategy: window -> joint action of the members' choices."""

    def joint(window):
        return tuple(s(window) for s in assignment.strategies)

    return joint


def override(assignment: Assignment, agent: str, strategy: Strategy) -> Assignment:
    if strategy.recall != assignment.recall:
        raise RecallMismatch(
            f"strategy has recall {strategy.recall}, assignment has {assignment.recall}"
        )
    if strategy.agent != agent:
        raise ValueError(f"strategy belongs to {strategy.agent!r}, not {agent!r}")
    k = assignment.agents.index(agent)
    strategies = assignment.strategies[:k] + (strategy,) + assignment.strategies[k + 1:]
    return Assignment(assignment.agents, strategies)


def outcome_run(model: Ecgm, state, assignment: Assignment) -> LassoRun:
    space = strategy_space(model, assignment.recall)
    return space.lasso(space.index[tuple(state)], space.encode_assignment(assignment))
