"""ESL syntax trees and their static analyses.

Only the core connectives are represented: atoms, negation, implication,
next, until, individual knowledge and strategy quantifiers. The parser
desugars everything else into these nodes. Quantifiers carry an agent
and a variable name; only the agent matters semantically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

_node_ids = itertools.count()

FALSE_ATOM = "false"


@dataclass(frozen=True)
class Formula:
    nid: int = field(
        default_factory=lambda: next(_node_ids), compare=False, repr=False, kw_only=True
    )

    def children(self) -> tuple:
        return ()

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Next(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Know(Formula):
    agent: str
    sub: Formula

    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    agent: str
    sub: Formula

    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    agent: str
    sub: Formula

    def children(self):
        return (self.sub,)


Quantifier = (Exists, Forall)


# -- derived forms ------------------------------------------------------------

def false_() -> Formula:
    return Atom(FALSE_ATOM)


def true_() -> Formula:
    return Not(Atom(FALSE_ATOM))


def and_(a, b) -> Formula:
    return Not(Implies(a, Not(b)))


def or_(a, b) -> Formula:
    return Implies(Not(a), b)


def eventually(a) -> Formula:
    return Until(true_(), a)


def globally(a) -> Formula:
    return Not(Until(true_(), Not(a)))


def walk(phi: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def size(phi: Formula) -> int:
    return sum(1 for _ in walk(phi))


def depth(phi: Formula) -> int:
    kids = phi.children()
    return 1 + max(map(depth, kids)) if kids else 0


# -- free and bound agents -----------------------------------------------------

def free_agents_table(phi: Formula, agents) -> dict:
    """Map node id -> free agents for every node of ``phi``.

    Temporal operators depend on every agent's strategy, so they make the
    whole roster free; quantifiers remove their own agent.
    """
    everyone = frozenset(agents)
    table = {}

    def fr(node):
        got = table.get(node.nid)
        if got is not None:
            return got
        kids = [fr(k) for k in node.children()]
        if isinstance(node, Atom):
            out = frozenset()
        elif isinstance(node, (Not, Know)):
            out = kids[0]
        elif isinstance(node, Implies):
            out = kids[0] | kids[1]
        elif isinstance(node, (Next, Until)):
            out = everyone
        elif isinstance(node, Quantifier):
            out = kids[0] - {node.agent}
        else:
            raise TypeError(f"not a formula node: {node!r}")
        table[node.nid] = out
        return out

    fr(phi)
    return table


def free_agents(phi: Formula, agents) -> frozenset:
    return free_agents_table(phi, agents)[phi.nid]


def bound_agents(phi: Formula, agents) -> frozenset:
    return frozenset(agents) - free_agents(phi, agents)


def is_sentence(phi: Formula, agents) -> bool:
    return not free_agents(phi, agents)


# -- alternation ------------------------------------------------------------

def alternation_depth(phi: Formula) -> int:
    """Maximum number of existential/universal switches along any path.

    Polarity is tracked instead of normalising: negation and the antecedent
    of an implication flip the effective kind of the quantifiers below
    them. Knowledge and temporal operators do not interrupt a sequence.
    """

    def go(node, negated, last):
        if isinstance(node, Quantifier):
            kind = isinstance(node, Exists) != negated
            switches = 1 if last is not None and kind != last else 0
            return switches + go(node.sub, negated, kind)
        if isinstance(node, Not):
            return go(node.sub, not negated, last)
        if isinstance(node, Implies):
            return max(go(node.left, not negated, last), go(node.right, negated, last))
        kids = node.children()
        return max((go(k, negated, last) for k in kids), default=0)

    return go(phi, False, None)


# -- printing ---------------------------------------------------------------

_PREC_IMPLIES, _PREC_UNTIL, _PREC_UNARY, _PREC_ATOM = 1, 4, 5, 6


def _prec(node) -> int:
    if isinstance(node, Implies):
        return _PREC_IMPLIES
    if isinstance(node, Until):
        return _PREC_UNTIL
    if isinstance(node, Atom):
        return _PREC_ATOM
    return _PREC_UNARY


def _ends_open(node) -> bool:
    """True when the printed text ends inside a quantifier scope."""
    if isinstance(node, Quantifier):
        return True
    if isinstance(node, (Implies, Until)):
        return _ends_open(node.right)
    if isinstance(node, (Not, Next, Know)):
        return _ends_open(node.sub)
    return False


def pretty(phi: Formula) -> str:
    """Render in the concrete syntax accepted by :func:`eslmc.parser.parse_formula`."""

    def wrap(text):
        return f"({text})"

    def left(node, minimum):
        text = render(node)
        return wrap(text) if _prec(node) < minimum or _ends_open(node) else text

    def render(node):
        if isinstance(node, Atom):
            return node.name
        if isinstance(node, Not):
            return "!" + operand(node.sub)
        if isinstance(node, Next):
            return "X " + operand(node.sub)
        if isinstance(node, Know):
            return f"K[{node.agent}] " + operand(node.sub)
        if isinstance(node, Exists):
            return f"exists {node.var}:{node.agent}. " + render(node.sub)
        if isinstance(node, Forall):
            return f"forall {node.var}:{node.agent}. " + render(node.sub)
        if isinstance(node, Implies):
            return left(node.left, _PREC_IMPLIES + 1) + " -> " + render(node.right)
        if isinstance(node, Until):
            right = render(node.right)
            if _prec(node.right) < _PREC_UNTIL:
                right = wrap(right)
            return left(node.left, _PREC_UNTIL + 1) + " U " + right
        raise TypeError(f"not a formula node: {node!r}")

    def operand(node):
        text = render(node)
        return wrap(text) if _prec(node) < _PREC_UNARY else text

    return render(phi)
