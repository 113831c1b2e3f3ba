"""QPTL satisfiability through ESL model checking, plus a brute-force oracle.

Each proposition p becomes an agent that sets its own bit every step:
locals ``bot``/``top``, actions ``f``/``t``, both always enabled. An atom
p is translated to ``X p`` (the bit the agent is about to write) and a
proposition quantifier to a strategy quantifier over that agent. The
evaluation induced by an assignment is the sequence of states its outcome
run visits after the initial one.

With finite recall only some evaluations are expressible, so SAT answers
are sound while UNSAT answers only hold at the given recall.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import formula as f
from .checker import EXISTENTIAL, existential_closure, leading_block, model_check
from .errors import BoundsExceeded, EmptyAP, SearchSpaceExceeded, UnknownProposition
from .evaluator import EvalConfig, Evaluator
from .model import Ecgm, validate_model
from .parser import KEYWORDS, Parser

BOT, TOP = "bot", "top"
ACT_F, ACT_T = "f", "t"

SAT = "SAT"
UNSAT = "UNSAT"
CAP_EXCEEDED = "CAP-EXCEEDED"


# -- syntax -----------------------------------------------------------------

@dataclass(frozen=True)
class Qptl:
    def children(self):
        return ()


@dataclass(frozen=True)
class QAtom(Qptl):
    name: str


@dataclass(frozen=True)
class QNot(Qptl):
    sub: Qptl

    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class QImplies(Qptl):
    left: Qptl
    right: Qptl

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class QNext(Qptl):
    sub: Qptl

    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class QUntil(Qptl):
    left: Qptl
    right: Qptl

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class QEventually(Qptl):
    sub: Qptl

    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class QExists(Qptl):
    prop: str
    sub: Qptl

    def children(self):
        return (self.sub,)


_QFALSE = QAtom(f.FALSE_ATOM)
_QTRUE = QNot(_QFALSE)


class QptlParser(Parser):
    """ESL syntax without K; quantifiers read ``exists p.`` / ``forall p.``."""

    def quant(self):
        universal = self.advance().text == "forall"
        prop = self.ident("a proposition")
        if prop.kind != "word":
            raise self.fail("expected a proposition")
        self.expect(".")
        body = self.formula()
        if universal:
            return QNot(QExists(prop.text, QNot(body)))
        return QExists(prop.text, body)

    make_atom = staticmethod(lambda tok: QAtom(tok.text))
    make_true = staticmethod(lambda: _QTRUE)
    make_false = staticmethod(lambda: _QFALSE)
    make_not = staticmethod(QNot)
    make_implies = staticmethod(QImplies)
    make_next = staticmethod(QNext)
    make_until = staticmethod(QUntil)
    make_eventually = staticmethod(QEventually)
    make_globally = staticmethod(lambda a: QNot(QEventually(QNot(a))))
    make_and = staticmethod(lambda a, b: QNot(QImplies(a, QNot(b))))
    make_or = staticmethod(lambda a, b: QImplies(QNot(a), b))


def parse_qptl(text: str) -> Qptl:
    return QptlParser(text).parse()


def _walk(phi):
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def propositions(phi: Qptl) -> list:
    """Propositions in order of first occurrence (atoms and quantifiers)."""
    out = []
    for node in _walk(phi):
        name = node.prop if isinstance(node, QExists) else getattr(node, "name", None)
        if name is not None and name != f.FALSE_ATOM and name not in out:
            out.append(name)
    return out


def free_props(phi: Qptl) -> set:
    if isinstance(phi, QAtom):
        return set() if phi.name == f.FALSE_ATOM else {phi.name}
    if isinstance(phi, QExists):
        return free_props(phi.sub) - {phi.prop}
    return set().union(*map(free_props, phi.children())) if phi.children() else set()


def qptl_alternation(phi: Qptl) -> int:
    def go(node, negated, last):
        if isinstance(node, QExists):
            kind = not negated
            switches = 1 if last is not None and kind != last else 0
            return switches + go(node.sub, negated, kind)
        if isinstance(node, QNot):
            return go(node.sub, not negated, last)
        if isinstance(node, QImplies):
            return max(go(node.left, not negated, last), go(node.right, negated, last))
        return max((go(k, negated, last) for k in node.children()), default=0)

    return go(phi, False, None)


def temporal_depth(phi: Qptl) -> int:
    inner = max((temporal_depth(k) for k in phi.children()), default=0)
    return inner + (1 if isinstance(phi, (QNext, QUntil, QEventually)) else 0)


def quantifier_depth(phi: Qptl) -> int:
    inner = max((quantifier_depth(k) for k in phi.children()), default=0)
    return inner + (1 if isinstance(phi, QExists) else 0)


def _sugar(phi: Qptl):
    """(operator, operands) after folding the derived connectives back."""
    if phi == _QFALSE:
        return "false", ()
    if phi == _QTRUE:
        return "true", ()
    if isinstance(phi, QAtom):
        return "atom", ()
    if isinstance(phi, QNot):
        sub = phi.sub
        if isinstance(sub, QImplies) and isinstance(sub.right, QNot):
            return "&", (sub.left, sub.right.sub)
        if isinstance(sub, QEventually) and isinstance(sub.sub, QNot):
            return "G", (sub.sub.sub,)
        if isinstance(sub, QExists) and isinstance(sub.sub, QNot):
            return "forall", (sub.sub.sub,)
        return "!", (sub,)
    if isinstance(phi, QImplies):
        if isinstance(phi.left, QNot):
            return "|", (phi.left.sub, phi.right)
        return "->", (phi.left, phi.right)
    if isinstance(phi, QNext):
        return "X", (phi.sub,)
    if isinstance(phi, QEventually):
        return "F", (phi.sub,)
    if isinstance(phi, QUntil):
        return "U", (phi.left, phi.right)
    return "exists", (phi.sub,)


_QPREC = {"->": 1, "|": 2, "&": 3, "U": 4}


def pretty_qptl(phi: Qptl) -> str:
    """Render in the syntax accepted by :func:`parse_qptl`, with minimal parentheses."""

    def prec(node):
        op, _ = _sugar(node)
        if op in _QPREC:
            return _QPREC[op]
        return 0 if op in ("exists", "forall") else 5

    def at(node, minimum):
        text = render(node)
        return f"({text})" if prec(node) < minimum else text

    def render(node):
        op, args = _sugar(node)
        if op == "atom":
            return node.name
        if op in ("true", "false"):
            return op
        if op in ("exists", "forall"):
            prop = node.prop if op == "exists" else node.sub.prop
            return f"{op} {prop}. {render(args[0])}"
        if op in ("!", "X", "F", "G"):
            sep = "" if op == "!" else " "
            return op + sep + at(args[0], 5)
        level = _QPREC[op]
        right_assoc = op in ("->", "U")
        lhs = at(args[0], level + 1 if right_assoc else level)
        rhs = at(args[1], level if right_assoc else level + 1)
        return f"{lhs} {op} {rhs}"

    return render(phi)


# -- reduction ----------------------------------------------------------------

def _check_ap(ap) -> tuple:
    ap = tuple(ap)
    if not ap:
        raise EmptyAP("the set of propositions is empty")
    if len(set(ap)) != len(ap):
        raise ValueError(f"duplicate propositions in {list(ap)}")
    bad = [p for p in ap if p in KEYWORDS]
    if bad:
        raise ValueError(f"reserved word(s) used as propositions: {bad}")
    return ap


def build_valuation_model(ap) -> Ecgm:
    """One bit-setting agent per proposition; 2^|AP| reachable states."""
    ap = _check_ap(ap)
    states = list(itertools.product((BOT, TOP), repeat=len(ap)))
    transitions = []
    for s in states:
        for joint in itertools.product((ACT_F, ACT_T), repeat=len(ap)):
            target = [TOP if a == ACT_T else BOT for a in joint]
            transitions.append({"from": list(s), "action": list(joint), "to": target})
    doc = {
        "agents": [
            {
                "name": p,
                "locals": [BOT, TOP],
                "actions": [ACT_F, ACT_T],
                "protocol": {BOT: [ACT_F, ACT_T], TOP: [ACT_F, ACT_T]},
            }
            for p in ap
        ],
        "initial": [BOT] * len(ap),
        "transitions": transitions,
        "atoms": {p: [list(s) for s in states if s[k] == TOP] for k, p in enumerate(ap)},
    }
    return validate_model(doc)


def translate(phi: Qptl, ap) -> f.Formula:
    """Homomorphic translation; atoms p become ``X p``, ``exists p`` binds agent p."""
    ap = set(ap)

    def tr(node):
        if isinstance(node, QAtom):
            if node.name == f.FALSE_ATOM:
                return f.false_()
            if node.name not in ap:
                raise UnknownProposition(node.name)
            return f.Next(f.Atom(node.name))
        if isinstance(node, QNot):
            return f.Not(tr(node.sub))
        if isinstance(node, QImplies):
            return f.Implies(tr(node.left), tr(node.right))
        if isinstance(node, QNext):
            return f.Next(tr(node.sub))
        if isinstance(node, QUntil):
            return f.Until(tr(node.left), tr(node.right))
        if isinstance(node, QEventually):
            return f.eventually(tr(node.sub))
        if isinstance(node, QExists):
            if node.prop not in ap:
                raise UnknownProposition(node.prop)
            return f.Exists(f"x_{node.prop}", node.prop, tr(node.sub))
        raise TypeError(f"not a QPTL node: {node!r}")

    return tr(phi)


# -- ultimately periodic evaluations --------------------------------------------

def normalize(prefix, cycle) -> tuple:
    """Canonical (prefix, cycle) of the same infinite word."""
    prefix, cycle = tuple(prefix), tuple(cycle)
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle == cycle[:d] * (n // d):
            cycle = cycle[:d]
            break
    while prefix and prefix[-1] == cycle[-1]:
        prefix = prefix[:-1]
        cycle = cycle[-1:] + cycle[:-1]
    return prefix, cycle


@dataclass(frozen=True)
class PeriodicEvaluation:
    """Per-proposition boolean words of the form prefix + cycle^omega."""

    words: tuple  # ((prop, prefix bools, cycle bools), ...)

    def value(self, prop, n: int) -> bool:
        for p, prefix, cycle in self.words:
            if p == prop:
                if n < len(prefix):
                    return prefix[n]
                return cycle[(n - len(prefix)) % len(cycle)]
        return False

    def joint(self) -> tuple:
        """Single lasso over sets of true propositions."""
        if not self.words:
            return (), (frozenset(),)
        plen = max(len(pre) for _, pre, _ in self.words)
        period = math.lcm(*(len(cyc) for _, _, cyc in self.words))
        letters = [
            frozenset(p for p, _, _ in self.words if self.value(p, n))
            for n in range(plen + period)
        ]
        return normalize(letters[:plen], letters[plen:])

    def render(self) -> dict:
        def word(pre, cyc):
            head = ",".join("t" if b else "f" for b in pre)
            loop = ",".join("t" if b else "f" for b in cyc)
            return f"{head}({loop})^w" if head else f"({loop})^w"

        return {p: word(pre, cyc) for p, pre, cyc in self.words}

    @classmethod
    def from_letters(cls, props, prefix, cycle):
        words = []
        for p in props:
            pre, cyc = normalize([p in x for x in prefix], [p in x for x in cycle])
            words.append((p, pre, cyc))
        return cls(tuple(words))


def _suffix(lasso):
    prefix, cycle = lasso
    if prefix:
        return prefix[1:], cycle
    return (), cycle[1:] + cycle[:1]


def _distinct_suffixes(lasso):
    out = [lasso]
    for _ in range(len(lasso[0]) + len(lasso[1]) - 1):
        out.append(_suffix(out[-1]))
    return out


def _override(lasso, prop, shape):
    """Replace ``prop``'s values in ``lasso`` by the boolean word ``shape``."""
    (p1, c1), (p2, c2) = lasso, shape
    plen = max(len(p1), len(p2))
    period = math.lcm(len(c1), len(c2))

    def at(pre, cyc, n):
        return pre[n] if n < len(pre) else cyc[(n - len(pre)) % len(cyc)]

    letters = []
    for n in range(plen + period):
        base = at(p1, c1, n) - {prop}
        letters.append(base | {prop} if at(p2, c2, n) else base)
    return normalize(letters[:plen], letters[plen:])


def bounded_shapes(prefix_bound: int, period_bound: int) -> list:
    """Every distinct boolean word with prefix <= prefix_bound, period <= period_bound."""
    seen = set()
    for plen in range(prefix_bound + 1):
        for clen in range(1, period_bound + 1):
            for pre in itertools.product((False, True), repeat=plen):
                for cyc in itertools.product((False, True), repeat=clen):
                    seen.add(normalize(pre, cyc))
    return sorted(seen, key=lambda w: (len(w[0]) + len(w[1]), w))


class BoundedQptl:
    """Direct QPTL semantics on lassos; quantifiers range over bounded shapes."""

    def __init__(self, prefix_bound: int, period_bound: int):
        if prefix_bound < 0 or period_bound < 1:
            raise BoundsExceeded("bounds must satisfy prefix >= 0 and period >= 1")
        self.shapes = bounded_shapes(prefix_bound, period_bound)
        self._memo = {}

    def holds(self, phi: Qptl, lasso) -> bool:
        key = (id(phi), lasso)
        got = self._memo.get(key)
        if got is None:
            got = self._memo[key] = self._holds(phi, lasso)
        return got

    def _holds(self, phi, lasso):
        if isinstance(phi, QAtom):
            return phi.name in (lasso[0][0] if lasso[0] else lasso[1][0])
        if isinstance(phi, QNot):
            return not self.holds(phi.sub, lasso)
        if isinstance(phi, QImplies):
            return (not self.holds(phi.left, lasso)) or self.holds(phi.right, lasso)
        if isinstance(phi, QNext):
            return self.holds(phi.sub, _suffix(lasso))
        if isinstance(phi, QEventually):
            return any(self.holds(phi.sub, x) for x in _distinct_suffixes(lasso))
        if isinstance(phi, QUntil):
            for x in _distinct_suffixes(lasso):
                if self.holds(phi.right, x):
                    return True
                if not self.holds(phi.left, x):
                    return False
            return False
        if isinstance(phi, QExists):
            return any(self.holds(phi.sub, _override(lasso, phi.prop, w)) for w in self.shapes)
        raise TypeError(f"not a QPTL node: {phi!r}")


def evaluate_qptl(phi: Qptl, evaluation: PeriodicEvaluation, bounds=(3, 3)) -> bool:
    """Truth of ``phi`` at time 0 of ``evaluation``.

    The leading existential quantifiers over propositions that
    ``evaluation`` assigns are instantiated by it rather than searched;
    remaining quantifiers range over shapes within ``bounds``.
    """
    given = {p for p, _, _ in evaluation.words}
    while isinstance(phi, QExists) and phi.prop in given:
        phi = phi.sub
    return BoundedQptl(*bounds).holds(phi, evaluation.joint())


@dataclass
class OracleResult:
    status: str  # SAT or UNSAT (within bounds)
    evaluation: PeriodicEvaluation | None
    bounds: tuple


def qptl_oracle(phi: Qptl, prefix_bound: int, period_bound: int, limit: int = 10**6) -> OracleResult:
    """Brute-force search of bounded evaluations for the outermost existential block.

    Free propositions count as part of that block. Nested quantifiers are
    evaluated over the same bounded shapes.
    """
    if prefix_bound < 1 or period_bound < 1:
        raise BoundsExceeded("bounds must be at least 1")
    sem = BoundedQptl(prefix_bound, period_bound)
    block = []
    body = phi
    while isinstance(body, QExists):
        block.append(body.prop)
        body = body.sub
    outer = sorted(free_props(phi)) + [p for p in block if p not in free_props(phi)]
    outer = list(dict.fromkeys(outer))
    combos = len(sem.shapes) ** len(outer)
    if combos > limit:
        raise BoundsExceeded(f"{combos} candidate evaluations exceed the limit {limit}")
    for shapes in itertools.product(sem.shapes, repeat=len(outer)):
        words = tuple((p, pre, cyc) for p, (pre, cyc) in zip(outer, shapes))
        evaluation = PeriodicEvaluation(words)
        if sem.holds(body, evaluation.joint()):
            return OracleResult(SAT, evaluation, (prefix_bound, period_bound))
    return OracleResult(UNSAT, None, (prefix_bound, period_bound))


# -- satisfiability via model checking ----------------------------------------------

@dataclass
class QptlSatResult:
    status: str  # SAT, UNSAT (at this recall) or CAP-EXCEEDED
    recall: int
    props: tuple
    evaluation: PeriodicEvaluation | None = None
    witnesses: dict | None = None
    # the evaluation satisfies the formula under direct QPTL semantics
    certified: bool = False
    detail: str = ""

    def describe(self) -> str:
        if self.status == UNSAT:
            return f"UNSAT at recall {self.recall}"
        if self.status == SAT and not self.certified:
            return "SAT (uncertified)"
        return self.status


def _letters(model, states):
    return [frozenset(p for p, l in zip(model.names, s) if l == TOP) for s in states]


def induced_evaluation(model: Ecgm, cfg: EvalConfig, witnesses: dict, chain,
                       positional: bool = False) -> PeriodicEvaluation:
    """Evaluation read off an outcome run from s0 under the witness strategies.

    Position n of the evaluation is state n + 1 of the run. By default the
    run is the recall-bounded outcome; with ``positional`` every step
    consults the singleton window of the current state only.
    """
    ev = Evaluator(model, cfg)
    space = ev.space
    tables = list(ev.default_tables())
    for node in chain:
        i = model.agent_index(node.agent)
        tables[i] = space.encode(witnesses[node.var])
    s0 = ev.state_index(model.initial)
    if positional:
        seq, seen = [s0], {s0: 0}
        while True:
            t, _ = space.step(space.single[seq[-1]], tables)
            if t in seen:
                start = seen[t]
                break
            seen[t] = len(seq)
            seq.append(t)
    else:
        seq, start = space.run(s0, tuple(tables))
    states = [space.states[k] for k in seq]
    if start >= 1:
        prefix, cycle = states[1:start], states[start:]
    else:
        prefix, cycle = [], states[1:] + states[:1]
    return PeriodicEvaluation.from_letters(
        model.names, _letters(model, prefix), _letters(model, cycle)
    )


def qptl_sat(phi: Qptl, recall: int = 1, props=None, cap=None, jobs: int = 1) -> QptlSatResult:
    """Satisfiability of ``phi`` through model checking the translated sentence.

    A SAT verdict comes with the evaluation induced by the witness
    strategies. It is checked against direct QPTL semantics; when the
    recall-bounded run fails the check, the positional run is tried, and
    ``certified`` records whether the reported evaluation passed.
    """
    ap = _check_ap(props if props else propositions(phi))
    model = build_valuation_model(ap)
    esl = translate(phi, ap)
    cfg = EvalConfig(recall=recall) if cap is None else EvalConfig(recall=recall, cap=cap)
    try:
        verdict = model_check(model, esl, cfg, closure=EXISTENTIAL, witness=True, jobs=jobs)
    except SearchSpaceExceeded as exc:
        return QptlSatResult(CAP_EXCEEDED, recall, ap, detail=str(exc))
    if not verdict.result:
        return QptlSatResult(UNSAT, recall, ap)
    chain = leading_block(existential_closure(esl, model.names), f.Exists)
    first = None
    for positional in (False, True):
        evaluation = induced_evaluation(model, cfg, verdict.witnesses, chain, positional)
        if evaluate_qptl(phi, evaluation):
            return QptlSatResult(SAT, recall, ap, evaluation, verdict.witnesses, certified=True)
        first = first or evaluation
    return QptlSatResult(SAT, recall, ap, first, verdict.witnesses, certified=False)
