"""Recursive-descent parser for the ESL concrete syntax.

Grammar, loosest binding first::

    formula := quant | implies
    quant   := ("exists" | "forall") IDENT ":" IDENT "." formula
    implies := or ("->" formula)?
    or      := and ("|" and)*
    and     := until ("&" until)*
    until   := unary ("U" until)?
    unary   := "!" unary | "X" unary | "F" unary | "G" unary
             | "K" "[" IDENT "]" unary | quant | atom
    atom    := "true" | "false" | IDENT | "(" formula ")"

A quantifier may also appear in operand position (``X exists y:B. p``);
its scope still extends as far right as possible.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from . import formula as f
from .errors import FormulaSyntaxError, UnknownAgent

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op>->|[()\[\]:.!&|])|(?P<word>[A-Za-z_][A-Za-z0-9_]*)|(?P<bad>\S))"
)

KEYWORDS = frozenset({"exists", "forall", "true", "false", "X", "F", "G", "U", "K"})


class Token(NamedTuple):
    kind: str  # "op", "word", "kw" or "end"
    text: str
    pos: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while True:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        if m.group("bad") is not None:
            raise FormulaSyntaxError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
        if m.group("op") is not None:
            tokens.append(Token("op", m.group("op"), m.start("op")))
        else:
            word = m.group("word")
            kind = "kw" if word in KEYWORDS else "word"
            tokens.append(Token(kind, word, m.start("word")))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class Parser:
    """Shared precedence-climbing skeleton; subclasses supply node builders."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def at(self, text) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def ident(self, what) -> Token:
        # keywords are accepted where only a name can occur (agent slots)
        if self.tok.kind not in ("word", "kw"):
            self.fail(f"expected {what}")
        return self.advance()

    def fail(self, message):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise FormulaSyntaxError(f"{message}, found {found}", tok.pos)

    # -- grammar ------------------------------------------------------------------

    def parse(self):
        node = self.formula()
        if self.tok.kind != "end":
            self.fail("unexpected trailing input")
        return node

    def formula(self):
        if self.at("exists") or self.at("forall"):
            return self.quant()
        return self.implies()

    def implies(self):
        left = self.or_()
        if self.at("->"):
            self.advance()
            return self.make_implies(left, self.formula())
        return left

    def or_(self):
        node = self.and_()
        while self.at("|"):
            self.advance()
            node = self.make_or(node, self.and_())
        return node

    def and_(self):
        node = self.until()
        while self.at("&"):
            self.advance()
            node = self.make_and(node, self.until())
        return node

    def until(self):
        left = self.unary()
        if self.at("U"):
            self.advance()
            return self.make_until(left, self.until())
        return left

    def unary(self):
        if self.at("!"):
            self.advance()
            return self.make_not(self.unary())
        if self.at("X"):
            self.advance()
            return self.make_next(self.unary())
        if self.at("F"):
            self.advance()
            return self.make_eventually(self.unary())
        if self.at("G"):
            self.advance()
            return self.make_globally(self.unary())
        if self.at("K"):
            return self.knowledge()
        if self.at("exists") or self.at("forall"):
            return self.quant()
        return self.atom()

    def atom(self):
        if self.at("true"):
            self.advance()
            return self.make_true()
        if self.at("false"):
            self.advance()
            return self.make_false()
        if self.at("("):
            self.advance()
            node = self.formula()
            self.expect(")")
            return node
        if self.tok.kind == "word":
            return self.make_atom(self.advance())
        self.fail("expected a formula")

    def knowledge(self):
        self.fail("knowledge operator not allowed here")

    def quant(self):
        raise NotImplementedError


class EslParser(Parser):
    def __init__(self, text, agents):
        super().__init__(text)
        self.agents = tuple(agents)

    def agent(self):
        tok = self.ident("an agent name")
        if tok.text not in self.agents:
            raise UnknownAgent(tok.text)
        return tok.text

    def knowledge(self):
        self.expect("K")
        self.expect("[")
        agent = self.agent()
        self.expect("]")
        return f.Know(agent, self.unary())

    def quant(self):
        cls = f.Exists if self.advance().text == "exists" else f.Forall
        var = self.ident("a variable name").text
        self.expect(":")
        agent = self.agent()
        self.expect(".")
        return cls(var, agent, self.formula())

    make_atom = staticmethod(lambda tok: f.Atom(tok.text))
    make_true = staticmethod(f.true_)
    make_false = staticmethod(f.false_)
    make_not = staticmethod(f.Not)
    make_implies = staticmethod(f.Implies)
    make_next = staticmethod(f.Next)
    make_until = staticmethod(f.Until)
    make_eventually = staticmethod(f.eventually)
    make_globally = staticmethod(f.globally)
    make_and = staticmethod(f.and_)
    make_or = staticmethod(f.or_)


def parse_formula(text: str, agents) -> f.Formula:
    """Parse ``text`` against the agent roster ``agents``."""
    return EslParser(text, agents).parse()
