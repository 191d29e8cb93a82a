"""Surface syntax: a recursive-descent parser and the canonical printers.

λ grammar::

    term  ::= ('\\' | 'λ') ident+ '.' term | atom+
    atom  ::= ident | '(' term ')'

CL grammar (application by juxtaposition, so ``SKK`` and ``S K K`` agree)::

    term  ::= atom+
    atom  ::= 'K' | 'S' | "K'(" term ')' | "S'(" term ')'
            | "S''(" term ',' term ')' | '?' ident | '(' term ')'
"""

from __future__ import annotations

import logging
from typing import Literal

from ipobisim.errors import OpenTermError, ParseError
from ipobisim.terms import (
    Abs,
    App,
    CLTerm,
    K,
    Kp,
    LambdaTerm,
    LApp,
    Meta,
    S,
    Sp,
    Spp,
    Term,
    Var,
    metavars,
)

LOG = logging.getLogger(__name__)

CalculusName = Literal["lambda", "cl", "clstar"]


def parse_term(text: str, calculus: CalculusName = "cl", closed: bool = False) -> Term:
    """Parse ``text`` as a λ-term (``lambda``) or a CL/CL* term."""
    if calculus == "lambda":
        term = _LambdaParser(text).parse()
    else:
        term = _CLParser(text).parse()
    if closed:
        free = metavars(term)
        if free:
            raise OpenTermError(free[0])
    return term


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            raise ParseError(self.pos, repr(token), self.text)
        self.pos += len(token)

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        if start < len(self.text) and (self.text[start].isalpha() or self.text[start] == "_"):
            self.pos += 1
            while self.pos < len(self.text) and (
                self.text[self.pos].isalnum() or self.text[self.pos] == "_"
            ):
                self.pos += 1
            return self.text[start : self.pos]
        raise ParseError(start, "identifier", self.text)

    def end(self) -> None:
        self.skip_ws()
        if self.pos != len(self.text):
            raise ParseError(self.pos, "end of input", self.text)


class _LambdaParser(_Reader):
    def parse(self) -> LambdaTerm:
        if not self.peek():
            raise ParseError(self.pos, "term", self.text)
        term = self.term([])
        self.end()
        return term

    def term(self, env: list[str]) -> LambdaTerm:
        if self.peek() in ("\\", "λ"):
            self.pos += 1
            names = [self.ident()]
            while self.peek() not in (".", ""):
                names.append(self.ident())
            self.expect(".")
            body = self.term(env + names)
            for name in reversed(names):
                body = Abs(body, name)
            return body
        fun = self.atom(env)
        while self.peek() and self.peek() not in (")",):
            if self.peek() in ("\\", "λ"):
                fun = LApp(fun, self.term(env))
                break
            fun = LApp(fun, self.atom(env))
        return fun

    def atom(self, env: list[str]) -> LambdaTerm:
        if self.peek() == "(":
            self.pos += 1
            inner = self.term(env)
            self.expect(")")
            return inner
        name = self.ident()
        for distance, bound in enumerate(reversed(env)):
            if bound == name:
                return Var(distance, name)
        return Var(None, name)


class _CLParser(_Reader):
    def parse(self) -> CLTerm:
        if not self.peek():
            raise ParseError(self.pos, "term", self.text)
        term = self.term()
        self.end()
        return term

    def term(self) -> CLTerm:
        fun = self.atom()
        while self.peek() and self.peek() not in (")", ","):
            fun = App(fun, self.atom())
        return fun

    def atom(self) -> CLTerm:
        c = self.peek()
        if c == "(":
            self.pos += 1
            inner = self.term()
            self.expect(")")
            return inner
        if c == "?":
            self.pos += 1
            return Meta(self.ident())
        if c in ("K", "S"):
            self.pos += 1
            primes = 0
            while self.pos < len(self.text) and self.text[self.pos] in ("'", "′", "″"):
                primes += 2 if self.text[self.pos] == "″" else 1
                self.pos += 1
            if primes == 0:
                return K() if c == "K" else S()
            if primes > 2 or (c == "K" and primes == 2):
                raise ParseError(self.pos, "K, K', S, S' or S''", self.text)
            self.expect("(")
            first = self.term()
            if primes == 2:
                self.expect(",")
                second = self.term()
                self.expect(")")
                return Spp(first, second)
            self.expect(")")
            return Kp(first) if c == "K" else Sp(first)
        raise ParseError(self.pos, "combinator, metavariable or '('", self.text)


# ------------------------------------------------------------------
#                              PRINTING
# ------------------------------------------------------------------
def format_term(t: Term) -> str:
    if isinstance(t, (Var, Abs, LApp)):
        return _format_lambda(t, [], set(metavars(t)))
    return _format_cl(t)


def format_atom(t: Term) -> str:
    """Print ``t`` so that it can stand as an application argument."""
    text = format_term(t)
    if isinstance(t, (App, LApp, Abs)):
        return f"({text})"
    return text


def _format_cl(t: CLTerm) -> str:
    match t:
        case K():
            return "K"
        case S():
            return "S"
        case Meta(name):
            return f"?{name}"
        case Kp(a):
            return f"K'({_format_cl(a)})"
        case Sp(a):
            return f"S'({_format_cl(a)})"
        case Spp(a, b):
            return f"S''({_format_cl(a)}, {_format_cl(b)})"
        case App(f, a):
            arg = _format_cl(a)
            if isinstance(a, App):
                arg = f"({arg})"
            return f"{_format_cl(f)} {arg}"
    raise TypeError(f"not a CL term: {t!r}")


def _format_lambda(m: LambdaTerm, env: list[str], free: set[str]) -> str:
    match m:
        case Var(None, name):
            return name
        case Var(index):
            return env[len(env) - 1 - index]
        case Abs():
            names = []
            while isinstance(m, Abs):
                name = _display_name(m.name, env, free)
                names.append(name)
                env = env + [name]
                m = m.body
            return "\\" + " ".join(names) + ". " + _format_lambda(m, env, free)
        case LApp(f, a):
            fun = _format_lambda(f, env, free)
            if isinstance(f, Abs):
                fun = f"({fun})"
            arg = _format_lambda(a, env, free)
            if isinstance(a, (Abs, LApp)):
                arg = f"({arg})"
            return f"{fun} {arg}"
    raise TypeError(f"not a λ-term: {m!r}")


def _display_name(name: str, env: list[str], free: set[str]) -> str:
    # A shadowing binder is renamed so that the printed text reparses to the same term.
    candidate, n = name, 0
    while candidate in env or candidate in free:
        n += 1
        candidate = f"{name}{n}"
    return candidate
