"""Syntactic first-order unification over CL terms with metavariables."""

from __future__ import annotations

import logging
from collections import deque
from typing import Iterable

from ipobisim.errors import UnificationError
from ipobisim.terms import (
    App,
    CLTerm,
    Kp,
    Meta,
    Sp,
    Spp,
    Substitution,
    apply_subst,
    fresh_metavar,
    metavars,
    rename,
)

LOG = logging.getLogger(__name__)


def mgu(a: CLTerm, b: CLTerm) -> Substitution:
    """Most general unifier of ``a`` and ``b``, idempotent.

    When both sides of a pair are variables the left one is bound, so callers
    pass rule patterns on the left to keep state variables unbound.
    """
    bindings: dict[str, CLTerm] = {}
    work: deque[tuple[CLTerm, CLTerm]] = deque([(a, b)])
    while work:
        s, t = work.popleft()
        s, t = _walk(s, bindings), _walk(t, bindings)
        if s == t:
            continue
        match s, t:
            case Meta(x), _:
                _bind(x, t, bindings)
            case _, Meta(y):
                _bind(y, s, bindings)
            case App(f1, a1), App(f2, a2):
                work.append((f1, f2))
                work.append((a1, a2))
            case Kp(x1), Kp(x2):
                work.append((x1, x2))
            case Sp(x1), Sp(x2):
                work.append((x1, x2))
            case Spp(x1, y1), Spp(x2, y2):
                work.append((x1, x2))
                work.append((y1, y2))
            case _:
                raise UnificationError(f"constructor clash: {s!r} vs {t!r}")
    return Substitution.of({x: _resolve(t, bindings) for x, t in bindings.items()})


def _walk(t: CLTerm, bindings: dict[str, CLTerm]) -> CLTerm:
    while isinstance(t, Meta) and t.name in bindings:
        t = bindings[t.name]
    return t


def _bind(name: str, t: CLTerm, bindings: dict[str, CLTerm]) -> None:
    if _occurs(name, t, bindings):
        raise UnificationError(f"occurs check: ?{name} in {t!r}")
    bindings[name] = t


def _occurs(name: str, t: CLTerm, bindings: dict[str, CLTerm]) -> bool:
    stack = [t]
    while stack:
        u = _walk(stack.pop(), bindings)
        match u:
            case Meta(x):
                if x == name:
                    return True
            case Kp(x) | Sp(x):
                stack.append(x)
            case Spp(x, y) | App(x, y):
                stack.append(x)
                stack.append(y)
    return False


def _resolve(t: CLTerm, bindings: dict[str, CLTerm]) -> CLTerm:
    t = _walk(t, bindings)
    match t:
        case Kp(x):
            return Kp(_resolve(x, bindings))
        case Sp(x):
            return Sp(_resolve(x, bindings))
        case Spp(x, y):
            return Spp(_resolve(x, bindings), _resolve(y, bindings))
        case App(x, y):
            return App(_resolve(x, bindings), _resolve(y, bindings))
    return t


def unifies(theta: Substitution, a: CLTerm, b: CLTerm) -> bool:
    return apply_subst(a, theta) == apply_subst(b, theta)


def rename_apart(t: CLTerm, avoid: Iterable[str]) -> tuple[CLTerm, dict[str, str]]:
    """Rename every metavariable of ``t`` to a fresh ``y<n>`` outside ``avoid``."""
    taken = set(avoid)
    renaming: dict[str, str] = {}
    for name in metavars(t):
        fresh = fresh_metavar(taken)
        taken.add(fresh)
        renaming[name] = fresh
    return rename(t, renaming), renaming
