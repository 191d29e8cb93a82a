"""Deterministic small-step reduction for every calculus/strategy pair."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

from ipobisim.errors import OpenTermError, TermError
from ipobisim.terms import (
    VALUE,
    Abs,
    App,
    BareVar,
    CLTerm,
    K,
    Kp,
    LambdaTerm,
    LApp,
    Meta,
    S,
    SpineClass,
    Sp,
    Spp,
    Term,
    Var,
    apply_all,
    is_cbv_value,
    is_lambda,
    lambda_apply_all,
    lambda_spine,
    spine,
)

LOG = logging.getLogger(__name__)

DEFAULT_FUEL = 512


class Calculus(str, Enum):
    LAMBDA = "lambda"
    CL = "cl"
    CLSTAR = "clstar"


class Strategy(str, Enum):
    LAZY = "lazy"
    CBV = "cbv"
    NORMAL_FULL = "normal_full"


@dataclass(frozen=True)
class Stepped:
    next: Term


@dataclass(frozen=True)
class Halted:
    spine_class: SpineClass


@dataclass(frozen=True)
class StuckOpen:
    var: str


StepResult = Union[Stepped, Halted, StuckOpen]


class Status(str, Enum):
    NORMAL = "normal"
    FUEL_EXHAUSTED = "fuel_exhausted"


@dataclass(frozen=True)
class NormalizeOutcome:
    result: Term
    status: Status
    steps: int

    @property
    def halted(self) -> bool:
        return self.status is Status.NORMAL


def step(t: Term, calculus: Calculus | str, strategy: Strategy | str) -> StepResult:
    """One step of ``strategy``; at most one successor exists."""
    calculus, strategy = Calculus(calculus), Strategy(strategy)
    if calculus is Calculus.LAMBDA:
        if not is_lambda(t):
            raise TermError(f"not a λ-term: {t!r}")
        if strategy is Strategy.NORMAL_FULL:
            return _step_lambda_normal(t)
        if strategy is Strategy.LAZY:
            return _step_lambda_lazy(t)
        return _step_lambda_cbv(t)
    if is_lambda(t):
        raise TermError(f"not a CL term: {t!r}")
    if strategy is Strategy.NORMAL_FULL:
        raise TermError("normal_full is a λ-calculus oracle stepper")
    if calculus is Calculus.CL:
        return _step_cl_lazy(t) if strategy is Strategy.LAZY else _step_cl_cbv(t)
    return _step_star_lazy(t) if strategy is Strategy.LAZY else _step_star_cbv(t)


def normalize_tau(
    t: Term, calculus: Calculus | str, strategy: Strategy | str, fuel: int = DEFAULT_FUEL
) -> NormalizeOutcome:
    steps = 0
    while steps < fuel:
        result = step(t, calculus, strategy)
        if not isinstance(result, Stepped):
            return NormalizeOutcome(t, Status.NORMAL, steps)
        t = result.next
        steps += 1
    if isinstance(step(t, calculus, strategy), Stepped):
        LOG.debug("fuel exhausted after %d steps", steps)
        return NormalizeOutcome(t, Status.FUEL_EXHAUSTED, steps)
    return NormalizeOutcome(t, Status.NORMAL, steps)


def _map(result: StepResult, rebuild: Callable[[Term], Term]) -> StepResult:
    if isinstance(result, Stepped):
        return Stepped(rebuild(result.next))
    return result


# ------------------------------------------------------------------
#                          LAMBDA CALCULUS
# ------------------------------------------------------------------
def shift(m: LambdaTerm, d: int, cutoff: int = 0) -> LambdaTerm:
    match m:
        case Var(index, name) if index is not None and index >= cutoff:
            return Var(index + d, name)
        case Var():
            return m
        case Abs(body, name):
            return Abs(shift(body, d, cutoff + 1), name)
        case LApp(f, a):
            return LApp(shift(f, d, cutoff), shift(a, d, cutoff))
    raise TermError(f"not a λ-term: {m!r}")


def _replace(m: LambdaTerm, depth: int, s: LambdaTerm) -> LambdaTerm:
    """Substitute ``s`` for index ``depth`` and close the gap left by the removed binder.

    ``s`` is shifted once, at the occurrence, by the binders crossed to reach it.
    """
    match m:
        case Var(index, name) if index is not None and index >= depth:
            if index > depth:
                return Var(index - 1, name)
            return shift(s, depth) if depth else s
        case Var():
            return m
        case Abs(body, name):
            return Abs(_replace(body, depth + 1, s), name)
        case LApp(f, a):
            return LApp(_replace(f, depth, s), _replace(a, depth, s))
    raise TermError(f"not a λ-term: {m!r}")


def beta(fun: Abs, arg: LambdaTerm) -> LambdaTerm:
    """Contract ``(λx.body) arg``."""
    return _replace(fun.body, 0, arg)


def substitute_free(m: LambdaTerm, name: str, s: LambdaTerm) -> LambdaTerm:
    """Replace the free variable ``name`` by the closed term ``s``."""
    match m:
        case Var(None, n) if n == name:
            return s
        case Var():
            return m
        case Abs(body, binder):
            return Abs(substitute_free(body, name, s), binder)
        case LApp(f, a):
            return LApp(substitute_free(f, name, s), substitute_free(a, name, s))
    raise TermError(f"not a λ-term: {m!r}")


def _step_lambda_lazy(m: LambdaTerm) -> StepResult:
    head, args = lambda_spine(m)
    if isinstance(head, Var):
        raise OpenTermError(head.name)
    if not args:
        return Halted(VALUE)
    return Stepped(lambda_apply_all(beta(head, args[0]), args[1:]))


def _step_lambda_cbv(m: LambdaTerm) -> StepResult:
    match m:
        case Var(_, name):
            raise OpenTermError(name)
        case Abs():
            return Halted(VALUE)
        case LApp(f, a):
            if not isinstance(f, Abs):
                return _map(_step_lambda_cbv(f), lambda f2: LApp(f2, a))
            if not isinstance(a, Abs):
                return _map(_step_lambda_cbv(a), lambda a2: LApp(f, a2))
            return Stepped(beta(f, a))
    raise TermError(f"not a λ-term: {m!r}")


def _step_lambda_normal(m: LambdaTerm) -> StepResult:
    # Leftmost-outermost, also under binders; only used to decide =β.
    match m:
        case Var():
            return Halted(VALUE)
        case Abs(body, name):
            return _map(_step_lambda_normal(body), lambda b: Abs(b, name))
        case LApp(Abs() as f, a):
            return Stepped(beta(f, a))
        case LApp(f, a):
            result = _step_lambda_normal(f)
            if isinstance(result, Stepped):
                return Stepped(LApp(result.next, a))
            return _map(_step_lambda_normal(a), lambda a2: LApp(f, a2))
    raise TermError(f"not a λ-term: {m!r}")


# ------------------------------------------------------------------
#                        COMBINATORY LOGIC
# ------------------------------------------------------------------
def arity(head: CLTerm) -> int:
    if isinstance(head, K):
        return 2
    if isinstance(head, S):
        return 3
    raise TermError(f"CL* constructor in a plain CL term: {head!r}")


def fire_plain(head: CLTerm, args: list[CLTerm]) -> CLTerm:
    if isinstance(head, K):
        return args[0]
    m1, m2, m3 = args
    return App(App(m1, m3), App(m2, m3))


def is_plain_cbv_value(t: CLTerm) -> bool:
    head, args = spine(t)
    if isinstance(head, Meta):
        return False
    return len(args) < arity(head) and all(is_plain_cbv_value(a) for a in args)


def _step_cl_lazy(t: CLTerm) -> StepResult:
    head, args = spine(t)
    if isinstance(head, Meta):
        return StuckOpen(head.name)
    n = arity(head)
    if len(args) < n:
        return Halted(VALUE)
    return Stepped(apply_all(fire_plain(head, args[:n]), args[n:]))


def _step_cl_cbv(t: CLTerm) -> StepResult:
    head, args = spine(t)
    if isinstance(head, Meta):
        return StuckOpen(head.name)
    n = arity(head)
    for i, a in enumerate(args[:n]):
        if not is_plain_cbv_value(a):
            return _map(
                _step_cl_cbv(a),
                lambda a2, i=i: apply_all(head, args[:i] + [a2] + args[i + 1 :]),
            )
    if len(args) < n:
        return Halted(VALUE)
    return Stepped(apply_all(fire_plain(head, args[:n]), args[n:]))


def fire_star(fun: CLTerm, arg: CLTerm) -> CLTerm:
    """Contract ``fun arg`` where ``fun`` is a combinator form."""
    match fun:
        case K():
            return Kp(arg)
        case S():
            return Sp(arg)
        case Kp(m):
            return m
        case Sp(m):
            return Spp(m, arg)
        case Spp(m, n):
            return App(App(m, arg), App(n, arg))
    raise TermError(f"not a combinator form: {fun!r}")


def _step_star_lazy(t: CLTerm) -> StepResult:
    head, args = spine(t)
    if isinstance(head, Meta):
        return StuckOpen(head.name)
    if not args:
        return Halted(VALUE)
    return Stepped(apply_all(fire_star(head, args[0]), args[1:]))


def _step_star_cbv(t: CLTerm) -> StepResult:
    match t:
        case Meta(name):
            return Halted(BareVar(name))
        case K() | S():
            return Halted(VALUE)
        case Kp(a):
            return Halted(VALUE) if is_cbv_value(a) else _map(_step_star_cbv(a), Kp)
        case Sp(a):
            return Halted(VALUE) if is_cbv_value(a) else _map(_step_star_cbv(a), Sp)
        case Spp(a, b):
            if not is_cbv_value(a):
                return _map(_step_star_cbv(a), lambda a2: Spp(a2, b))
            if not is_cbv_value(b):
                return _map(_step_star_cbv(b), lambda b2: Spp(a, b2))
            return Halted(VALUE)
        case App(f, a):
            if not is_cbv_value(f):
                return _map(_step_star_cbv(f), lambda f2: App(f2, a))
            if not is_cbv_value(a):
                return _map(_step_star_cbv(a), lambda a2: App(f, a2))
            if isinstance(f, Meta):
                return StuckOpen(f.name)
            return Stepped(fire_star(f, a))
    raise TermError(f"not a CL* term: {t!r}")


# ------------------------------------------------------------------
#                     CONTEXT-SEARCH STEPPER
# ------------------------------------------------------------------
def contract(t: Term, calculus: Calculus | str, strategy: Strategy | str) -> Term | None:
    """Contractum when ``t`` itself is a rule instance for the strategy, else None."""
    calculus, strategy = Calculus(calculus), Strategy(strategy)
    if calculus is Calculus.LAMBDA:
        if isinstance(t, LApp) and isinstance(t.fun, Abs):
            if strategy is Strategy.LAZY or isinstance(t.arg, Abs):
                return beta(t.fun, t.arg)
        return None
    if calculus is Calculus.CL:
        head, args = spine(t)
        if isinstance(head, (K, S)) and len(args) == arity(head):
            if strategy is Strategy.LAZY or all(is_plain_cbv_value(a) for a in args):
                return fire_plain(head, args)
        return None
    if isinstance(t, App) and isinstance(t.fun, (K, S, Kp, Sp, Spp)):
        if strategy is Strategy.LAZY or (is_cbv_value(t.fun) and is_cbv_value(t.arg)):
            return fire_star(t.fun, t.arg)
    return None


def _reactive_children(t: Term, calculus: Calculus, strategy: Strategy):
    """Immediate subterms in reactive position, each with its plug-back function."""
    if not isinstance(t, (App, LApp)):
        return []
    node = type(t)
    f, a = t.fun, t.arg
    children = [(f, lambda r: node(r, a))]
    if strategy is Strategy.LAZY:
        return children
    if calculus is Calculus.LAMBDA:
        value_fun = isinstance(f, Abs)
    elif calculus is Calculus.CL:
        head, args = spine(f)
        value_fun = (
            isinstance(head, (K, S))
            and len(args) < arity(head)
            and all(is_plain_cbv_value(x) for x in args)
        )
    else:
        value_fun = is_cbv_value(f)
    if value_fun:
        children.append((a, lambda r: node(f, r)))
    return children


def reactive_steps(t: Term, calculus: Calculus | str, strategy: Strategy | str) -> list[Term]:
    """Every ``D[r']`` with ``t = D[r]``, ``D`` reactive and ``r → r'`` a rule instance."""
    calculus, strategy = Calculus(calculus), Strategy(strategy)
    out: list[Term] = []

    def visit(u: Term, plug: Callable[[Term], Term]) -> None:
        reduct = contract(u, calculus, strategy)
        if reduct is not None:
            out.append(plug(reduct))
        for sub, wrap in _reactive_children(u, calculus, strategy):
            visit(sub, lambda r, wrap=wrap: plug(wrap(r)))

    visit(t, lambda r: r)
    return out
