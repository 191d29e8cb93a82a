"""The translation T of λ-terms into CL and the embedding E back into λ."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from ipobisim.reduction import Calculus, NormalizeOutcome, Status, Strategy, normalize_tau
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
    alpha_eq,
    enumerate_lambda,
)

LOG = logging.getLogger(__name__)

SKK = App(App(S(), K()), K())

# Bound λ-variables become metavariables with names the parser cannot produce.
_BOUND_PREFIX = "#"


def to_cl(m: Term) -> CLTerm:
    """T: λ-terms to plain CL. Free variables become metavariables of the same name.

    CL terms are returned unchanged, which is T on λ-free input.
    """
    if isinstance(m, (Var, Abs, LApp)):
        return _translate(m, [])
    return m


def _translate(m: LambdaTerm, env: list[str]) -> CLTerm:
    match m:
        case Var(None, name):
            return Meta(name)
        case Var(index):
            return Meta(env[len(env) - 1 - index])
        case LApp(f, a):
            return App(_translate(f, env), _translate(a, env))
        case Abs(body):
            bound = f"{_BOUND_PREFIX}{len(env)}"
            return abstract(bound, _translate(body, env + [bound]))
    raise TypeError(f"not a λ-term: {m!r}")


def abstract(name: str, t: CLTerm) -> CLTerm:
    """T(λx.t) for an already λ-free body, clauses matched top-down."""
    match t:
        case Meta(x) if x == name:
            return SKK
        case App(f, a):
            return App(App(S(), abstract(name, f)), abstract(name, a))
    return App(K(), t)


# E(K) = λxy.x and E(S) = λxyz.(xz)(yz)
E_K = Abs(Abs(Var(1, "x"), "y"), "x")
E_S = Abs(
    Abs(
        Abs(
            LApp(LApp(Var(2, "x"), Var(0, "z")), LApp(Var(1, "y"), Var(0, "z"))),
            "z",
        ),
        "y",
    ),
    "x",
)


def to_lambda(t: CLTerm) -> LambdaTerm:
    """E: homomorphic on application; K'/S'/S'' read as partial applications."""
    match t:
        case K():
            return E_K
        case S():
            return E_S
        case Meta(name):
            return Var(None, name)
        case Kp(a):
            return LApp(E_K, to_lambda(a))
        case Sp(a):
            return LApp(E_S, to_lambda(a))
        case Spp(a, b):
            return LApp(LApp(E_S, to_lambda(a)), to_lambda(b))
        case App(f, a):
            return LApp(to_lambda(f), to_lambda(a))
    raise TypeError(f"not a CL term: {t!r}")


class ETOutcome(str, Enum):
    CONFIRMED = "confirmed"
    FUEL_EXHAUSTED = "fuel_exhausted"
    # β-normal forms differ; only reachable through a bug in T, E or the stepper
    MISMATCH = "mismatch"


def check_ET_identity(m: LambdaTerm, fuel: int = 1000) -> ETOutcome:
    """Compare the β-normal forms of E(T(m)) and m under the normal-order oracle."""
    right = normalize_tau(m, Calculus.LAMBDA, Strategy.NORMAL_FULL, fuel)
    return _against_normal_form(m, right, fuel)


def _against_normal_form(m: LambdaTerm, right: NormalizeOutcome, fuel: int) -> ETOutcome:
    left = normalize_tau(to_lambda(to_cl(m)), Calculus.LAMBDA, Strategy.NORMAL_FULL, fuel)
    if left.status is Status.FUEL_EXHAUSTED or right.status is Status.FUEL_EXHAUSTED:
        return ETOutcome.FUEL_EXHAUSTED
    if alpha_eq(left.result, right.result):
        return ETOutcome.CONFIRMED
    LOG.warning("E(T(M)) and M have different normal forms for %r", m)
    return ETOutcome.MISMATCH


@dataclass
class CorpusReport:
    checked: int = 0
    confirmed: int = 0
    fuel_exhausted: int = 0
    mismatches: list[LambdaTerm] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_corpus(terms: Iterable[LambdaTerm], fuel: int = 1000) -> CorpusReport:
    """Run check_ET_identity over ``terms``; terms without a normal form are skipped."""
    report = CorpusReport()
    for m in terms:
        right = normalize_tau(m, Calculus.LAMBDA, Strategy.NORMAL_FULL, fuel)
        if right.status is not Status.NORMAL:
            continue
        report.checked += 1
        outcome = _against_normal_form(m, right, fuel)
        if outcome is ETOutcome.CONFIRMED:
            report.confirmed += 1
        elif outcome is ETOutcome.FUEL_EXHAUSTED:
            report.fuel_exhausted += 1
        else:
            report.mismatches.append(m)
    LOG.info(
        "E∘T corpus: %d checked, %d confirmed, %d fuel-limited",
        report.checked,
        report.confirmed,
        report.fuel_exhausted,
    )
    return report


def lambda_corpus(size_bound: int = 7) -> Iterable[LambdaTerm]:
    return enumerate_lambda(size_bound)
