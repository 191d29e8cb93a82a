"""Exhaustive and seeded invariant checks, runnable from ``ipobisim prop invariants``."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable

from ipobisim.errors import UnificationError
from ipobisim.ipo import TAU, Config, LabelSet, labels_table
from ipobisim.reduction import Calculus, Halted, Stepped, Strategy, reactive_steps, step
from ipobisim.syntax import format_term, parse_term
from ipobisim.terms import (
    BareVar,
    Flavor,
    HeadStuck,
    Reducible,
    Term,
    Value,
    apply_subst,
    classify_cbv,
    classify_lazy,
    critical_variable,
    enumerate_lambda,
    enumerate_terms,
    is_cbv_value,
    metavars,
)
from ipobisim.unify import mgu

LOG = logging.getLogger(__name__)


@dataclass
class InvariantReport:
    checked: dict[str, int] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    bounds: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "bounds": dict(self.bounds),
            "checked": dict(sorted(self.checked.items())),
            "failures": self.failures,
        }


def _run(report: InvariantReport, name: str, terms: Iterable[Term], check: Callable[[Term], bool]) -> None:
    count = 0
    for t in terms:
        count += 1
        if not check(t):
            report.failures.append(f"{name}: {format_term(t)}")
            if len(report.failures) > 50:
                break
    report.checked[name] = count
    LOG.info("%s: %d terms", name, count)


def stepper_agrees(t: Term, calculus: Calculus, strategy: Strategy) -> bool:
    """The strategy stepper and the reactive-context search give the same successor."""
    result = step(t, calculus, strategy)
    found = reactive_steps(t, calculus, strategy)
    if isinstance(result, Stepped):
        return found == [result.next]
    return found == []


def _lazy_partition(t: Term) -> bool:
    guards = [
        isinstance(classify_lazy(t), c) for c in (BareVar, HeadStuck, Value, Reducible)
    ]
    stepped = isinstance(step(t, Calculus.CLSTAR, Strategy.LAZY), Stepped)
    return sum(guards) == 1 and stepped == isinstance(classify_lazy(t), Reducible)


def _cbv_class_consistent(t: Term) -> bool:
    cls = classify_cbv(t)
    stepped = isinstance(step(t, Calculus.CLSTAR, Strategy.CBV), Stepped)
    if stepped != isinstance(cls, Reducible):
        return False
    cr = critical_variable(t)
    return cr is None or cr in metavars(t)


def _finite_branching(t: Term) -> bool:
    labels = labels_table(t, Config(label_set=LabelSet.FINITE))
    if len(labels) > 5:
        return False
    if isinstance(classify_lazy(t), (Value, Reducible)) and len(labels) != 1:
        return False
    return (TAU in labels) == isinstance(classify_lazy(t), Reducible)


def _cbv_values_halt(t: Term) -> bool:
    return not is_cbv_value(t) or isinstance(step(t, Calculus.CLSTAR, Strategy.CBV), Halted)


def check_invariants(max_size: int = 8, seed: int = 0, mgu_pairs: int = 10_000) -> InvariantReport:
    """Determinism/agreement of all steppers, classification, labels, round trips and mgu.

    Closed corpora go up to ``max_size``; corpora with metavariables stop at
    size 6, where the count of terms with two metavariables is already near
    a million.
    """
    open_size = min(max_size, 6)
    small_open = min(max_size, 5)
    report = InvariantReport(bounds={"max_size": max_size, "open_size": open_size, "small_open": small_open})
    if open_size < max_size:
        LOG.warning("corpora with metavariables capped at size %d", open_size)

    for strategy in (Strategy.LAZY, Strategy.CBV):
        _run(
            report,
            f"agreement/lambda/{strategy.value}",
            enumerate_lambda(max_size),
            lambda t, s=strategy: stepper_agrees(t, Calculus.LAMBDA, s),
        )
        _run(
            report,
            f"agreement/cl/{strategy.value}",
            enumerate_terms(max_size, (), Flavor.PLAIN),
            lambda t, s=strategy: stepper_agrees(t, Calculus.CL, s),
        )
    _run(
        report,
        "agreement/clstar/lazy",
        enumerate_terms(max_size, (), Flavor.STAR),
        lambda t: stepper_agrees(t, Calculus.CLSTAR, Strategy.LAZY),
    )
    _run(
        report,
        "agreement/clstar/cbv",
        enumerate_terms(max_size, (), Flavor.STAR_CBV),
        lambda t: stepper_agrees(t, Calculus.CLSTAR, Strategy.CBV),
    )
    _run(report, "cbv-values-halt", enumerate_terms(open_size, ("x",), Flavor.STAR_CBV), _cbv_values_halt)
    _run(report, "partition/lazy", enumerate_terms(open_size, ("x",), Flavor.STAR), _lazy_partition)
    _run(report, "classes/cbv", enumerate_terms(open_size, ("x",), Flavor.STAR_CBV), _cbv_class_consistent)
    _run(report, "finite-branching", enumerate_terms(small_open, ("x", "y"), Flavor.STAR), _finite_branching)
    _run(
        report,
        "round-trip/cl",
        enumerate_terms(open_size, ("x",), Flavor.STAR),
        lambda t: parse_term(format_term(t), "cl") == t,
    )
    _run(
        report,
        "round-trip/lambda",
        enumerate_lambda(max_size),
        lambda t: parse_term(format_term(t), "lambda") == t,
    )
    _check_mgu(report, seed, mgu_pairs, open_size)
    return report


def _check_mgu(report: InvariantReport, seed: int, pairs: int, size_bound: int) -> None:
    corpus = list(enumerate_terms(size_bound, ("x1", "x2"), Flavor.STAR))
    rng = random.Random(seed)
    unified = 0
    for _ in range(pairs):
        a, b = rng.choice(corpus), rng.choice(corpus)
        try:
            theta = mgu(a, b)
        except UnificationError:
            continue
        unified += 1
        ta, tb = apply_subst(a, theta), apply_subst(b, theta)
        if ta != tb:
            report.failures.append(f"mgu unsound: {format_term(a)} =? {format_term(b)}")
        elif apply_subst(ta, theta) != ta:
            report.failures.append(f"mgu not idempotent: {format_term(a)} =? {format_term(b)}")
    report.checked["mgu"] = pairs
    LOG.info("mgu: %d pairs, %d unifiable", pairs, unified)
