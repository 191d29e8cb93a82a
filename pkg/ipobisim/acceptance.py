"""The eight acceptance experiments, each runnable as ``ipobisim acceptance N``.

Each runner returns a JSON-ready dict with an ``ok`` flag.
"""

from __future__ import annotations

import logging
from typing import Callable, Mapping

from ipobisim.bisim import (
    Distinguished,
    Equivalent,
    Reason,
    Side,
    check_weak_bisim,
    format_verdict,
    verdict_to_json,
)
from ipobisim.ipo import Config, LabelSet, Order, check_tables, format_label
from ipobisim.oracles import (
    argument_pool,
    congruence_harness,
    contextual_oracle,
    enumerate_contexts,
)
from ipobisim.properties import check_invariants
from ipobisim.reduction import Calculus, Strategy
from ipobisim.syntax import format_term, parse_term
from ipobisim.translate import check_corpus, lambda_corpus, to_cl

LOG = logging.getLogger(__name__)

LAZY_FINITE = Config(Calculus.CLSTAR, Order.SECOND, Strategy.LAZY, LabelSet.FINITE)
CBV_REACTIVE = Config(Calculus.CLSTAR, Order.SECOND, Strategy.CBV, LabelSet.REACTIVE_ONLY)

# T(λxy.xy) exactly as it is printed in the literature.
PRINTED_T_EXPANSION = "S(S(KS)(S(KK)(SKK)))(S(S(KS)(KK))(KK))"

BETA_PAIRS: tuple[tuple[str, str], ...] = (
    (r"(\x. x) (\x. x)", r"\x. x"),
    (r"(\x. x x) (\y. y)", r"\x. x"),
    (r"(\x y. x) (\z. z)", r"\y z. z"),
    (r"(\x. x) (\x y. x)", r"\x y. x"),
    (r"(\f. f) (\x y. y)", r"\x y. y"),
    (r"\x. (\y. y) x", r"\x. x"),
    (r"(\x y. x) (\z. z) (\w. w w)", r"\z. z"),
    (r"(\x y. y) (\z. z z)", r"\y. y"),
    (r"(\x. x (\y. y)) (\z. z)", r"\y. y"),
    (r"(\x y z. x z (y z)) (\a b. a) (\a b. a)", r"\z. z"),
    (r"(\x. x x) (\y. y) (\z. z)", r"\z. z"),
    (r"(\x y. x y) (\z. z)", r"\y. y"),
    (r"\x. (\y z. y) x", r"\x z. x"),
    (r"(\f x. f (f x)) (\y. y)", r"\x. x"),
    (r"(\x. x) (\x. x) (\x. x)", r"\x. x"),
    (r"(\x y. x) (\x y. y)", r"\y x z. z"),
    (r"(\x. x (\y z. y)) (\w. w)", r"\y z. y"),
    (r"\x y. (\z. z) x y", r"\x y. x y"),
    (r"(\g. g g) (\x y. y)", r"\y. y"),
    (r"(\x y. y x) (\z. z)", r"\y. y (\z. z)"),
)

INEQUIVALENT_PAIRS: tuple[tuple[str, str], ...] = (
    (r"\x. x", r"\x y. x"),
    (r"\x. x", r"\x y. x y"),
    (r"\x y. x", r"\x y. y"),
    (r"\x. x", r"\x. x x"),
    (r"\x y. y", r"\x. x"),
    (r"\x. x x", r"\x y. x"),
    (r"\x y. y x", r"\x. x"),
    (r"\x y. x", r"\x y z. x"),
    (r"\x. x (\y. y)", r"\x. x"),
    (r"\x y. x y", r"\x y. y x"),
)


def _lam(text: str):
    return parse_term(text, "lambda", closed=True)


def coincidence(params: Mapping[str, int]) -> dict:
    verdict = check_weak_bisim(
        parse_term("K"),
        parse_term("S(K K)(S K K)"),
        LAZY_FINITE,
        params["coincidence_depth"],
        params["coincidence_fuel"],
    )
    return {"ok": verdict == Equivalent(params["coincidence_depth"]), **verdict_to_json(verdict)}


def first_order_discrimination(params: Mapping[str, int]) -> dict:
    cfg = Config(
        Calculus.CL,
        Order.FIRST,
        Strategy.LAZY,
        LabelSet.REACTIVE_ONLY,
        arg_pool=params["first_order_pool"],
    )
    verdict = check_weak_bisim(
        parse_term("K"), parse_term("S(K K)(S K K)"), cfg, params["first_order_depth"], 50
    )
    ok = (
        isinstance(verdict, Distinguished)
        and verdict.trace[-1].reason is Reason.MISSING_LABEL
        and len(verdict.trace) <= params["first_order_depth"] + 1
    )
    return {"ok": ok, **verdict_to_json(verdict)}


def cbv_counterexample(params: Mapping[str, int]) -> dict:
    identity, double = _lam(r"\x. x"), _lam(r"\x y. x y")
    left, right = to_cl(identity), parse_term(PRINTED_T_EXPANSION)
    verdict = check_weak_bisim(left, right, CBV_REACTIVE, params["cbv_depth"], 200)
    trace_ok = (
        isinstance(verdict, Distinguished)
        and len(verdict.trace) == 2
        and format_label(verdict.trace[0].label) == "[_] ?y1"
        and format_label(verdict.trace[1].label) == "[_] ?y2"
        and verdict.trace[1].side is Side.LEFT
    )
    contexts = enumerate_contexts(
        params["contextual_size"],
        argument_pool(Calculus.LAMBDA, Strategy.LAZY, params["contextual_pool"]),
        Calculus.LAMBDA,
    )
    oracle = contextual_oracle(identity, double, Calculus.LAMBDA, Strategy.LAZY, contexts, 200)
    return {
        "ok": trace_ok and isinstance(oracle, Distinguished),
        "translation_matches": to_cl(double) == right,
        "checker": verdict_to_json(verdict),
        "contextual_oracle": verdict_to_json(oracle),
    }


def translation_corpus(params: Mapping[str, int]) -> dict:
    report = check_corpus(lambda_corpus(params["corpus_size"]), params["corpus_fuel"])
    return {
        "ok": report.ok and report.fuel_exhausted == 0,
        "checked": report.checked,
        "confirmed": report.confirmed,
        "fuel_exhausted": report.fuel_exhausted,
        "mismatches": [format_term(m) for m in report.mismatches],
    }


def table_equivalence(params: Mapping[str, int]) -> dict:
    report = check_tables(
        params["tables_max_size"], params["tables_max_metavars"], 2, params["tables_jobs"]
    )
    return {
        "ok": report.ok,
        "terms_checked": report.terms_checked,
        "diffs": [
            {
                "state": format_term(d.state),
                "mode": d.mode,
                "table": [format_label(l) for l in d.table],
                "generic": [format_label(l) for l in d.generic],
            }
            for d in report.diffs[:20]
        ],
    }


def correspondence(params: Mapping[str, int]) -> dict:
    depth = params["correspondence_depth"]
    failures = []
    for expected, pairs in ((Equivalent, BETA_PAIRS), (Distinguished, INEQUIVALENT_PAIRS)):
        for a, b in pairs:
            verdict = check_weak_bisim(to_cl(_lam(a)), to_cl(_lam(b)), LAZY_FINITE, depth, 512)
            if not isinstance(verdict, expected):
                failures.append({"pair": [a, b], "verdict": format_verdict(verdict)})
    return {"ok": not failures, "pairs": len(BETA_PAIRS) + len(INEQUIVALENT_PAIRS), "failures": failures}


CONGRUENCE_PAIRS = (("K", "S(K K)(S K K)"), ("S K K", "S K S"))


def congruence(params: Mapping[str, int]) -> dict:
    pairs = [(parse_term(a), parse_term(b)) for a, b in CONGRUENCE_PAIRS]
    report = congruence_harness(
        pairs,
        LAZY_FINITE,
        params["congruence_samples"],
        params["congruence_seed"],
        params["coincidence_depth"],
        params["coincidence_fuel"],
    )
    return {"ok": report.ok, **report.to_json()}


def invariants(params: Mapping[str, int]) -> dict:
    report = check_invariants(params["invariants_max_size"], 0, params["mgu_pairs"])
    return {"ok": report.ok, **report.to_json()}


CRITERIA: dict[int, Callable[[Mapping[str, int]], dict]] = {
    1: coincidence,
    2: first_order_discrimination,
    3: cbv_counterexample,
    4: translation_corpus,
    5: table_equivalence,
    6: correspondence,
    7: congruence,
    8: invariants,
}
