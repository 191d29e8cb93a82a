"""Independent equivalence oracles and the congruence harness.

The oracles observe halting only: a pair is separated when one side
converges within fuel and the other does not.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from ipobisim.bisim import (
    Distinguished,
    Equivalent,
    Reason,
    Side,
    TraceStep,
    Unknown,
    UnknownReason,
    Verdict,
    check_weak_bisim,
    format_verdict,
)
from ipobisim.errors import PreconditionError
from ipobisim.ipo import Config, Label, argument_pools
from ipobisim.reduction import (
    DEFAULT_FUEL,
    Calculus,
    Strategy,
    normalize_tau,
    substitute_free,
)
from ipobisim.syntax import format_term
from ipobisim.terms import (
    Abs,
    App,
    CLTerm,
    Flavor,
    K,
    LApp,
    Meta,
    S,
    Substitution,
    Term,
    Var,
    apply_subst,
    enumerate_terms,
    is_cbv_value,
    is_lambda,
    metavars,
)

LOG = logging.getLogger(__name__)

HOLE = "_hole"

_DELTA = Abs(LApp(Var(0, "x"), Var(0, "x")), "x")
OMEGA = LApp(_DELTA, _DELTA)
_I = App(App(S(), K()), K())
_W = App(App(S(), _I), _I)
OMEGA_CL = App(_W, _W)


def divergent_term(calculus: Calculus | str) -> Term:
    """Ω for λ, ``S(SKK)(SKK)(S(SKK)(SKK))`` for CL and CL*."""
    return OMEGA if Calculus(calculus) is Calculus.LAMBDA else OMEGA_CL


@lru_cache(maxsize=None)
def argument_pool(calculus: Calculus | str, strategy: Strategy | str, size: int) -> tuple[Term, ...]:
    """Closed probes: values for cbv; every term plus the divergent term for lazy."""
    calculus, strategy = Calculus(calculus), Strategy(strategy)
    pools = argument_pools(calculus, strategy, size)
    if strategy is Strategy.CBV:
        return pools.values
    return pools.terms + (divergent_term(calculus),)


def _apply(f: Term, a: Term) -> Term:
    return LApp(f, a) if is_lambda(f) else App(f, a)


def _same(a: Term, b: Term) -> bool:
    return a == b


# ------------------------------------------------------------------
#                         APPLICATIVE ORACLE
# ------------------------------------------------------------------
def applicative_oracle(
    a: Term,
    b: Term,
    calculus: Calculus | str,
    strategy: Strategy | str,
    pool: Sequence[Term],
    depth: int = 3,
    fuel: int = DEFAULT_FUEL,
) -> Verdict:
    """Probe both terms with every argument sequence from ``pool`` up to ``depth``."""
    calculus, strategy = Calculus(calculus), Strategy(strategy)
    na = normalize_tau(a, calculus, strategy, fuel)
    nb = normalize_tau(b, calculus, strategy, fuel)
    if na.halted and nb.halted and _same(na.result, nb.result):
        return Equivalent(depth)
    unknown: list[UnknownReason] = []
    trace = _applicative(na, nb, calculus, strategy, pool, depth, fuel, unknown)
    if trace is not None:
        return Distinguished(trace)
    if unknown:
        return Unknown(UnknownReason.FUEL_EXHAUSTED)
    return Unknown(UnknownReason.POOL_LIMITED)


def _applicative(na, nb, calculus, strategy, pool, depth, fuel, unknown):
    if not na.halted and not nb.halted:
        unknown.append(UnknownReason.FUEL_EXHAUSTED)
        return None
    if na.halted != nb.halted:
        side = Side.RIGHT if na.halted else Side.LEFT
        return (TraceStep(Label(), side, Reason.OBSERVABILITY),)
    if depth == 0:
        return None
    for p in pool:
        ma = normalize_tau(_apply(na.result, p), calculus, strategy, fuel)
        mb = normalize_tau(_apply(nb.result, p), calculus, strategy, fuel)
        rest = _applicative(ma, mb, calculus, strategy, pool, depth - 1, fuel, unknown)
        if rest is not None:
            return (TraceStep(Label(args=(p,)), Side.BOTH, Reason.FOLLOWED),) + rest
    return None


# ------------------------------------------------------------------
#                         CONTEXTUAL ORACLE
# ------------------------------------------------------------------
def enumerate_contexts(size: int, pool: Sequence[Term], calculus: Calculus | str) -> Iterator[Term]:
    """Contexts ``C ::= [ ] | C P | P C | λx.C`` with at most ``size`` constructors.

    The hole is the free variable ``_hole``; the λ-former only exists for λ.
    """
    calculus = Calculus(calculus)
    for n in range(1, size + 1):
        yield from _contexts_of_size(n, tuple(pool), calculus)


@lru_cache(maxsize=None)
def _contexts_of_size(n: int, pool: tuple[Term, ...], calculus: Calculus) -> tuple[Term, ...]:
    lam = calculus is Calculus.LAMBDA
    if n == 1:
        return (Var(None, HOLE) if lam else Meta(HOLE),)
    out: list[Term] = []
    for c in _contexts_of_size(n - 1, pool, calculus):
        out.extend(_apply(c, p) for p in pool)
        out.extend(_apply(p, c) for p in pool)
        if lam:
            out.append(Abs(c, "x"))
    return tuple(out)


def plug(context: Term, term: Term) -> Term:
    if is_lambda(context):
        return substitute_free(context, HOLE, term)
    return apply_subst(context, {HOLE: term})


def format_context(context: Term) -> str:
    return format_term(context).replace(f"?{HOLE}", "[_]").replace(HOLE, "[_]")


def contextual_oracle(
    a: Term,
    b: Term,
    calculus: Calculus | str,
    strategy: Strategy | str,
    contexts: Iterable[Term],
    fuel: int = DEFAULT_FUEL,
) -> Verdict:
    """Evaluate ``C[a]`` and ``C[b]`` for every context; any halting disagreement separates."""
    calculus, strategy = Calculus(calculus), Strategy(strategy)
    if _same(a, b):
        return Equivalent(0)
    checked = 0
    for context in contexts:
        checked += 1
        ha = normalize_tau(plug(context, a), calculus, strategy, fuel).halted
        hb = normalize_tau(plug(context, b), calculus, strategy, fuel).halted
        if ha != hb:
            side = Side.RIGHT if ha else Side.LEFT
            LOG.debug("context %s separates the pair", format_context(context))
            return Distinguished(
                (TraceStep(Label(), side, Reason.OBSERVABILITY, format_context(context)),)
            )
    LOG.info("%d contexts agree", checked)
    return Unknown(UnknownReason.POOL_LIMITED)


# ------------------------------------------------------------------
#                        CONGRUENCE HARNESS
# ------------------------------------------------------------------
@dataclass
class Violation:
    pair: tuple[str, str]
    context: str
    theta: str
    verdict: str


@dataclass
class HarnessReport:
    samples: int = 0
    equivalent: int = 0
    unknown: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "equivalent": self.equivalent,
            "unknown": self.unknown,
            "violations": [vars(v) for v in self.violations],
        }


CONTEXT_VARS = ("w",)


@lru_cache(maxsize=None)
def _sample_space(strategy: Strategy) -> tuple[tuple[CLTerm, ...], tuple[CLTerm, ...]]:
    """Context arguments and substitution ranges the harness draws from."""
    flavor = Flavor.STAR_CBV if strategy is Strategy.CBV else Flavor.STAR
    terms = tuple(enumerate_terms(3, CONTEXT_VARS, flavor))
    if strategy is Strategy.CBV:
        return terms, tuple(t for t in terms if is_cbv_value(t))
    return terms, terms


def random_context(rng: random.Random, args: Sequence[CLTerm], max_layers: int = 3) -> CLTerm:
    """``C ::= [ ] | C P | P C`` with up to ``max_layers`` applications."""
    context: CLTerm = Meta(HOLE)
    for _ in range(rng.randint(0, max_layers)):
        p = rng.choice(args)
        context = App(context, p) if rng.random() < 0.5 else App(p, context)
    return context


def congruence_harness(
    pairs: Sequence[tuple[CLTerm, CLTerm]],
    cfg: Config,
    samples: int = 200,
    seed: int = 0,
    certified_depth: int = 8,
    fuel: int = DEFAULT_FUEL,
) -> HarnessReport:
    """Check that ``C[aθ]`` and ``C[bθ]`` are never distinguished at ``certified_depth - 2``."""
    cfg.validate()
    for a, b in pairs:
        certificate = check_weak_bisim(a, b, cfg, certified_depth, fuel)
        if not isinstance(certificate, Equivalent):
            raise PreconditionError(
                f"{format_term(a)} and {format_term(b)} are not certified: {format_verdict(certificate)}"
            )
    check_depth = max(certified_depth - 2, 0)
    args, ranges = _sample_space(cfg.strategy)
    rng = random.Random(seed)
    report = HarnessReport()
    for _ in range(samples):
        a, b = pairs[rng.randrange(len(pairs))]
        context = random_context(rng, args)
        names = sorted(set(metavars(a)) | set(metavars(b)))
        theta = Substitution.of({x: rng.choice(ranges) for x in names})
        left = plug(context, apply_subst(a, theta))
        right = plug(context, apply_subst(b, theta))
        verdict = check_weak_bisim(left, right, cfg, check_depth, fuel)
        report.samples += 1
        if isinstance(verdict, Equivalent):
            report.equivalent += 1
        elif isinstance(verdict, Unknown):
            report.unknown += 1
        else:
            theta_text = ", ".join(f"?{x}:={format_term(t)}" for x, t in theta.items())
            LOG.warning("congruence violation under %s", format_context(context))
            report.violations.append(
                Violation(
                    (format_term(a), format_term(b)),
                    format_context(context),
                    theta_text,
                    format_verdict(verdict),
                )
            )
    LOG.info(
        "%d samples: %d equivalent, %d unknown, %d violations",
        report.samples,
        report.equivalent,
        report.unknown,
        len(report.violations),
    )
    return report

