"""IPO labels and weak transitions for every configured LTS.

A label ``C[ ]_θ`` is kept as a substitution, an optional left applicant and a
list of right arguments. ``labels_table`` reads the label catalogues off the
state's spine class; ``labels_generic`` derives the second-order lazy labels
from the rewrite rules by unification.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache, partial
from itertools import islice, product
from typing import Iterable, Iterator

from ipobisim.errors import NotEnabled, UnificationError, UnsupportedConfig
from ipobisim.reduction import (
    DEFAULT_FUEL,
    Calculus,
    Status,
    Strategy,
    Stepped,
    arity,
    is_plain_cbv_value,
    normalize_tau,
    step,
)
from ipobisim.syntax import format_atom, format_term
from ipobisim.terms import (
    EMPTY_SUBST,
    Abs,
    App,
    BareVar,
    CLTerm,
    Critical,
    Flavor,
    HeadStuck,
    K,
    Kp,
    LApp,
    Meta,
    Reducible,
    S,
    SpineClass,
    Sp,
    Spp,
    Substitution,
    Term,
    Value,
    apply_all,
    apply_subst,
    classify_cbv,
    classify_lazy,
    enumerate_lambda,
    enumerate_terms,
    fresh_metavar,
    is_cbv_value,
    is_lambda,
    metavars,
    spine,
)
from ipobisim.unify import mgu, rename_apart

LOG = logging.getLogger(__name__)


class Order(str, Enum):
    FIRST = "first"
    SECOND = "second"


class LabelSet(str, Enum):
    REACTIVE_ONLY = "reactive"
    ALL_IPO = "all"
    FINITE = "finite"


@dataclass(frozen=True)
class Config:
    calculus: Calculus = Calculus.CLSTAR
    order: Order = Order.SECOND
    strategy: Strategy = Strategy.LAZY
    label_set: LabelSet = LabelSet.FINITE
    arg_pool: int = 3
    arg_bound: int = 2

    def __post_init__(self):
        object.__setattr__(self, "calculus", Calculus(self.calculus))
        object.__setattr__(self, "order", Order(self.order))
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "label_set", LabelSet(self.label_set))

    def validate(self) -> "Config":
        if self.strategy is Strategy.NORMAL_FULL:
            raise UnsupportedConfig("normal_full has no transition system")
        if self.order is Order.SECOND and self.calculus is not Calculus.CLSTAR:
            raise UnsupportedConfig("second-order contexts are defined for clstar only")
        if self.label_set is LabelSet.FINITE and (
            self.calculus is not Calculus.CLSTAR
            or self.order is not Order.SECOND
            or self.strategy is not Strategy.LAZY
        ):
            raise UnsupportedConfig("the finite label set exists for clstar/second/lazy only")
        if self.arg_pool < 1:
            raise UnsupportedConfig("arg_pool must be at least 1")
        if self.arg_bound < 1:
            raise UnsupportedConfig("arg_bound must be at least 1")
        return self

    @property
    def exact(self) -> bool:
        """True when the label sets are complete, so Equivalent needs no qualification."""
        return self.order is Order.SECOND and (
            self.label_set is LabelSet.FINITE or self.strategy is Strategy.CBV
        )

    def describe(self) -> str:
        return f"{self.calculus.value}/{self.order.value}/{self.strategy.value}/{self.label_set.value}"


# ------------------------------------------------------------------
#                               LABELS
# ------------------------------------------------------------------
@dataclass(frozen=True)
class Label:
    subst: Substitution = EMPTY_SUBST
    left: Term | None = None
    args: tuple[Term, ...] = ()

    @property
    def is_tau(self) -> bool:
        return not self.subst and self.left is None and not self.args

    def __str__(self) -> str:
        return format_label(self)


TAU = Label()


def format_label(label: Label) -> str:
    if label.is_tau:
        return "tau"
    if label.subst:
        binds = ", ".join(f"?{x}:={format_term(t)}" for x, t in label.subst.items())
        hole = f"[_{{{binds}}}]"
    else:
        hole = "[_]"
    parts = [hole]
    if label.left is not None:
        parts.insert(0, format_atom(label.left))
    parts.extend(format_atom(a) for a in label.args)
    return " ".join(parts)


def label_to_json(label: Label) -> dict | str:
    if label.is_tau:
        return "tau"
    return {
        "subst": {x: format_term(t) for x, t in label.subst.items()},
        "left": None if label.left is None else format_term(label.left),
        "args": [format_term(a) for a in label.args],
    }


def sort_labels(labels: Iterable[Label]) -> list[Label]:
    return sorted(set(labels), key=format_label)


def canonicalize(label: Label, state_vars: Iterable[str], avoid: Iterable[str] = ()) -> Label:
    """Rename the label's own metavariables to ``z<n>`` (inside K'/S'/S'') and ``y<n>``.

    Numbering follows first occurrence: substitution ranges in domain order,
    then the left applicant, then the right arguments.
    """
    state_vars = set(state_vars)
    taken = state_vars | set(avoid)
    renaming: dict[str, str] = {}

    def visit(t: Term, probe: bool) -> None:
        match t:
            case Meta(name) if name not in state_vars and name not in renaming:
                new = fresh_metavar(taken, "z" if probe else "y")
                taken.add(new)
                renaming[name] = new
            case Kp(a) | Sp(a):
                visit(a, True)
            case Spp(a, b):
                visit(a, True)
                visit(b, True)
            case App(f, a):
                visit(f, probe)
                visit(a, probe)

    for _, t in label.subst.items():
        visit(t, False)
    if label.left is not None:
        visit(label.left, False)
    for a in label.args:
        visit(a, False)
    if not renaming:
        return label
    swap = {old: Meta(new) for old, new in renaming.items()}

    def ren(t: Term) -> Term:
        return t if is_lambda(t) else apply_subst(t, swap)

    return Label(
        Substitution.of({x: ren(t) for x, t in label.subst.items()}),
        None if label.left is None else ren(label.left),
        tuple(ren(a) for a in label.args),
    )


def probe_values(prefix: str = "#z") -> tuple[CLTerm, ...]:
    """The five substitution shapes K, S, K'(z1), S'(z1), S''(z1, z2)."""
    z1, z2 = Meta(f"{prefix}1"), Meta(f"{prefix}2")
    return (K(), S(), Kp(z1), Sp(z1), Spp(z1, z2))


def _fresh_args(n: int, prefix: str = "#y") -> tuple[CLTerm, ...]:
    return tuple(Meta(f"{prefix}{i}") for i in range(1, n + 1))


# ------------------------------------------------------------------
#                           ARGUMENT POOLS
# ------------------------------------------------------------------
@dataclass(frozen=True)
class Pools:
    values: tuple[Term, ...]
    non_values: tuple[Term, ...]

    @property
    def terms(self) -> tuple[Term, ...]:
        return self.values + self.non_values


@lru_cache(maxsize=None)
def argument_pools(calculus: Calculus, strategy: Strategy, size: int) -> Pools:
    """Closed terms up to ``size`` split into strategy values and the rest."""
    calculus, strategy = Calculus(calculus), Strategy(strategy)
    if calculus is Calculus.LAMBDA:
        terms = tuple(enumerate_lambda(size))
        is_value = lambda m: isinstance(m, Abs)  # noqa: E731
    elif calculus is Calculus.CL:
        terms = tuple(enumerate_terms(size, (), Flavor.PLAIN))
        if strategy is Strategy.LAZY:
            is_value = lambda t: len(spine(t)[1]) < arity(spine(t)[0])  # noqa: E731
        else:
            is_value = is_plain_cbv_value
    else:
        flavor = Flavor.STAR if strategy is Strategy.LAZY else Flavor.STAR_CBV
        terms = tuple(enumerate_terms(size, (), flavor))
        is_value = (lambda t: isinstance(t, (K, S, Kp, Sp, Spp))) if strategy is Strategy.LAZY else is_cbv_value
    values = tuple(t for t in terms if is_value(t))
    non_values = tuple(t for t in terms if not is_value(t))
    return Pools(values, non_values)


def need(t: CLTerm) -> int:
    """Arguments a plain CL value still needs before its head fires."""
    head, args = spine(t)
    return arity(head) - len(args)


# ------------------------------------------------------------------
#                          LABEL CATALOGUES
# ------------------------------------------------------------------
def labels_table(state: Term, cfg: Config, avoid: Iterable[str] = ()) -> list[Label]:
    """The label row for the state's class, canonicalized and sorted."""
    cfg.validate()
    if cfg.order is Order.FIRST:
        return sort_labels(_first_order_labels(state, cfg))
    state_vars = metavars(state)
    if cfg.strategy is Strategy.LAZY:
        raw = _second_lazy_labels(state, cfg)
    else:
        raw = _second_cbv_labels(state, cfg)
    return sort_labels(canonicalize(l, state_vars, avoid) for l in raw)


def labels(state: Term, cfg: Config, avoid: Iterable[str] = ()) -> list[Label]:
    return labels_table(state, cfg, avoid)


def _second_lazy_labels(state: CLTerm, cfg: Config) -> Iterator[Label]:
    cls = classify_lazy(state)
    for label, finite in _lazy_rows(cls, cfg.arg_bound):
        if finite or cfg.label_set is not LabelSet.FINITE:
            yield label
    if cfg.label_set is LabelSet.ALL_IPO and not isinstance(cls, Reducible):
        for a in probe_values():
            for n in range(cfg.arg_bound):
                yield Label(left=apply_all(a, _fresh_args(n)))


def _lazy_rows(cls: SpineClass, arg_bound: int) -> Iterator[tuple[Label, bool]]:
    """Reactive lazy labels of a spine class, each flagged with membership of the finite table."""
    y1 = Meta("#y1")
    match cls:
        case Reducible():
            yield TAU, True
        case Value():
            yield Label(args=(y1,)), True
        case BareVar(x):
            for a in probe_values():
                yield Label(Substitution.of({x: a}), args=(y1,)), True
                yield Label(Substitution.of({x: App(a, y1)})), False
        case HeadStuck(x, _):
            for a in probe_values():
                yield Label(Substitution.of({x: a})), True
                for n in range(1, arg_bound + 1):
                    yield Label(Substitution.of({x: apply_all(a, _fresh_args(n))})), False


def _second_cbv_labels(state: CLTerm, cfg: Config) -> Iterator[Label]:
    cls = classify_cbv(state)
    y1 = Meta("#y1")
    probes = probe_values()
    match cls:
        case Reducible():
            yield TAU
            return
        case Critical(x):
            for a in probes:
                yield Label(Substitution.of({x: a}))
        case BareVar(x):
            for a in probes:
                yield Label(Substitution.of({x: a}), args=(y1,))
                yield Label(left=a)
        case Value():
            yield Label(args=(y1,))
            for a in probes:
                yield Label(left=a)
    if cfg.label_set is LabelSet.ALL_IPO:
        for a in probes:
            yield Label(left=App(a, y1))


def _first_order_labels(state: Term, cfg: Config) -> Iterator[Label]:
    result = step(state, cfg.calculus, cfg.strategy)
    if isinstance(result, Stepped):
        yield TAU
        return
    if metavars(state):
        # stuck on a metavariable: first-order contexts cannot instantiate it
        return
    pools = argument_pools(cfg.calculus, cfg.strategy, cfg.arg_pool)
    lazy = cfg.strategy is Strategy.LAZY
    if cfg.calculus is Calculus.CL:
        yield from _cl_first_order_labels(state, pools, lazy, cfg.label_set is LabelSet.ALL_IPO)
    elif lazy:
        yield from (Label(args=(p,)) for p in pools.terms)
    else:
        yield from (Label(args=(v,)) for v in pools.values)
        yield from (Label(left=v) for v in pools.values)
    if cfg.label_set is LabelSet.ALL_IPO:
        yield from (Label(left=p) for p in pools.non_values)


def _cl_first_order_labels(state: CLTerm, pools: Pools, lazy: bool, all_ipo: bool) -> Iterator[Label]:
    k = need(state)
    if lazy:
        for ps in product(pools.terms, repeat=k):
            yield Label(args=ps)
        if all_ipo:
            # the state as an argument of a partial K or S application: K [ ] P, S P [ ] P, ...
            for v in pools.values:
                for ps in product(pools.terms, repeat=need(v) - 1):
                    yield Label(left=v, args=ps)
        return
    for vs in product(pools.values, repeat=k):
        yield Label(args=vs)
    for n in range(k):
        for vs in product(pools.values, repeat=n):
            for p in pools.non_values:
                yield Label(args=(*vs, p))
    for v in pools.values:
        m = need(v)
        for vs in product(pools.values, repeat=m - 1):
            yield Label(left=v, args=vs)
        for n in range(m - 1):
            for vs in product(pools.values, repeat=n):
                for p in pools.non_values:
                    yield Label(left=v, args=(*vs, p))


# ------------------------------------------------------------------
#                     UNIFICATION-DERIVED LABELS
# ------------------------------------------------------------------
_R1, _R2, _R3 = Meta("r1"), Meta("r2"), Meta("r3")
LAZY_RULE_PATTERNS: tuple[CLTerm, ...] = (
    App(K(), _R1),
    App(Kp(_R1), _R2),
    App(S(), _R1),
    App(Sp(_R1), _R2),
    App(Spp(_R1, _R2), _R3),
)


def labels_generic(
    state: CLTerm, cfg: Config, avoid: Iterable[str] = (), prune: bool = False
) -> list[Label]:
    """Reactive labels of the lazy second-order system, computed by unification.

    Every rule pattern is unified with each prefix of the state's spine, the
    spine being extended by fresh arguments; a metavariable head may also be
    bound to the pattern applied to further fresh arguments (up to
    ``cfg.arg_bound``). With ``prune`` only substitution ranges without
    applications are kept.
    """
    cfg.validate()
    if not (
        cfg.calculus is Calculus.CLSTAR
        and cfg.order is Order.SECOND
        and cfg.strategy is Strategy.LAZY
    ):
        raise UnsupportedConfig(f"no unification-derived labels for {cfg.describe()}")
    out = _generic_labels(state, metavars(state), cfg.arg_bound, frozenset(avoid))
    if prune:
        out = {l for l in out if _ground_ranges(l)}
    return sort_labels(out)


def _ground_ranges(label: Label) -> bool:
    return not any(isinstance(t, App) for _, t in label.subst.items())


@lru_cache(maxsize=None)
def _renamed_patterns(
    taken: frozenset[str], arg_bound: int
) -> tuple[tuple[CLTerm, tuple[Meta, ...], tuple[tuple[Meta, ...], ...]], ...]:
    # (lhs apart from taken, fresh spine extension, fresh arguments for a metavariable head)
    out = []
    for pattern in LAZY_RULE_PATTERNS:
        lhs, _ = rename_apart(pattern, set(taken))
        used = set(taken) | set(metavars(lhs))

        def fresh() -> Meta:
            name = fresh_metavar(used)
            used.add(name)
            return Meta(name)

        extra = tuple(fresh() for _ in spine(lhs)[1])
        head_args = tuple(tuple(fresh() for _ in range(m)) for m in range(1, arg_bound))
        out.append((lhs, extra, head_args))
    return tuple(out)


def _generic_labels(
    state: CLTerm, state_vars: tuple[str, ...], arg_bound: int, avoid: frozenset[str]
) -> set[Label]:
    head, args = spine(state)
    found: set[Label] = set()
    for lhs, extra, head_args in _renamed_patterns(frozenset(state_vars) | avoid, arg_bound):
        extended = [*args, *extra]
        for j in range(len(extended) + 1):
            appended = extra[: max(0, j - len(args))]
            try:
                theta = mgu(lhs, apply_all(head, extended[:j]))
            except UnificationError:
                continue
            candidate = _candidate(state, state_vars, theta, appended)
            if candidate is not None:
                found.add(candidate)
        if isinstance(head, Meta):
            for ys in head_args:
                theta = mgu(head, apply_all(lhs, ys))
                candidate = _candidate(state, state_vars, theta, ())
                if candidate is not None:
                    found.add(candidate)
    return {canonicalize(l, state_vars, avoid) for l in found}


def _candidate(
    state: CLTerm, state_vars: tuple[str, ...], theta: Substitution, appended: tuple[CLTerm, ...]
) -> Label | None:
    # Not minimal when the instantiated spine keeps label-only arguments after the redex.
    instance = apply_all(apply_subst(state, theta), appended)
    trailing = spine(instance)[1][1:]
    if trailing and all(isinstance(t, Meta) and t.name not in state_vars for t in trailing):
        return None
    return Label(theta.restrict(state_vars), args=appended)


@dataclass
class TableDiff:
    state: CLTerm
    mode: str
    table: list[Label]
    generic: list[Label]


@dataclass
class TableReport:
    terms_checked: int = 0
    diffs: list[TableDiff] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diffs


CHUNK_SIZE = 4096


def _check_term(t: CLTerm, arg_bound: int) -> list[TableDiff]:
    state_vars = metavars(t)
    rows = [(canonicalize(l, state_vars), finite) for l, finite in _lazy_rows(classify_lazy(t), arg_bound)]
    generic = _generic_labels(t, state_vars, arg_bound, frozenset())
    diffs = []
    for mode, expected, got in (
        ("finite", {l for l, finite in rows if finite}, {l for l in generic if _ground_ranges(l)}),
        ("reactive", {l for l, _ in rows}, generic),
    ):
        if expected != got:
            LOG.debug("table mismatch (%s) at %s", mode, format_term(t))
            diffs.append(TableDiff(t, mode, sort_labels(expected), sort_labels(got)))
    return diffs


def _check_chunk(terms: list[CLTerm], arg_bound: int) -> tuple[int, list[TableDiff]]:
    diffs = []
    for t in terms:
        diffs.extend(_check_term(t, arg_bound))
    return len(terms), diffs


def _chunks(terms: Iterable[CLTerm], size: int = CHUNK_SIZE) -> Iterator[list[CLTerm]]:
    it = iter(terms)
    while chunk := list(islice(it, size)):
        yield chunk


def check_tables(
    max_size: int = 6, max_metavars: int = 2, arg_bound: int = 2, jobs: int = 1
) -> TableReport:
    """Compare the unification-derived labels against the finite and reactive tables, exhaustively.

    With ``jobs > 1`` the enumeration is split into chunks checked by a process
    pool; diffs come back in enumeration order either way.
    """
    Config(label_set=LabelSet.REACTIVE_ONLY, arg_bound=arg_bound).validate()
    pool = tuple(f"x{i}" for i in range(1, max_metavars + 1))
    chunks = _chunks(enumerate_terms(max_size, pool, Flavor.STAR))
    work = partial(_check_chunk, arg_bound=arg_bound)
    report = TableReport()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(work, chunks))
    else:
        results = map(work, chunks)
    for checked, diffs in results:
        report.terms_checked += checked
        report.diffs.extend(diffs)
    LOG.info("checked %d terms, %d diffs", report.terms_checked, len(report.diffs))
    return report


# ------------------------------------------------------------------
#                            TRANSITIONS
# ------------------------------------------------------------------
def plug(state: Term, label: Label) -> Term:
    """Build ``C[state θ]``: substitution, then the left applicant, then the arguments."""
    if is_lambda(state):
        t = state if label.left is None else LApp(label.left, state)
        for a in label.args:
            t = LApp(t, a)
        return t
    t = apply_subst(state, label.subst)
    if label.left is not None:
        t = App(label.left, t)
    return apply_all(t, label.args)


def apply_label(state: Term, label: Label, cfg: Config) -> Term:
    """Fire exactly one reaction step on the plugged term."""
    result = step(plug(state, label), cfg.calculus, cfg.strategy)
    if not isinstance(result, Stepped):
        raise NotEnabled(f"{format_label(label)} does not react with {format_term(state)}")
    return result.next


class WeakStatus(str, Enum):
    OK = "ok"
    NOT_ENABLED = "not_enabled"
    FUEL_EXHAUSTED = "fuel_exhausted"


@dataclass(frozen=True)
class WeakStep:
    target: Term | None
    status: WeakStatus
    tau_folded: int = 0


def weak_successor(
    state: Term,
    label: Label,
    cfg: Config,
    fuel: int = DEFAULT_FUEL,
    avoid: Iterable[str] = (),
) -> WeakStep:
    """τ-normalize, fire ``label`` if enabled there, τ-normalize the residual."""
    pre = normalize_tau(state, cfg.calculus, cfg.strategy, fuel)
    if pre.status is Status.FUEL_EXHAUSTED:
        return WeakStep(None, WeakStatus.FUEL_EXHAUSTED, pre.steps)
    if label.is_tau:
        return WeakStep(pre.result, WeakStatus.OK, pre.steps)
    if label not in labels_table(pre.result, cfg, avoid):
        return WeakStep(None, WeakStatus.NOT_ENABLED, pre.steps)
    mid = apply_label(pre.result, label, cfg)
    post = normalize_tau(mid, cfg.calculus, cfg.strategy, fuel)
    if post.status is Status.FUEL_EXHAUSTED:
        return WeakStep(None, WeakStatus.FUEL_EXHAUSTED, pre.steps + post.steps)
    return WeakStep(post.result, WeakStatus.OK, pre.steps + post.steps)


@dataclass(frozen=True)
class Transition:
    source: Term
    label: Label
    target: Term
    tau_folded: int

    def to_json(self) -> dict:
        return {
            "state": format_term(self.source),
            "label": label_to_json(self.label),
            "target": format_term(self.target),
            "tau_folded": self.tau_folded,
        }

    def to_text(self) -> str:
        return (
            f"{format_term(self.source)} --{format_label(self.label)}--> "
            f"{format_term(self.target)} (tau x{self.tau_folded})"
        )


@dataclass
class TransitionGraph:
    states: list[Term] = field(default_factory=list)
    transitions: list[Transition] = field(default_factory=list)
    frontier: list[Term] = field(default_factory=list)

    def dump(self, fmt: str = "json") -> Iterator[str]:
        for t in self.transitions:
            yield json.dumps(t.to_json(), sort_keys=True, ensure_ascii=False) if fmt == "json" else t.to_text()


def _expand(state: Term, cfg: Config, fuel: int) -> list[Transition]:
    pre = normalize_tau(state, cfg.calculus, cfg.strategy, fuel)
    if pre.status is Status.FUEL_EXHAUSTED:
        LOG.debug("no weak transitions from %s: fuel exhausted", format_term(state))
        return []
    out = []
    for label in labels_table(pre.result, cfg):
        if label.is_tau:
            continue
        post = normalize_tau(apply_label(pre.result, label, cfg), cfg.calculus, cfg.strategy, fuel)
        if post.status is Status.FUEL_EXHAUSTED:
            LOG.debug("dropping %s from %s: fuel exhausted", format_label(label), format_term(state))
            continue
        out.append(Transition(state, label, post.result, pre.steps + post.steps))
    return out


def lts_explore(
    root: Term, cfg: Config, depth: int, fuel: int = DEFAULT_FUEL, jobs: int = 1
) -> TransitionGraph:
    """Breadth-first weak-transition closure; states are deduplicated by their printed form.

    With ``jobs > 1`` each frontier is expanded by a thread pool; the seen set
    is only touched by the calling thread, so the graph does not depend on
    scheduling.
    """
    cfg.validate()
    graph = TransitionGraph(states=[root])
    seen = {format_term(root)}
    frontier = [root]
    executor = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for level in range(depth):
            if not frontier:
                break
            if executor is None:
                expansions = [_expand(s, cfg, fuel) for s in frontier]
            else:
                expansions = list(executor.map(lambda s: _expand(s, cfg, fuel), frontier))
            next_frontier = []
            for transitions in expansions:
                for tr in transitions:
                    graph.transitions.append(tr)
                    key = format_term(tr.target)
                    if key not in seen:
                        seen.add(key)
                        graph.states.append(tr.target)
                        next_frontier.append(tr.target)
            LOG.debug("level %d: %d new states", level + 1, len(next_frontier))
            frontier = next_frontier
    finally:
        if executor is not None:
            executor.shutdown()
    graph.frontier = frontier
    return graph
