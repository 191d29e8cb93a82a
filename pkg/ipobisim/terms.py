"""Term representations for the λ-calculus, CL and CL*.

λ-terms use binder distances with retained display names, so α-equality is
structural equality on the indices. CL terms carry the administrative
combinators K', S', S'' as dedicated constructors and metavariables ``?x``
for the second-order setting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Union

from ipobisim.errors import NoClassError

LOG = logging.getLogger(__name__)


# ------------------------------------------------------------------
#                            LAMBDA TERMS
# ------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class Var:
    """A variable; ``index`` is the binder distance, ``None`` for a free name."""

    index: int | None
    name: str

    def __eq__(self, other):
        if not isinstance(other, Var):
            return NotImplemented
        if self.index is None or other.index is None:
            return self.index is None and other.index is None and self.name == other.name
        return self.index == other.index

    def __hash__(self):
        return hash(("Var", self.index if self.index is not None else self.name))


@dataclass(frozen=True, slots=True)
class Abs:
    body: "LambdaTerm"
    name: str = "x"

    def __eq__(self, other):
        if not isinstance(other, Abs):
            return NotImplemented
        return self.body == other.body

    def __hash__(self):
        return hash(("Abs", self.body))


@dataclass(frozen=True, slots=True)
class LApp:
    fun: "LambdaTerm"
    arg: "LambdaTerm"


LambdaTerm = Union[Var, Abs, LApp]


# ------------------------------------------------------------------
#                              CL TERMS
# ------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class K:
    pass


@dataclass(frozen=True, slots=True)
class S:
    pass


@dataclass(frozen=True, slots=True)
class Kp:
    arg: "CLTerm"


@dataclass(frozen=True, slots=True)
class Sp:
    arg: "CLTerm"


@dataclass(frozen=True, slots=True)
class Spp:
    arg1: "CLTerm"
    arg2: "CLTerm"


@dataclass(frozen=True, slots=True)
class App:
    fun: "CLTerm"
    arg: "CLTerm"


@dataclass(frozen=True, slots=True)
class Meta:
    name: str


CLTerm = Union[K, S, Kp, Sp, Spp, App, Meta]
Term = Union[LambdaTerm, CLTerm]


def is_lambda(t: Term) -> bool:
    return isinstance(t, (Var, Abs, LApp))


def size(t: Term) -> int:
    """Number of constructors; leaves count 1 and application adds nothing."""
    match t:
        case Kp(a) | Sp(a):
            return 1 + size(a)
        case Spp(a, b):
            return 1 + size(a) + size(b)
        case App(f, a) | LApp(f, a):
            return size(f) + size(a)
        case Abs(b):
            return 1 + size(b)
    return 1


def is_plain(t: CLTerm) -> bool:
    """True when no K'/S'/S'' occurs."""
    match t:
        case Kp() | Sp() | Spp():
            return False
        case App(f, a):
            return is_plain(f) and is_plain(a)
    return True


def is_closed(t: Term) -> bool:
    match t:
        case Meta():
            return False
        case Var(index):
            return index is not None
        case Kp(a) | Sp(a) | Abs(a):
            return is_closed(a)
        case Spp(a, b) | App(a, b) | LApp(a, b):
            return is_closed(a) and is_closed(b)
    return True


def is_lazy_value(t: CLTerm) -> bool:
    return isinstance(t, (K, S, Kp, Sp, Spp))


def is_cbv_value(t: CLTerm) -> bool:
    match t:
        case K() | S() | Meta():
            return True
        case Kp(a) | Sp(a):
            return is_cbv_value(a)
        case Spp(a, b):
            return is_cbv_value(a) and is_cbv_value(b)
    return False


def metavars(t: Term) -> tuple[str, ...]:
    """Metavariable names in first-occurrence order (free names for λ-terms)."""
    seen: dict[str, None] = {}
    _collect(t, seen)
    return tuple(seen)


def _collect(t: Term, seen: dict[str, None]) -> None:
    match t:
        case Meta(name):
            seen.setdefault(name, None)
        case Var(None, name):
            seen.setdefault(name, None)
        case Kp(a) | Sp(a) | Abs(a):
            _collect(a, seen)
        case Spp(a, b) | App(a, b) | LApp(a, b):
            _collect(a, seen)
            _collect(b, seen)


def free_metavars(t: Term) -> frozenset[str]:
    return frozenset(metavars(t))


def fresh_metavar(avoid: Iterable[str], prefix: str = "y") -> str:
    """Least canonical name ``<prefix><n>`` (n ≥ 1) not in ``avoid``."""
    taken = set(avoid)
    n = 1
    while f"{prefix}{n}" in taken:
        n += 1
    return f"{prefix}{n}"


# ------------------------------------------------------------------
#                              SPINES
# ------------------------------------------------------------------
def spine(t: CLTerm) -> tuple[CLTerm, list[CLTerm]]:
    """Split ``h a1 ... an`` into its head and argument list."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def apply_all(head: CLTerm, args: Iterable[CLTerm]) -> CLTerm:
    for a in args:
        head = App(head, a)
    return head


def lambda_spine(m: LambdaTerm) -> tuple[LambdaTerm, list[LambdaTerm]]:
    args = []
    while isinstance(m, LApp):
        args.append(m.arg)
        m = m.fun
    args.reverse()
    return m, args


def lambda_apply_all(head: LambdaTerm, args: Iterable[LambdaTerm]) -> LambdaTerm:
    for a in args:
        head = LApp(head, a)
    return head


# ------------------------------------------------------------------
#                           SUBSTITUTION
# ------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class Substitution:
    """Finite map metavariable → CLTerm, stored sorted so that it hashes."""

    bindings: tuple[tuple[str, CLTerm], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, CLTerm] | None = None) -> "Substitution":
        return cls(tuple(sorted((mapping or {}).items(), key=lambda kv: kv[0])))

    def __len__(self) -> int:
        return len(self.bindings)

    def __iter__(self) -> Iterator[str]:
        return (name for name, _ in self.bindings)

    def __contains__(self, name: object) -> bool:
        return any(n == name for n, _ in self.bindings)

    def __getitem__(self, name: str) -> CLTerm:
        for n, t in self.bindings:
            if n == name:
                return t
        raise KeyError(name)

    def get(self, name: str, default: CLTerm | None = None) -> CLTerm | None:
        for n, t in self.bindings:
            if n == name:
                return t
        return default

    def items(self) -> tuple[tuple[str, CLTerm], ...]:
        return self.bindings

    def as_dict(self) -> dict[str, CLTerm]:
        return dict(self.bindings)

    def restrict(self, names: Iterable[str]) -> "Substitution":
        keep = set(names)
        return Substitution(tuple(kv for kv in self.bindings if kv[0] in keep))


EMPTY_SUBST = Substitution()


def apply_subst(t: CLTerm, theta: Substitution | Mapping[str, CLTerm]) -> CLTerm:
    """Simultaneously replace every bound ``Meta`` of ``t``."""
    if not theta:
        return t
    mapping = theta.as_dict() if isinstance(theta, Substitution) else dict(theta)
    return _subst(t, mapping)


def _subst(t: CLTerm, mapping: dict[str, CLTerm]) -> CLTerm:
    match t:
        case Meta(name):
            return mapping.get(name, t)
        case Kp(a):
            return Kp(_subst(a, mapping))
        case Sp(a):
            return Sp(_subst(a, mapping))
        case Spp(a, b):
            return Spp(_subst(a, mapping), _subst(b, mapping))
        case App(f, a):
            return App(_subst(f, mapping), _subst(a, mapping))
    return t


def rename(t: CLTerm, renaming: Mapping[str, str]) -> CLTerm:
    return apply_subst(t, {old: Meta(new) for old, new in renaming.items()})


# ------------------------------------------------------------------
#                         SPINE CLASSES
# ------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class BareVar:
    name: str


@dataclass(frozen=True, slots=True)
class HeadStuck:
    name: str
    arg_count: int


@dataclass(frozen=True, slots=True)
class Value:
    pass


@dataclass(frozen=True, slots=True)
class Reducible:
    pass


@dataclass(frozen=True, slots=True)
class Critical:
    name: str


SpineClass = Union[BareVar, HeadStuck, Value, Reducible, Critical]
VALUE = Value()
REDUCIBLE = Reducible()


def classify_lazy(t: CLTerm) -> SpineClass:
    head, args = spine(t)
    if isinstance(head, Meta):
        return HeadStuck(head.name, len(args)) if args else BareVar(head.name)
    return REDUCIBLE if args else VALUE


_REDEX = object()


def _cbv_blocker(t: CLTerm):
    """``_REDEX`` when the cbv strategy finds a redex, else the critical variable."""
    match t:
        case Kp(a) | Sp(a):
            return _cbv_blocker(a)
        case Spp(a, b):
            return _cbv_blocker(b if is_cbv_value(a) else a)
        case App(f, a):
            if not is_cbv_value(f):
                return _cbv_blocker(f)
            if not is_cbv_value(a):
                return _cbv_blocker(a)
            if isinstance(f, Meta):
                return f.name
            return _REDEX
    return None


def critical_variable(t: CLTerm) -> str | None:
    """Cr(t): the metavariable whose instantiation unblocks a stuck cbv term."""
    if is_cbv_value(t):
        return None
    found = _cbv_blocker(t)
    return None if found is _REDEX else found


def classify_cbv(t: CLTerm) -> SpineClass:
    if isinstance(t, Meta):
        return BareVar(t.name)
    if is_cbv_value(t):
        return VALUE
    found = _cbv_blocker(t)
    if found is _REDEX:
        return REDUCIBLE
    if found is None:
        raise NoClassError(f"stuck cbv term without a critical variable: {t!r}")
    return Critical(found)


# ------------------------------------------------------------------
#                            ENUMERATION
# ------------------------------------------------------------------
class Flavor(str, Enum):
    PLAIN = "plain"
    STAR = "star"
    STAR_CBV = "star_cbv"


def enumerate_terms(
    size_bound: int, pool: Iterable[str] = (), flavor: Flavor = Flavor.STAR
) -> Iterator[CLTerm]:
    """All CL terms up to ``size_bound`` constructors, by size then tag order.

    ``STAR_CBV`` only admits value arguments under K'/S'/S''. Only the largest
    size is generated lazily; smaller sizes are cached.
    """
    pool = tuple(pool)
    for n in range(1, size_bound + 1):
        yield from _generate(n, pool, Flavor(flavor))


@lru_cache(maxsize=None)
def _terms_of_size(n: int, pool: tuple[str, ...], flavor: Flavor) -> tuple[CLTerm, ...]:
    return tuple(_generate(n, pool, flavor))


def _generate(n: int, pool: tuple[str, ...], flavor: Flavor) -> Iterator[CLTerm]:
    if n == 1:
        yield K()
        yield S()
        yield from (Meta(x) for x in pool)
        return
    if flavor is not Flavor.PLAIN:
        def args(m: int) -> Iterable[CLTerm]:
            terms = _terms_of_size(m, pool, flavor)
            if flavor is Flavor.STAR_CBV:
                return [t for t in terms if is_cbv_value(t)]
            return terms

        inner = args(n - 1)
        yield from (Kp(a) for a in inner)
        yield from (Sp(a) for a in inner)
        for i in range(1, n - 1):
            for a in args(i):
                for b in args(n - 1 - i):
                    yield Spp(a, b)
    for i in range(1, n):
        for f in _terms_of_size(i, pool, flavor):
            for a in _terms_of_size(n - i, pool, flavor):
                yield App(f, a)


BINDER_NAMES = ("x", "y", "z", "u", "v", "w")


def binder_name(depth: int) -> str:
    if depth < len(BINDER_NAMES):
        return BINDER_NAMES[depth]
    return f"x{depth}"


def enumerate_lambda(size_bound: int) -> Iterator[LambdaTerm]:
    """Closed λ-terms up to ``size_bound`` (Var 1, Abs 1 + body, App sum)."""
    for n in range(1, size_bound + 1):
        yield from _lambda_of_size(n, 0)


@lru_cache(maxsize=None)
def _lambda_of_size(n: int, depth: int) -> tuple[LambdaTerm, ...]:
    out: list[LambdaTerm] = []
    if n == 1:
        out.extend(Var(i, binder_name(depth - 1 - i)) for i in range(depth))
        return tuple(out)
    out.extend(Abs(b, binder_name(depth)) for b in _lambda_of_size(n - 1, depth + 1))
    for i in range(1, n):
        for f in _lambda_of_size(i, depth):
            for a in _lambda_of_size(n - i, depth):
                out.append(LApp(f, a))
    return tuple(out)


def alpha_eq(a: LambdaTerm, b: LambdaTerm) -> bool:
    """Equality up to bound-variable names."""
    return a == b
