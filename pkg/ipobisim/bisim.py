"""Bounded weak-bisimulation game over the IPO transition systems.

Both states of a pair are τ-normalized first (determinism collapses weak τ
moves to a line), then their canonical label sets are compared and the
matched labels are followed pairwise. Pairs already on the table are assumed
related.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from ipobisim.ipo import Config, Label, apply_label, format_label, label_to_json, labels_table
from ipobisim.reduction import DEFAULT_FUEL, Status, normalize_tau
from ipobisim.syntax import format_term
from ipobisim.terms import Term, is_lambda, metavars, rename

LOG = logging.getLogger(__name__)

DEFAULT_DEPTH = 6
DEFAULT_MAX_PAIRS = 200_000


class UnknownReason(str, Enum):
    FUEL_EXHAUSTED = "fuel_exhausted"
    DEPTH_EXHAUSTED = "depth_exhausted"
    POOL_LIMITED = "pool_limited"


class Side(str, Enum):
    BOTH = "both"
    LEFT = "left"
    RIGHT = "right"

    def mirror(self) -> "Side":
        return {Side.LEFT: Side.RIGHT, Side.RIGHT: Side.LEFT}.get(self, self)


class Reason(str, Enum):
    FOLLOWED = "followed"
    MISSING_LABEL = "missing_label"
    OBSERVABILITY = "observability"


@dataclass(frozen=True)
class TraceStep:
    """One move of a distinguishing play.

    ``side`` names the state that could not answer (``both`` for a followed
    label); ``note`` carries a printed context for oracle traces.
    """

    label: Label
    side: Side
    reason: Reason
    note: str = ""

    def to_json(self) -> dict:
        out = {"label": label_to_json(self.label), "side": self.side.value, "reason": self.reason.value}
        if self.note:
            out["context"] = self.note
        return out

    def __str__(self) -> str:
        text = self.note or format_label(self.label)
        return f"{text} ({self.side.value}: {self.reason.value})"


@dataclass(frozen=True)
class Equivalent:
    depth: int


@dataclass(frozen=True)
class Distinguished:
    trace: tuple[TraceStep, ...]


@dataclass(frozen=True)
class Unknown:
    reason: UnknownReason


Verdict = Union[Equivalent, Distinguished, Unknown]


def verdict_kind(verdict: Verdict) -> str:
    return type(verdict).__name__.lower()


def format_verdict(verdict: Verdict) -> str:
    match verdict:
        case Equivalent(depth):
            return f"Equivalent({depth})"
        case Distinguished(trace):
            return "Distinguished: " + " ; ".join(str(s) for s in trace)
        case Unknown(reason):
            return f"Unknown({reason.value})"
    raise TypeError(verdict)


def verdict_to_json(verdict: Verdict) -> dict:
    out: dict = {"verdict": verdict_kind(verdict)}
    match verdict:
        case Equivalent(depth):
            out["depth"] = depth
        case Distinguished(trace):
            out["trace"] = [s.to_json() for s in trace]
        case Unknown(reason):
            out["reason"] = reason.value
    return out


def mirror(verdict: Verdict) -> Verdict:
    """The verdict of the swapped pair."""
    if isinstance(verdict, Distinguished):
        return Distinguished(
            tuple(TraceStep(s.label, s.side.mirror(), s.reason, s.note) for s in verdict.trace)
        )
    return verdict


def canonical_pair(a: Term, b: Term) -> str:
    """Printed pair after renaming the shared metavariables by first occurrence."""
    if is_lambda(a):
        return f"{format_term(a)} ~ {format_term(b)}"
    names = dict.fromkeys(metavars(a) + metavars(b))
    renaming = {x: f"v{i}" for i, x in enumerate(names, 1)}
    return f"{format_term(rename(a, renaming))} ~ {format_term(rename(b, renaming))}"


# ------------------------------------------------------------------
#                           MEMO + STATS
# ------------------------------------------------------------------
class PairMemo:
    """Canonical pair → (depth it was entered with, Unknown reason or None).

    A pair re-entered with no more depth than recorded is assumed related.
    """

    def __init__(self):
        self._table: dict[str, tuple[int, UnknownReason | None]] = {}
        self._lock = threading.Lock()

    def lookup(self, key: str, depth: int) -> tuple[bool, UnknownReason | None]:
        with self._lock:
            entry = self._table.get(key)
        if entry is None or entry[0] < depth:
            return False, None
        return True, entry[1]

    def enter(self, key: str, depth: int) -> None:
        with self._lock:
            prev = self._table.get(key)
            if prev is None or prev[0] < depth:
                self._table[key] = (depth, None)

    def record_unknown(self, key: str, depth: int, reason: UnknownReason) -> None:
        with self._lock:
            self._table[key] = (depth, reason)

    def __len__(self) -> int:
        return len(self._table)


@dataclass
class GameStats:
    pairs_visited: int = 0
    tau_steps: int = 0
    memo_hits: int = 0

    def to_json(self) -> dict:
        return {
            "pairs_visited": self.pairs_visited,
            "tau_steps": self.tau_steps,
            "memo_hits": self.memo_hits,
        }


class _BudgetExhausted(Exception):
    pass


# ------------------------------------------------------------------
#                              THE GAME
# ------------------------------------------------------------------
@dataclass
class BisimulationGame:
    cfg: Config
    fuel: int = DEFAULT_FUEL
    divergence_blind: bool = False
    max_pairs: int = DEFAULT_MAX_PAIRS
    memo: PairMemo = field(default_factory=PairMemo)
    stats: GameStats = field(default_factory=GameStats)

    def play(self, a: Term, b: Term, depth: int = DEFAULT_DEPTH) -> Verdict:
        """Decide the pair up to ``depth``; memo and stats start empty on every call."""
        self.cfg.validate()
        self.memo = PairMemo()
        self.stats = GameStats()
        if a == b:
            return Equivalent(depth)
        try:
            verdict = self._play(a, b, depth)
        except _BudgetExhausted:
            LOG.info("pair budget of %d exhausted", self.max_pairs)
            return Unknown(UnknownReason.DEPTH_EXHAUSTED)
        finally:
            LOG.info(
                "%s: %d pairs visited, %d tau steps, %d memo hits",
                self.cfg.describe(),
                self.stats.pairs_visited,
                self.stats.tau_steps,
                self.stats.memo_hits,
            )
        if isinstance(verdict, Equivalent):
            if not self.cfg.exact:
                return Unknown(UnknownReason.POOL_LIMITED)
            return Equivalent(depth)
        return verdict

    def _play(self, a: Term, b: Term, depth: int) -> Verdict:
        self.stats.pairs_visited += 1
        if self.stats.pairs_visited > self.max_pairs:
            raise _BudgetExhausted
        na = normalize_tau(a, self.cfg.calculus, self.cfg.strategy, self.fuel)
        nb = normalize_tau(b, self.cfg.calculus, self.cfg.strategy, self.fuel)
        self.stats.tau_steps += na.steps + nb.steps
        a_out = na.status is Status.FUEL_EXHAUSTED
        b_out = nb.status is Status.FUEL_EXHAUSTED
        if a_out or b_out:
            return self._silence(a_out, b_out)
        a, b = na.result, nb.result
        if a == b:
            return Equivalent(depth)
        key = canonical_pair(a, b)
        hit, reason = self.memo.lookup(key, depth)
        if hit:
            self.stats.memo_hits += 1
            LOG.debug("memo hit %s", key)
            return Unknown(reason) if reason is not None else Equivalent(depth)
        self.memo.enter(key, depth)
        LOG.debug("visit %s at depth %d", key, depth)

        avoid = set(metavars(a)) | set(metavars(b))
        la = labels_table(a, self.cfg, avoid)
        lb = labels_table(b, self.cfg, avoid)
        if la != lb:
            return self._mismatch(la, lb, key)
        if depth == 0:
            return Equivalent(0)

        unknown: UnknownReason | None = None
        for label in la:
            if label.is_tau:
                continue
            result = self._play(
                apply_label(a, label, self.cfg), apply_label(b, label, self.cfg), depth - 1
            )
            if isinstance(result, Distinguished):
                return Distinguished((TraceStep(label, Side.BOTH, Reason.FOLLOWED),) + result.trace)
            if isinstance(result, Unknown) and unknown is None:
                unknown = result.reason
        if unknown is not None:
            self.memo.record_unknown(key, depth, unknown)
            return Unknown(unknown)
        return Equivalent(depth)

    def _silence(self, a_out: bool, b_out: bool) -> Verdict:
        if not self.divergence_blind:
            LOG.debug("fuel exhausted on %s", "both sides" if a_out and b_out else "one side")
            return Unknown(UnknownReason.FUEL_EXHAUSTED)
        if a_out and b_out:
            return Equivalent(0)
        side = Side.LEFT if a_out else Side.RIGHT
        return Distinguished((TraceStep(Label(), side, Reason.OBSERVABILITY),))

    @staticmethod
    def _mismatch(la: list[Label], lb: list[Label], key: str) -> Distinguished:
        only_a, only_b = set(la) - set(lb), set(lb) - set(la)
        witness = min(only_a | only_b, key=format_label)
        # the side that cannot answer the witness
        side = Side.RIGHT if witness in only_a else Side.LEFT
        LOG.debug("label mismatch at %s: %s missing on %s", key, format_label(witness), side.value)
        return Distinguished((TraceStep(witness, side, Reason.MISSING_LABEL),))


def check_weak_bisim(
    a: Term,
    b: Term,
    cfg: Config,
    depth: int = DEFAULT_DEPTH,
    fuel: int = DEFAULT_FUEL,
    divergence_blind: bool = False,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> Verdict:
    return BisimulationGame(cfg, fuel, divergence_blind, max_pairs).play(a, b, depth)


def replay(a: Term, b: Term, trace: tuple[TraceStep, ...], cfg: Config, fuel: int = DEFAULT_FUEL):
    """Follow the trace's followed labels and return the final pair of label sets."""
    for s in trace:
        a = normalize_tau(a, cfg.calculus, cfg.strategy, fuel).result
        b = normalize_tau(b, cfg.calculus, cfg.strategy, fuel).result
        if s.reason is not Reason.FOLLOWED:
            break
        a, b = apply_label(a, s.label, cfg), apply_label(b, s.label, cfg)
    a = normalize_tau(a, cfg.calculus, cfg.strategy, fuel).result
    b = normalize_tau(b, cfg.calculus, cfg.strategy, fuel).result
    avoid = set(metavars(a)) | set(metavars(b))
    return labels_table(a, cfg, avoid), labels_table(b, cfg, avoid)
