"""Command-line front end.

Machine output (JSON) goes to stdout, the human-readable verdict to stderr.
Exit codes: 0 success or Equivalent, 1 Distinguished, 2 Unknown, 64 usage
error, 65 parse error.
"""

from __future__ import annotations

import json
import logging
import os
import sys
import time
from typing import Sequence

import click

from ipobisim import acceptance as acceptance_runs
from ipobisim.bisim import (
    DEFAULT_MAX_PAIRS,
    BisimulationGame,
    Distinguished,
    Equivalent,
    Verdict,
    format_verdict,
    verdict_to_json,
)
from ipobisim.config import SEED_ENV, Settings, load_settings
from ipobisim.errors import IpoBisimError, ParseError
from ipobisim.ipo import Config, LabelSet, Order, check_tables, format_label, lts_explore
from ipobisim.oracles import (
    applicative_oracle,
    argument_pool,
    congruence_harness,
    contextual_oracle,
    enumerate_contexts,
)
from ipobisim.properties import check_invariants
from ipobisim.reduction import Calculus, Status, Stepped, Strategy, normalize_tau, step
from ipobisim.syntax import format_term, parse_term
from ipobisim.translate import to_cl, to_lambda

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DISTINGUISHED = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_PARSE = 65

CALCULI = click.Choice([c.value for c in Calculus])
STRATEGIES = click.Choice([Strategy.LAZY.value, Strategy.CBV.value])


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True, ensure_ascii=False))


def _exit_code(verdict: Verdict) -> int:
    if isinstance(verdict, Equivalent):
        return EXIT_OK
    if isinstance(verdict, Distinguished):
        return EXIT_DISTINGUISHED
    return EXIT_UNKNOWN


def _settings(ctx: click.Context, **flags) -> Settings:
    """File settings with the given command-line flags on top; ``IPOBISIM_SEED`` beats ``--seed``."""
    if SEED_ENV in os.environ:
        flags.pop("seed", None)
    return ctx.obj["settings"].override(**flags)


def _parse(text: str, calculus: str, closed: bool = False):
    return parse_term(text, "lambda" if calculus == Calculus.LAMBDA.value else "cl", closed)


def lts_options(f):
    """Options shared by the commands that build a transition system."""
    options = [
        click.option("--calculus", type=CALCULI, default=Calculus.CLSTAR.value, show_default=True),
        click.option(
            "--order", type=click.Choice([o.value for o in Order]), default=Order.SECOND.value, show_default=True
        ),
        click.option("--strategy", type=STRATEGIES, default=Strategy.LAZY.value, show_default=True),
        click.option(
            "--labels",
            "label_set",
            type=click.Choice([l.value for l in LabelSet]),
            default=LabelSet.FINITE.value,
            show_default=True,
        ),
        click.option("--depth", type=int, default=None, help="Label rounds (default from ipobisim.toml)."),
        click.option("--fuel", type=int, default=None, help="τ-steps per normalization."),
        click.option("--pool", type=int, default=None, help="Size bound of first-order argument pools."),
        click.option("--arg-bound", type=int, default=None, help="Fresh-argument bound of unpruned labels."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _config(settings: Settings, calculus: str, order: str, strategy: str, label_set: str) -> Config:
    return Config(
        calculus, order, strategy, label_set, arg_pool=settings.pool, arg_bound=settings.arg_bound
    ).validate()


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for info logs, -vv for debug logs.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cli(ctx: click.Context, verbose: int, config_path: str | None):
    """Derive IPO transition systems for λ/CL and check weak bisimilarity."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    ctx.obj["settings"] = load_settings(config_path)


# ------------------------------------------------------------------
#                             TERMS
# ------------------------------------------------------------------
@cli.command()
@click.argument("text")
@click.option("--calculus", type=CALCULI, default=Calculus.CLSTAR.value, show_default=True)
def parse(text: str, calculus: str) -> int:
    """Echo the canonical form of a term."""
    click.echo(format_term(_parse(text, calculus)))
    return EXIT_OK


@cli.command()
@click.argument("text")
@click.option("--calculus", type=CALCULI, default=Calculus.CLSTAR.value, show_default=True)
@click.option("--strategy", type=click.Choice([s.value for s in Strategy]), default="lazy", show_default=True)
@click.option("--fuel", type=int, default=None)
@click.option("--trace", is_flag=True, help="Print every intermediate term.")
@click.pass_context
def reduce(ctx: click.Context, text: str, calculus: str, strategy: str, fuel: int | None, trace: bool) -> int:
    """Normalize a term under a strategy."""
    fuel = _settings(ctx, fuel=fuel).fuel
    term = _parse(text, calculus, closed=calculus == Calculus.LAMBDA.value)
    if trace:
        current = term
        click.echo(format_term(current))
        for _ in range(fuel):
            result = step(current, calculus, strategy)
            if not isinstance(result, Stepped):
                break
            current = result.next
            click.echo(format_term(current))
    outcome = normalize_tau(term, calculus, strategy, fuel)
    _emit({"result": format_term(outcome.result), "status": outcome.status.value, "steps": outcome.steps})
    return EXIT_OK if outcome.status is Status.NORMAL else EXIT_UNKNOWN


@cli.command()
@click.argument("text")
@click.option("--dir", "direction", type=click.Choice(["lambda-to-cl", "cl-to-lambda"]), required=True)
def translate(text: str, direction: str) -> int:
    """Translate between λ-terms and CL."""
    if direction == "lambda-to-cl":
        click.echo(format_term(to_cl(parse_term(text, "lambda"))))
    else:
        click.echo(format_term(to_lambda(parse_term(text, "cl"))))
    return EXIT_OK


# ------------------------------------------------------------------
#                       TRANSITION SYSTEMS
# ------------------------------------------------------------------
@cli.command()
@click.argument("text")
@lts_options
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)
@click.option("--jobs", type=int, default=None, help="Worker threads for frontier expansion.")
@click.pass_context
def lts(ctx, text, calculus, order, strategy, label_set, depth, fuel, pool, arg_bound, fmt, jobs) -> int:
    """Dump the weak transitions reachable from a term."""
    settings = _settings(ctx, depth=depth, fuel=fuel, pool=pool, arg_bound=arg_bound, jobs=jobs)
    cfg = _config(settings, calculus, order, strategy, label_set)
    graph = lts_explore(_parse(text, calculus), cfg, settings.depth, settings.fuel, settings.jobs)
    for line in graph.dump(fmt):
        click.echo(line)
    LOG.info("%d states, %d transitions", len(graph.states), len(graph.transitions))
    return EXIT_OK


@cli.command()
@click.argument("left")
@click.argument("right")
@lts_options
@click.option("--divergence-blind", is_flag=True, help="Treat mutual fuel exhaustion as matching.")
@click.option("--max-pairs", type=int, default=DEFAULT_MAX_PAIRS, show_default=True)
@click.option("--timing", is_flag=True, help="Add wall-clock time to the report.")
@click.pass_context
def bisim(
    ctx, left, right, calculus, order, strategy, label_set, depth, fuel, pool, arg_bound,
    divergence_blind, max_pairs, timing,
) -> int:
    """Play the bounded weak-bisimulation game on two terms."""
    settings = _settings(ctx, depth=depth, fuel=fuel, pool=pool, arg_bound=arg_bound)
    cfg = _config(settings, calculus, order, strategy, label_set)
    a, b = _parse(left, calculus), _parse(right, calculus)
    game = BisimulationGame(cfg, settings.fuel, divergence_blind, max_pairs)
    started = time.perf_counter()
    verdict = game.play(a, b, settings.depth)
    stats = game.stats.to_json()
    if timing:
        stats["wall_ms"] = round((time.perf_counter() - started) * 1000)
    _emit({"depth": settings.depth, "trace": [], **verdict_to_json(verdict), "stats": stats})
    click.echo(format_verdict(verdict), err=True)
    return _exit_code(verdict)


@cli.command("check-tables")
@click.option("--max-size", type=int, default=6, show_default=True)
@click.option("--max-metavars", type=int, default=2, show_default=True)
@click.option("--arg-bound", type=int, default=None)
@click.option("--jobs", type=int, default=None, help="Worker processes for the enumeration.")
@click.pass_context
def check_tables_cmd(ctx, max_size: int, max_metavars: int, arg_bound: int | None, jobs: int | None) -> int:
    """Diff the unification-derived labels against the label tables."""
    settings = _settings(ctx, arg_bound=arg_bound, jobs=jobs)
    report = check_tables(max_size, max_metavars, settings.arg_bound, settings.jobs)
    for diff in report.diffs:
        _emit(
            {
                "state": format_term(diff.state),
                "mode": diff.mode,
                "table": [format_label(l) for l in diff.table],
                "generic": [format_label(l) for l in diff.generic],
            }
        )
    click.echo(f"{report.terms_checked} terms, {len(report.diffs)} diffs", err=True)
    return EXIT_OK if report.ok else EXIT_DISTINGUISHED


# ------------------------------------------------------------------
#                            ORACLES
# ------------------------------------------------------------------
@cli.group()
def oracle():
    """Applicative and contextual equivalence oracles."""


def oracle_options(f):
    options = [
        click.argument("left"),
        click.argument("right"),
        click.option("--calculus", type=click.Choice(["lambda", "cl"]), default="lambda", show_default=True),
        click.option("--strategy", type=STRATEGIES, default="lazy", show_default=True),
        click.option("--pool", type=int, default=None),
        click.option("--fuel", type=int, default=None),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _oracle_verdict(verdict: Verdict) -> int:
    _emit(verdict_to_json(verdict))
    click.echo(format_verdict(verdict), err=True)
    return _exit_code(verdict)


@oracle.command()
@oracle_options
@click.option("--depth", type=int, default=3, show_default=True)
@click.pass_context
def applicative(ctx, left, right, calculus, strategy, pool, fuel, depth) -> int:
    """Probe two closed terms with argument sequences."""
    settings = _settings(ctx, pool=pool, fuel=fuel)
    a, b = _parse(left, calculus, closed=True), _parse(right, calculus, closed=True)
    probes = argument_pool(calculus, strategy, settings.pool)
    return _oracle_verdict(applicative_oracle(a, b, calculus, strategy, probes, depth, settings.fuel))


@oracle.command()
@oracle_options
@click.option("--context-size", type=int, default=None)
@click.pass_context
def contextual(ctx, left, right, calculus, strategy, pool, fuel, context_size) -> int:
    """Compare halting of two closed terms in every pool context."""
    settings = _settings(ctx, pool=pool, fuel=fuel, context_size=context_size)
    a, b = _parse(left, calculus, closed=True), _parse(right, calculus, closed=True)
    contexts = enumerate_contexts(
        settings.context_size, argument_pool(calculus, strategy, settings.pool), calculus
    )
    return _oracle_verdict(contextual_oracle(a, b, calculus, strategy, contexts, settings.fuel))


# ------------------------------------------------------------------
#                           PROPERTIES
# ------------------------------------------------------------------
@cli.group()
def prop():
    """Property suites."""


@prop.command()
@click.option("--pair", "pairs", nargs=2, multiple=True, help="Pair of CL* terms (repeatable).")
@lts_options
@click.option("--samples", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=None)
@click.pass_context
def congruence(ctx, pairs, calculus, order, strategy, label_set, depth, fuel, pool, arg_bound, samples, seed) -> int:
    """Sample contexts and substitutions around certified pairs."""
    settings = _settings(ctx, fuel=fuel, pool=pool, arg_bound=arg_bound, seed=seed)
    cfg = _config(settings, calculus, order, strategy, label_set)
    terms = [(_parse(a, calculus), _parse(b, calculus)) for a, b in pairs or acceptance_runs.CONGRUENCE_PAIRS]
    # certificates are taken two rounds deeper than the checks
    certified_depth = depth if depth is not None else settings.depth + 2
    report = congruence_harness(terms, cfg, samples, settings.seed, certified_depth, settings.fuel)
    _emit(report.to_json())
    click.echo(
        f"{report.samples} samples, {report.equivalent} equivalent, "
        f"{report.unknown} unknown, {len(report.violations)} violations",
        err=True,
    )
    return EXIT_OK if report.ok else EXIT_DISTINGUISHED


@prop.command()
@click.option("--max-size", type=int, default=8, show_default=True)
@click.option("--mgu-pairs", type=int, default=10_000, show_default=True)
@click.pass_context
def invariants(ctx, max_size: int, mgu_pairs: int) -> int:
    """Run the invariant suite over the enumerated corpora."""
    report = check_invariants(max_size, _settings(ctx).seed, mgu_pairs)
    _emit(report.to_json())
    click.echo(f"{len(report.failures)} failures", err=True)
    return EXIT_OK if report.ok else EXIT_DISTINGUISHED


@cli.command()
@click.argument("number", type=click.IntRange(1, len(acceptance_runs.CRITERIA)))
@click.pass_context
def acceptance(ctx, number: int) -> int:
    """Run one acceptance experiment."""
    result = acceptance_runs.CRITERIA[number](_settings(ctx).acceptance)
    _emit(result)
    click.echo(f"criterion {number}: {'ok' if result['ok'] else 'FAILED'}", err=True)
    return EXIT_OK if result["ok"] else EXIT_DISTINGUISHED


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        code = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="ipobisim",
            standalone_mode=False,
        )
    except ParseError as e:
        click.echo(f"parse error {e}", err=True)
        return EXIT_PARSE
    except IpoBisimError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_OK


def main() -> None:
    sys.exit(run())
