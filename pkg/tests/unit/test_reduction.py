import pytest

from ipobisim import reduction
from ipobisim.errors import OpenTermError, TermError
from ipobisim.oracles import OMEGA, OMEGA_CL
from ipobisim.reduction import (
    Calculus,
    Halted,
    Status,
    Stepped,
    Strategy,
    StuckOpen,
    beta,
    contract,
    normalize_tau,
    reactive_steps,
    shift,
    step,
    substitute_free,
)
from ipobisim.syntax import parse_term
from ipobisim.terms import VALUE, Abs, App, BareVar, K, Kp, LApp, Meta, Sp, Spp, Var


def lam(text):
    return parse_term(text, "lambda")


# ------------------------------------------------------------------
#                          LAMBDA CALCULUS
# ------------------------------------------------------------------
def test_beta_substitutes_under_binders():
    # (\x. \y. x) (\z. z) → \y. \z. z
    fun = lam(r"\x y. x")
    assert beta(fun, lam(r"\z. z")) == lam(r"\y z. z")


def test_beta_adjusts_indices_around_the_removed_binder():
    # λ. (λx. λy. x y) w  with w the outer bound variable
    fun = Abs(Abs(LApp(Var(1, "x"), Var(0, "y"))))
    assert beta(fun, Var(0, "w")) == Abs(LApp(Var(1, "w"), Var(0, "y")))
    # a variable bound above the redex loses the removed binder
    assert beta(Abs(Var(1, "v")), lam(r"\z. z")) == Var(0, "v")


def test_beta_shifts_the_argument_once_per_occurrence(monkeypatch):
    calls = []
    real_shift = reduction.shift

    def counting_shift(m, d, cutoff=0):
        calls.append(d)
        return real_shift(m, d, cutoff)

    monkeypatch.setattr(reduction, "shift", counting_shift)
    body = Var(10, "x")
    for _ in range(10):
        body = Abs(body)
    result = beta(Abs(body), Var(None, "f"))
    for _ in range(10):
        result = result.body
    assert result == Var(None, "f")
    assert calls == [10]


def test_shift_only_moves_free_indices():
    m = Abs(LApp(Var(0, "x"), Var(1, "y")))
    assert shift(m, 2) == Abs(LApp(Var(0, "x"), Var(3, "y")))


def test_substitute_free():
    m = lam(r"\x. f x")
    assert substitute_free(m, "f", lam(r"\y. y")) == lam(r"\x. (\y. y) x")


def test_lazy_lambda_does_not_touch_arguments():
    m = lam(r"(\x y. y) ((\z. z z) (\z. z z))")
    assert step(m, Calculus.LAMBDA, Strategy.LAZY) == Stepped(lam(r"\y. y"))
    assert step(lam(r"\x. x"), "lambda", "lazy") == Halted(VALUE)


def test_cbv_lambda_evaluates_the_argument_first():
    m = lam(r"(\x y. y) ((\z. z) (\z. z))")
    assert step(m, Calculus.LAMBDA, Strategy.CBV) == Stepped(lam(r"(\x y. y) (\z. z)"))


def test_open_lambda_terms_are_rejected():
    with pytest.raises(OpenTermError):
        step(lam("x (\\y. y)"), Calculus.LAMBDA, Strategy.LAZY)


def test_omega_runs_out_of_fuel():
    outcome = normalize_tau(OMEGA, Calculus.LAMBDA, Strategy.LAZY, fuel=10)
    assert outcome.status is Status.FUEL_EXHAUSTED
    assert outcome.steps == 10
    assert not outcome.halted


def test_normal_order_reduces_under_binders():
    outcome = normalize_tau(lam(r"\x. (\y. y) x"), Calculus.LAMBDA, Strategy.NORMAL_FULL)
    assert outcome.result == lam(r"\x. x")
    assert outcome.steps == 1


# ------------------------------------------------------------------
#                             PLAIN CL
# ------------------------------------------------------------------
def test_plain_cl_fires_saturated_heads():
    outcome = normalize_tau(parse_term("S K K ?x"), Calculus.CL, Strategy.LAZY)
    assert outcome.result == Meta("x")
    assert outcome.steps == 2


def test_plain_cl_partial_applications_are_values():
    assert step(parse_term("S K"), Calculus.CL, Strategy.LAZY) == Halted(VALUE)
    assert step(parse_term("?x K"), Calculus.CL, Strategy.LAZY) == StuckOpen("x")


def test_plain_cl_cbv_evaluates_arguments():
    t = parse_term("K (K K K) S")
    assert step(t, Calculus.CL, Strategy.CBV) == Stepped(parse_term("K K S"))
    assert step(t, Calculus.CL, Strategy.LAZY) == Stepped(parse_term("K K K"))


def test_plain_cl_rejects_administrative_forms():
    with pytest.raises(TermError):
        step(parse_term("K'(K) S"), Calculus.CL, Strategy.LAZY)


# ------------------------------------------------------------------
#                               CL*
# ------------------------------------------------------------------
def test_star_lazy_fires_one_argument_at_a_time():
    t = parse_term("S K K ?x")
    assert step(t, Calculus.CLSTAR, Strategy.LAZY) == Stepped(App(App(Sp(K()), K()), Meta("x")))
    outcome = normalize_tau(t, Calculus.CLSTAR, Strategy.LAZY)
    assert outcome.result == Meta("x")
    assert outcome.steps == 5


def test_star_lazy_values_and_stuck_terms():
    assert step(parse_term("S''(?x, K)"), Calculus.CLSTAR, Strategy.LAZY) == Halted(VALUE)
    assert step(parse_term("?x K"), Calculus.CLSTAR, Strategy.LAZY) == StuckOpen("x")


def test_star_cbv():
    assert step(Meta("x"), Calculus.CLSTAR, Strategy.CBV) == Halted(BareVar("x"))
    assert step(parse_term("?x K"), Calculus.CLSTAR, Strategy.CBV) == StuckOpen("x")
    assert step(Kp(App(K(), K())), Calculus.CLSTAR, Strategy.CBV) == Stepped(Kp(Kp(K())))
    assert step(parse_term("K (K K)"), Calculus.CLSTAR, Strategy.CBV) == Stepped(parse_term("K K'(K)"))


def test_skk_normalizes_to_a_cbv_value():
    outcome = normalize_tau(parse_term("S K K"), Calculus.CLSTAR, Strategy.CBV)
    assert outcome.result == Spp(K(), K())


def test_omega_cl_diverges():
    outcome = normalize_tau(OMEGA_CL, Calculus.CLSTAR, Strategy.LAZY, fuel=50)
    assert outcome.status is Status.FUEL_EXHAUSTED


def test_calculus_mismatch():
    with pytest.raises(TermError):
        step(K(), Calculus.LAMBDA, Strategy.LAZY)
    with pytest.raises(TermError):
        step(lam(r"\x. x"), Calculus.CLSTAR, Strategy.LAZY)
    with pytest.raises(TermError):
        step(K(), Calculus.CLSTAR, Strategy.NORMAL_FULL)


# ------------------------------------------------------------------
#                      CONTEXT-SEARCH STEPPER
# ------------------------------------------------------------------
def test_contract_only_fires_at_the_root():
    assert contract(parse_term("K K"), Calculus.CLSTAR, Strategy.LAZY) == Kp(K())
    assert contract(parse_term("K K K"), Calculus.CLSTAR, Strategy.LAZY) is None
    assert contract(parse_term("K (K K)"), Calculus.CLSTAR, Strategy.CBV) is None


@pytest.mark.parametrize(
    "text, calculus, strategy",
    [
        ("K K K", "clstar", "lazy"),
        ("K (K K)", "clstar", "cbv"),
        ("S K K S", "clstar", "cbv"),
        ("K (K K K) S", "cl", "cbv"),
        ("K K K (S K K S)", "cl", "cbv"),
        ("S (K K) (S K K) S", "cl", "lazy"),
    ],
)
def test_reactive_search_agrees_with_the_stepper(text, calculus, strategy):
    t = parse_term(text)
    result = step(t, calculus, strategy)
    assert isinstance(result, Stepped)
    assert reactive_steps(t, calculus, strategy) == [result.next]


def test_reactive_search_finds_nothing_in_values():
    assert reactive_steps(parse_term("S''(K, S)"), "clstar", "cbv") == []
    assert reactive_steps(lam(r"\x. (\y. y) x"), "lambda", "lazy") == []
