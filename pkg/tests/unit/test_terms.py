import pytest

from ipobisim.syntax import parse_term
from ipobisim.terms import (
    REDUCIBLE,
    VALUE,
    Abs,
    App,
    BareVar,
    Critical,
    Flavor,
    HeadStuck,
    K,
    Kp,
    LApp,
    Meta,
    S,
    Sp,
    Spp,
    Substitution,
    Var,
    alpha_eq,
    apply_subst,
    classify_cbv,
    classify_lazy,
    critical_variable,
    enumerate_lambda,
    enumerate_terms,
    fresh_metavar,
    is_cbv_value,
    is_closed,
    is_plain,
    metavars,
    rename,
    size,
    spine,
)


# ------------------------------------------------------------------
#                          CONSTRUCTORS
# ------------------------------------------------------------------
def test_size_counts_constructors_not_applications():
    assert size(K()) == 1
    assert size(App(K(), S())) == 2
    assert size(Kp(K())) == 2
    assert size(Spp(K(), App(S(), K()))) == 4
    assert size(Abs(Var(0, "x"))) == 2
    assert size(LApp(Abs(Var(0, "x")), Abs(Var(0, "x")))) == 4


def test_plain_and_closed():
    assert is_plain(parse_term("S K (K S)"))
    assert not is_plain(parse_term("S K'(K)"))
    assert is_closed(parse_term("S''(K, S) K"))
    assert not is_closed(parse_term("K ?x"))
    assert is_closed(parse_term(r"\x. x", "lambda"))
    assert not is_closed(parse_term(r"\x. y", "lambda"))


def test_metavars_in_first_occurrence_order():
    t = App(App(Meta("b"), Kp(Meta("a"))), Meta("b"))
    assert metavars(t) == ("b", "a")


def test_fresh_metavar_skips_taken_names():
    assert fresh_metavar(()) == "y1"
    assert fresh_metavar({"y1", "y2"}) == "y3"
    assert fresh_metavar({"y1"}, "z") == "z1"


def test_alpha_equality_ignores_binder_names():
    assert alpha_eq(Abs(Var(0, "x"), "x"), Abs(Var(0, "y"), "y"))
    assert not alpha_eq(Abs(Abs(Var(1, "x"))), Abs(Abs(Var(0, "x"))))
    assert Var(None, "x") != Var(0, "x")


# ------------------------------------------------------------------
#                          SUBSTITUTION
# ------------------------------------------------------------------
def test_substitution_is_sorted_and_hashable():
    theta = Substitution.of({"y": K(), "x": S()})
    assert list(theta) == ["x", "y"]
    assert theta == Substitution.of({"x": S(), "y": K()})
    assert hash(theta) == hash(Substitution.of({"x": S(), "y": K()}))
    assert "x" in theta and "z" not in theta
    assert theta["y"] == K()
    assert theta.get("z") is None
    assert theta.restrict(["y"]).as_dict() == {"y": K()}


def test_apply_subst_is_simultaneous():
    t = App(Meta("x"), Kp(Meta("y")))
    assert apply_subst(t, {"x": Meta("y"), "y": K()}) == App(Meta("y"), Kp(K()))


def test_rename():
    assert rename(Spp(Meta("a"), Meta("b")), {"a": "b", "b": "a"}) == Spp(Meta("b"), Meta("a"))


# ------------------------------------------------------------------
#                          SPINE CLASSES
# ------------------------------------------------------------------
def test_spine():
    head, args = spine(parse_term("?x K (S K)"))
    assert head == Meta("x")
    assert args == [K(), App(S(), K())]


@pytest.mark.parametrize(
    "text, expected",
    [
        ("?x", BareVar("x")),
        ("?x K S", HeadStuck("x", 2)),
        ("K'(?x)", VALUE),
        ("S''(K, S)", VALUE),
        ("K K", REDUCIBLE),
        ("K'(?x) K", REDUCIBLE),
    ],
)
def test_classify_lazy(text, expected):
    assert classify_lazy(parse_term(text)) == expected


@pytest.mark.parametrize(
    "text, expected",
    [
        ("?x", BareVar("x")),
        ("K'(?x)", VALUE),
        ("K K", REDUCIBLE),
        ("?x K", Critical("x")),
        ("K (?x K)", Critical("x")),
        ("?y ?x S", Critical("y")),
        ("K (K K)", REDUCIBLE),
    ],
)
def test_classify_cbv(text, expected):
    assert classify_cbv(parse_term(text)) == expected


def test_critical_variable():
    assert critical_variable(parse_term("S (?x K) ?y")) == "x"
    assert critical_variable(parse_term("S ?x")) is None
    assert critical_variable(parse_term("K K")) is None


def test_cbv_values():
    assert is_cbv_value(parse_term("S''(?x, K'(S))"))
    assert not is_cbv_value(Kp(App(K(), K())))
    assert not is_cbv_value(parse_term("K K"))


def test_cbv_steps_inside_administrative_forms():
    assert classify_cbv(Kp(App(K(), K()))) == REDUCIBLE
    assert classify_cbv(Spp(K(), App(Meta("x"), K()))) == Critical("x")


# ------------------------------------------------------------------
#                           ENUMERATION
# ------------------------------------------------------------------
def test_enumerate_size_one():
    assert list(enumerate_terms(1, ("x",))) == [K(), S(), Meta("x")]


def test_enumerate_plain_size_two():
    terms = list(enumerate_terms(2, (), Flavor.PLAIN))
    assert terms == [K(), S(), App(K(), K()), App(K(), S()), App(S(), K()), App(S(), S())]


def test_enumerate_star_adds_administrative_forms():
    terms = list(enumerate_terms(2, (), Flavor.STAR))
    assert terms[:6] == [K(), S(), Kp(K()), Kp(S()), Sp(K()), Sp(S())]
    assert len(terms) == 10
    assert Spp(K(), S()) in enumerate_terms(3, (), Flavor.STAR)


def test_enumerate_star_cbv_only_wraps_values():
    terms = set(enumerate_terms(4, (), Flavor.STAR_CBV))
    assert Kp(App(K(), K())) not in terms
    assert Kp(Kp(K())) in terms
    assert all(size(t) <= 4 for t in terms)


def test_enumerate_lambda_is_closed_and_sized():
    terms = list(enumerate_lambda(4))
    assert terms[0] == Abs(Var(0, "x"))
    assert all(is_closed(t) and size(t) <= 4 for t in terms)
    assert len(terms) == len(set(terms))
