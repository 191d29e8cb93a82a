import pytest

from ipobisim import ipo
from ipobisim.errors import NotEnabled, UnsupportedConfig
from ipobisim.ipo import (
    TAU,
    Config,
    Label,
    Transition,
    WeakStatus,
    apply_label,
    argument_pools,
    canonicalize,
    check_tables,
    format_label,
    label_to_json,
    labels_generic,
    labels_table,
    lts_explore,
    plug,
    weak_successor,
)
from ipobisim.reduction import Calculus, Strategy
from ipobisim.syntax import parse_term
from ipobisim.terms import App, K, Kp, Meta, S, Substitution, metavars


def texts(labels):
    return [format_label(l) for l in labels]


# ------------------------------------------------------------------
#                             CONFIG
# ------------------------------------------------------------------
@pytest.mark.parametrize(
    "kwargs",
    [
        {"strategy": "normal_full"},
        {"calculus": "cl"},
        {"calculus": "lambda", "order": "first"},
        {"strategy": "cbv"},
        {"arg_pool": 0},
        {"arg_bound": 0, "label_set": "reactive"},
    ],
)
def test_unsupported_configurations(kwargs):
    with pytest.raises(UnsupportedConfig):
        Config(**kwargs).validate()


def test_supported_configurations(lazy_finite, cbv_reactive, first_order_cl):
    for cfg in (lazy_finite, cbv_reactive, first_order_cl):
        assert cfg.validate() is cfg
    assert Config("lambda", "first", "cbv", "reactive").validate().calculus is Calculus.LAMBDA


def test_exactness(lazy_finite, lazy_reactive, cbv_reactive, first_order_cl):
    assert lazy_finite.exact
    assert cbv_reactive.exact
    assert not lazy_reactive.exact
    assert not first_order_cl.exact
    assert lazy_finite.describe() == "clstar/second/lazy/finite"


# ------------------------------------------------------------------
#                             LABELS
# ------------------------------------------------------------------
def test_label_printing():
    assert format_label(TAU) == "tau"
    assert format_label(Label(args=(Meta("y1"),))) == "[_] ?y1"
    assert format_label(Label(Substitution.of({"x": K()}), args=(Meta("y1"),))) == "[_{?x:=K}] ?y1"
    assert format_label(Label(left=Kp(Meta("z1")))) == "K'(?z1) [_]"
    assert format_label(Label(args=(App(K(), K()),))) == "[_] (K K)"
    assert label_to_json(TAU) == "tau"
    assert label_to_json(Label(left=S())) == {"subst": {}, "left": "S", "args": []}


def test_canonicalize_numbers_by_first_occurrence():
    raw = Label(Substitution.of({"x": Kp(Meta("a"))}), args=(Meta("b"), Meta("a")))
    assert format_label(canonicalize(raw, ["x"])) == "[_{?x:=K'(?z1)}] ?y1 ?z1"
    assert format_label(canonicalize(Label(args=(Meta("#y1"),)), ["y1"])) == "[_] ?y2"
    assert format_label(canonicalize(Label(args=(Meta("#y1"),)), [], avoid={"y1", "y2"})) == "[_] ?y3"


@pytest.mark.parametrize("text", ["K", "?x", "?x K", "S ?x", "K'(?x)", "?x ?y", "S''(?x, K) ?y"])
def test_canonical_labels_are_stable_and_distinct(text, lazy_all):
    state = parse_term(text)
    names = metavars(state)
    raw = list(ipo._second_lazy_labels(state, lazy_all))
    once = [canonicalize(l, names) for l in raw]
    assert [canonicalize(l, names) for l in once] == once
    assert len(set(once)) == len(set(raw))


def test_lazy_finite_rows(lazy_finite):
    assert texts(labels_table(parse_term("K"), lazy_finite)) == ["[_] ?y1"]
    assert labels_table(parse_term("K K"), lazy_finite) == [TAU]
    assert set(texts(labels_table(Meta("x"), lazy_finite))) == {
        "[_{?x:=K}] ?y1",
        "[_{?x:=S}] ?y1",
        "[_{?x:=K'(?z1)}] ?y1",
        "[_{?x:=S'(?z1)}] ?y1",
        "[_{?x:=S''(?z1, ?z2)}] ?y1",
    }
    assert set(texts(labels_table(parse_term("?x K"), lazy_finite))) == {
        "[_{?x:=K}]",
        "[_{?x:=S}]",
        "[_{?x:=K'(?z1)}]",
        "[_{?x:=S'(?z1)}]",
        "[_{?x:=S''(?z1, ?z2)}]",
    }


def test_labels_are_sorted_by_text(lazy_finite):
    labels = texts(labels_table(Meta("x"), lazy_finite))
    assert labels == sorted(labels)


def test_lazy_reactive_adds_applied_instances(lazy_reactive):
    bare = texts(labels_table(Meta("x"), lazy_reactive))
    assert len(bare) == 10
    assert "[_{?x:=K ?y1}]" in bare
    stuck = texts(labels_table(parse_term("?x K"), lazy_reactive))
    assert len(stuck) == 15
    assert "[_{?x:=S ?y1 ?y2}]" in stuck


def test_all_ipo_adds_left_probes(lazy_all):
    labels = texts(labels_table(parse_term("K"), lazy_all))
    assert "K [_]" in labels
    assert "(K ?y1) [_]" in labels
    assert len(labels) == 11


def test_cbv_rows(cbv_reactive):
    assert len(labels_table(Meta("x"), cbv_reactive)) == 10
    assert "S [_]" in texts(labels_table(Meta("x"), cbv_reactive))
    assert set(texts(labels_table(parse_term("?x K"), cbv_reactive))) == {
        "[_{?x:=K}]",
        "[_{?x:=S}]",
        "[_{?x:=K'(?z1)}]",
        "[_{?x:=S'(?z1)}]",
        "[_{?x:=S''(?z1, ?z2)}]",
    }
    assert len(labels_table(parse_term("K"), cbv_reactive)) == 6
    assert labels_table(parse_term("K (K K)"), cbv_reactive) == [TAU]


def test_avoid_moves_fresh_names(lazy_finite):
    assert texts(labels_table(parse_term("K"), lazy_finite, avoid={"y1"})) == ["[_] ?y2"]


def test_first_order_cl_labels(first_order_cl):
    pools = argument_pools(Calculus.CL, Strategy.LAZY, 2)
    assert len(pools.terms) == 6
    assert len(labels_table(parse_term("K"), first_order_cl)) == 36
    assert len(labels_table(parse_term("S (K K) (S K K)"), first_order_cl)) == 6
    assert labels_table(parse_term("K K K"), first_order_cl) == [TAU]
    assert labels_table(parse_term("?x K"), first_order_cl) == []


def test_first_order_cl_cbv_labels():
    cfg = Config("cl", "first", "cbv", "reactive", arg_pool=3)
    k_row = texts(labels_table(parse_term("K"), cfg))
    for label in ("[_] K S", "[_] (K K K)", "[_] K (K K K)", "K [_] K", "K [_] (K K K)"):
        assert label in k_row
    for label in ("S [_] K S", "S [_] (K K K)", "S [_] K (K K K)"):
        assert label in k_row
    # non-value arguments stop before the head is saturated
    assert "[_] K K (K K K)" not in k_row
    assert "K [_] K (K K K)" not in k_row
    s_row = texts(labels_table(parse_term("S"), cfg))
    assert "[_] K K (K K K)" in s_row
    assert "[_] K K K (K K K)" not in s_row


def test_first_order_cl_lazy_all_labels():
    cfg = Config("cl", "first", "lazy", "all", arg_pool=2)
    row = texts(labels_table(parse_term("K"), cfg))
    for label in ("[_] K S", "K [_] S", "(K S) [_]", "S [_] K S", "(S K) [_] S"):
        assert label in row
    reactive = texts(labels_table(parse_term("K"), Config("cl", "first", "lazy", "reactive", arg_pool=2)))
    assert "K [_] S" not in reactive


def test_first_order_lambda_labels():
    cfg = Config("lambda", "first", "cbv", "reactive", arg_pool=3)
    labels = texts(labels_table(parse_term(r"\x. x", "lambda"), cfg))
    assert r"[_] (\x. x)" in labels
    assert r"(\x. x) [_]" in labels


# ------------------------------------------------------------------
#                    UNIFICATION-DERIVED LABELS
# ------------------------------------------------------------------
@pytest.mark.parametrize("text", ["K", "?x", "?x ?x", "?x K", "K'(?x)", "S ?x", "K ?x ?x"])
def test_generic_labels_match_the_tables(text, lazy_finite, lazy_reactive):
    t = parse_term(text)
    assert labels_generic(t, lazy_reactive) == labels_table(t, lazy_reactive)
    assert labels_generic(t, lazy_reactive, prune=True) == labels_table(t, lazy_finite)


def test_generic_labels_only_exist_for_the_lazy_second_order_system(cbv_reactive):
    with pytest.raises(UnsupportedConfig):
        labels_generic(Meta("x"), cbv_reactive)


def test_table_check_over_small_terms():
    report = check_tables(max_size=3, max_metavars=1, arg_bound=2)
    assert report.terms_checked > 0
    assert report.ok, [(d.state, d.mode) for d in report.diffs[:5]]


def test_table_check_is_independent_of_jobs():
    serial = check_tables(max_size=4, max_metavars=2, arg_bound=2)
    pooled = check_tables(max_size=4, max_metavars=2, arg_bound=2, jobs=2)
    assert pooled.terms_checked == serial.terms_checked > 0
    assert pooled.diffs == serial.diffs == []


def test_table_check_reports_each_mismatch_once(monkeypatch):
    monkeypatch.setattr(ipo, "_generic_labels", lambda *args: set())
    report = check_tables(max_size=1, max_metavars=1, arg_bound=2)
    assert report.terms_checked == 3
    assert {d.mode for d in report.diffs} == {"finite", "reactive"}
    assert len(report.diffs) == 2 * report.terms_checked
    assert all(d.generic == [] and d.table for d in report.diffs)


# ------------------------------------------------------------------
#                          TRANSITIONS
# ------------------------------------------------------------------
def test_plug_and_apply(lazy_finite):
    label = Label(Substitution.of({"x": K()}), args=(Meta("y1"),))
    assert plug(Meta("x"), label) == App(K(), Meta("y1"))
    assert apply_label(Meta("x"), label, lazy_finite) == Kp(Meta("y1"))


def test_apply_label_requires_a_reaction(lazy_finite):
    with pytest.raises(NotEnabled):
        apply_label(Meta("x"), Label(Substitution.of({"y": K()})), lazy_finite)


def test_weak_successor_folds_tau_steps(lazy_finite):
    # S K K →τ S'(K) K →τ S''(K, K); then [_] ?y1 → K ?y1 (K ?y1) →τ K'(?y1) (K ?y1) →τ ?y1
    result = weak_successor(parse_term("S K K"), Label(args=(Meta("y1"),)), lazy_finite)
    assert result.status is WeakStatus.OK
    assert result.target == Meta("y1")
    assert result.tau_folded == 4


def test_weak_successor_statuses(lazy_finite, omega_cl):
    assert weak_successor(omega_cl, Label(args=(Meta("y1"),)), lazy_finite, fuel=20).status is (
        WeakStatus.FUEL_EXHAUSTED
    )
    missing = weak_successor(K(), Label(args=(Meta("y7"),)), lazy_finite)
    assert missing.status is WeakStatus.NOT_ENABLED
    assert weak_successor(parse_term("K K"), TAU, lazy_finite).target == Kp(K())


def test_lts_explore(lazy_finite):
    graph = lts_explore(parse_term("K"), lazy_finite, depth=2)
    assert [t.to_text() for t in graph.transitions] == [
        "K --[_] ?y1--> K'(?y1) (tau x0)",
        "K'(?y1) --[_] ?y2--> ?y1 (tau x0)",
    ]
    assert graph.frontier == [Meta("y1")]


def test_lts_explore_is_independent_of_jobs(lazy_finite):
    root = parse_term("S ?x")
    serial = lts_explore(root, lazy_finite, depth=2)
    threaded = lts_explore(root, lazy_finite, depth=2, jobs=4)
    assert list(serial.dump("json")) == list(threaded.dump("json"))
    assert isinstance(serial.transitions[0], Transition)
