import pytest

from ipobisim.acceptance import CRITERIA, cbv_counterexample, table_equivalence
from ipobisim.config import ACCEPTANCE_DEFAULTS


@pytest.mark.parametrize("number", [1, 2])
def test_cheap_criteria(number):
    result = CRITERIA[number](ACCEPTANCE_DEFAULTS)
    assert result["ok"], result


def test_cbv_counterexample_is_confirmed_by_the_contextual_oracle():
    result = cbv_counterexample(ACCEPTANCE_DEFAULTS)
    assert result["ok"], result
    assert result["translation_matches"]
    assert result["contextual_oracle"]["verdict"] == "distinguished"


def test_table_equivalence_on_a_small_corpus():
    params = dict(ACCEPTANCE_DEFAULTS, tables_max_size=3, tables_max_metavars=1, tables_jobs=1)
    result = table_equivalence(params)
    assert result["ok"]
    assert result["diffs"] == []


def test_every_criterion_is_registered():
    assert sorted(CRITERIA) == list(range(1, 9))
