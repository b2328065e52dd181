import pytest

from epimu.config import Config
from epimu.errors import ParseError


def test_defaults_and_overrides(monkeypatch):
    monkeypatch.delenv("EPIMU_BUDGET_STATES", raising=False)
    assert Config.from_env().state_cap == Config().state_cap
    monkeypatch.setenv("EPIMU_BUDGET_STATES", "17")
    assert Config.from_env().state_cap == 17
    assert Config.from_env(state_cap=5).state_cap == 5


@pytest.mark.parametrize("field", ["state_cap", "node_cap", "fuel", "oracle_depth"])
def test_budgets_must_be_positive(field):
    with pytest.raises(ValueError):
        Config(**{field: 0})


def test_parse_error_location():
    assert str(ParseError("bad", 3, 7)) == "line 3, column 7: bad"
    assert str(ParseError("bad")) == "bad"
