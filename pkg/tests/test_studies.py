import math

import numpy as np
import pytest
from scipy import stats

from archicens.copulas import Family
from archicens.data import Scenario, simulate_censored
from archicens.studies import (
    TABLES,
    NormalCopula,
    StudyTable,
    bootstrap_study,
    gof_study,
    graphical_study,
    independence_study,
    limit_study,
    omnibus_rejection_study,
    omnibus_study,
    scenario_config,
)


def test_normal_copula_tau_and_sampler():
    c = NormalCopula(0.35)
    assert c.tau() == pytest.approx(2 / math.pi * math.asin(0.35))
    u = c.sample(20_000, np.random.default_rng(0))
    assert u.min() > 0 and u.max() < 1
    assert stats.kendalltau(u[:, 0], u[:, 1])[0] == pytest.approx(c.tau(), abs=0.015)


def test_scenario_config_hits_target():
    cfg = scenario_config("joe", 0.4, 20_000, "double", seed=1)
    s = simulate_censored(cfg)
    assert s.scenario is Scenario.DOUBLE and s.censored_fraction == pytest.approx(0.2, abs=0.015)
    assert scenario_config("frank", 0.0, 10).copula.is_independence
    assert scenario_config("frank", 0.4, 10, "none").censor1 is None


def test_independence_study_shape_and_targets():
    t = independence_study(replicates=3, n=200, seed=1)
    assert [r["family"] for r in t.rows] == ["clayton", "frank", "gumbel", "joe"]
    assert [r["target"] for r in t.rows] == [0.0, 0.0, 1.0, 1.0]
    for r in t.rows:
        assert abs(r["mean_alpha_hat"] - r["target"]) < 0.5 and r["mc_se"] >= 0
    assert independence_study(replicates=3, n=200, seed=1).rows == t.rows


def test_omnibus_tables():
    t = omnibus_study(n=200, scenarios=("double",), families=("clayton",), seed=2)
    assert len(t.rows) == 4 and {r["true"] for r in t.rows} == {"clayton"}
    r = omnibus_rejection_study(replicates=2, n=150, scenarios=("none",), families=("frank",), seed=2)
    row = r.rows[0]
    rates = [row[f] for f in ("clayton", "frank", "gumbel", "joe")]
    # exactly one winner per replicate: the non-rejection fractions sum to one
    assert sum(1 - x for x in rates) == pytest.approx(1.0)


def test_graphical_bootstrap_gof_limit_smoke():
    g = graphical_study(replicates=2, n=150, families=("gumbel",), seed=3)
    assert 0 <= g.rows[0]["nearest_fraction"] <= 1
    b = bootstrap_study(n=120, B=2, seed=3)
    assert b.rows[0]["winner"] in ("clayton", "frank", "gumbel", "joe")
    w = gof_study(replicates=2, n=60, taus=(0.4,), M=2, seed=3)
    assert set(w.rows[0]) >= {"clayton", "frank", "gumbel", "joe", "tau"}
    lim = limit_study(replicates=2, n=100, presets=("low",), seed=3)
    row = lim.rows[0]
    assert row["preset"] == "low" and 0 <= row["agreement"] <= 1
    assert "tau_hat_q0.99" in row and "mode_q0.75" in row


def test_study_table_io(tmp_path):
    t = StudyTable("demo", [{"a": 1.0, "b": "x"}, {"a": 2.5, "c": 3}], {})
    assert t.columns() == ["a", "b", "c"]
    t.to_csv(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "a,b,c"
    assert t.to_text().splitlines()[0] == "# demo"


def test_table_registry():
    assert set(TABLES) == {"4", "5", "6", "7", "8", "graphical", "limit"}
    assert Family.parse("Gumbel") is Family.GUMBEL
