import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archicens.copulas import alpha_from_tau, independence
from archicens.data import (
    UNIT_EXPONENTIAL,
    DataError,
    MarginalModel,
    Sample,
    Scenario,
    SimulationConfig,
    calibrate_censoring,
    load_csv,
    load_scenario,
    save_csv,
    simulate_censored,
    stream,
)

CLAYTON_04 = alpha_from_tau("clayton", 0.4)


def test_no_censors_give_complete_sample():
    cfg = SimulationConfig(CLAYTON_04, 200, seed=4)
    s, t = simulate_censored(cfg, return_latent=True)
    assert s.scenario is Scenario.COMPLETE
    np.testing.assert_array_equal(s.y1, t[:, 0])
    np.testing.assert_array_equal(s.y2, t[:, 1])


def test_calibrated_double_censoring_hits_twenty_percent():
    c1, c2 = calibrate_censoring(CLAYTON_04, (UNIT_EXPONENTIAL, UNIT_EXPONENTIAL), 0.2, "double")
    assert c1 == c2  # exchangeable design, one common rate
    s = simulate_censored(SimulationConfig(CLAYTON_04, 10_000, censor1=c1, censor2=c2, seed=1))
    assert s.censored_fraction == pytest.approx(0.2, abs=0.03)
    # independent pilot with a different seed (the oracle of the calibration)
    big = simulate_censored(SimulationConfig(CLAYTON_04, 400_000, censor1=c1, censor2=c2, seed=99))
    assert 0.19 <= big.censored_fraction <= 0.21


def test_single_scenario_censors_margin_one_only():
    c1, c2 = calibrate_censoring(CLAYTON_04, (UNIT_EXPONENTIAL, UNIT_EXPONENTIAL), 0.2, "single")
    assert c1 is not None and c2 is None
    s = simulate_censored(SimulationConfig(CLAYTON_04, 2000, censor1=c1, seed=3))
    assert s.delta2.all() and not s.delta1.all()
    assert s.scenario is Scenario.SINGLE1


def test_small_target_gives_small_rate():
    rates = [
        calibrate_censoring(CLAYTON_04, (UNIT_EXPONENTIAL,) * 2, t, "double")[0].rate for t in (1e-2, 1e-3, 1e-4)
    ]
    assert rates[0] > rates[1] > rates[2]
    assert rates[2] < 1e-3


def test_calibration_rejects_bad_targets():
    with pytest.raises(ValueError):
        calibrate_censoring(CLAYTON_04, (UNIT_EXPONENTIAL,) * 2, 0.0, "double")
    with pytest.raises(ValueError):
        calibrate_censoring(CLAYTON_04, (UNIT_EXPONENTIAL,) * 2, 0.2, "complete")
    # limits at the latent medians already censor about 3/4 of the pairs
    with pytest.raises(ValueError, match="unattainable"):
        calibrate_censoring(CLAYTON_04, (UNIT_EXPONENTIAL,) * 2, 0.2, "double", limits=(math.log(2), math.log(2)))


def test_lognormal_calibration():
    margins = (MarginalModel.lognormal(8, 1), MarginalModel.lognormal(7, 3))
    c1, c2 = calibrate_censoring(CLAYTON_04, margins, 0.3, "double", censor_kind="lognormal")
    s = simulate_censored(SimulationConfig(CLAYTON_04, 50_000, *margins, c1, c2, seed=8))
    assert s.censored_fraction == pytest.approx(0.3, abs=0.01)


def test_small_limit_censors_nearly_everything():
    heavy = MarginalModel.lognormal(2.0, 2.0)
    s = simulate_censored(SimulationConfig(independence(), 1000, heavy, heavy, limit1=0.01, seed=2))
    assert np.mean(s.delta1 == 0) > 0.99
    assert np.all(s.y1 <= 0.01)
    assert np.allclose(s.y1[s.delta1 == 0], 0.01)


def test_shared_censor_equal_censoring_times():
    c1, c2 = calibrate_censoring(CLAYTON_04, (UNIT_EXPONENTIAL,) * 2, 0.3, "double", shared=True)
    s, t = simulate_censored(
        SimulationConfig(CLAYTON_04, 5000, censor1=c1, censor2=c2, shared_censor=True, seed=5), return_latent=True
    )
    both = (s.delta1 == 0) & (s.delta2 == 0)
    np.testing.assert_array_equal(s.y1[both], s.y2[both])
    assert s.censored_fraction == pytest.approx(0.3, abs=0.02)


def test_simulation_is_deterministic_and_streams_differ():
    cfg = SimulationConfig(CLAYTON_04, 50, censor1=UNIT_EXPONENTIAL, censor2=UNIT_EXPONENTIAL, seed=7)
    assert simulate_censored(cfg, 3) == simulate_censored(cfg, 3)
    assert simulate_censored(cfg, 3) != simulate_censored(cfg, 4)
    assert simulate_censored(cfg, (1, 2)) != simulate_censored(cfg, (2, 1))
    a = stream(5, 1, 2).random(3)
    assert np.array_equal(a, stream(5, 1, 2).random(3))


def test_ties_between_event_and_censor_count_as_observed():
    # a limit exactly at a latent value: T <= omega is observed
    cfg = SimulationConfig(independence(), 5, seed=0)
    _, t = simulate_censored(cfg, return_latent=True)
    cfg = SimulationConfig(independence(), 5, seed=0, limit1=float(t[0, 0]))
    s = simulate_censored(cfg)
    assert s.delta1[0] == 1


# ---- Sample ----------------------------------------------------------------------------


def test_sample_validation():
    with pytest.raises(DataError, match="no observations"):
        Sample([], [], [], [])
    with pytest.raises(DataError):
        Sample([1.0, -1.0], [1.0, 1.0], [1, 1], [1, 1])
    with pytest.raises(DataError):
        Sample([1.0], [1.0, 2.0], [1], [1, 1])
    with pytest.raises(DataError):
        Sample([1.0], [1.0], [2], [1])
    s = Sample.complete([1.0, 2.0], [3.0, 4.0])
    with pytest.raises(ValueError):
        s.y1[0] = 5.0


def test_scenario_inference():
    assert Sample.complete([1.0], [2.0]).scenario is Scenario.COMPLETE
    assert Sample([1, 2], [1, 2], [0, 1], [1, 1]).scenario is Scenario.SINGLE1
    assert Sample([1, 2], [1, 2], [1, 1], [1, 0]).scenario is Scenario.SINGLE2
    assert Sample([1, 2], [1, 2], [0, 1], [1, 0]).scenario is Scenario.DOUBLE


# ---- CSV -------------------------------------------------------------------------------


def test_load_three_rows(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("y1,y2,delta1,delta2,note\n1.5,2,1,1,a\n0.3,4.25,0,1,b\n2,0.1,1,0,c\n")
    s = load_csv(p)
    assert s.n == 3
    assert s.scenario is Scenario.DOUBLE
    assert list(s)[1] == (0.3, 4.25, 0, 1)


def test_all_observed_file_is_complete(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("delta2,y2,y1,delta1\n1,2,1,1\n1,3,2,1\n")
    s = load_csv(p)
    assert s.scenario is Scenario.COMPLETE
    np.testing.assert_array_equal(s.y1, [1, 2])


@pytest.mark.parametrize(
    "body,line,message",
    [
        ("y1,y2,delta1,delta2\n1,2,2,1\n", 2, "delta1"),
        ("y1,y2,delta1,delta2\n1,2,1,1\n1,x,1,1\n", 3, "numbers"),
        ("y1,y2,delta1,delta2\n1,2,1\n", 2, "fields"),
        ("y1,y2,delta1,delta2\n1,-2,1,1\n", 2, "negative"),
        ("y1,y2,delta1,delta2\n1,nan,1,1\n", 2, "finite"),
        ("y1,y2,delta1\n1,2,1\n", 1, "delta2"),
    ],
)
def test_malformed_rows_report_line(tmp_path, body, line, message):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(DataError, match=message) as info:
        load_csv(p)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


@pytest.mark.parametrize("body", ["", "y1,y2,delta1,delta2\n", "y1,y2,delta1,delta2\n\n\n"])
def test_empty_files(tmp_path, body):
    p = tmp_path / "empty.csv"
    p.write_text(body)
    with pytest.raises(DataError, match="no observations"):
        load_csv(p)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(0, 1e6, allow_nan=False),
            st.floats(0, 1e6, allow_nan=False),
            st.integers(0, 1),
            st.integers(0, 1),
        ),
        min_size=1,
        max_size=30,
    )
)
def test_csv_round_trip(tmp_path_factory, rows):
    p = tmp_path_factory.mktemp("rt") / "s.csv"
    s = Sample.from_observations(rows)
    save_csv(s, p)
    assert load_csv(p) == s


# ---- margins and scenario files ---------------------------------------------------------


def test_marginal_model_parse_and_inverse():
    m = MarginalModel.parse("lognormal(8, 1)")
    assert m.median() == pytest.approx(math.exp(8))
    q = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(m.cdf(m.ppf(q)), q)
    e = MarginalModel.parse("exponential(2)")
    assert e.sf(1.0) == pytest.approx(math.exp(-2))
    with pytest.raises(ValueError):
        MarginalModel.parse("weibull(1,2)")


def test_scenario_file(tmp_path):
    p = tmp_path / "s.ini"
    p.write_text(
        "# comment\nfamily = joe\ntau = 0.4\nn = 400\nscenario = double\n"
        "censored_fraction = 0.25\nlimit1 = q0.9\nseed = 12\n"
    )
    spec = load_scenario(p)
    assert spec.family.value == "joe" and spec.seed == 12
    cfg = spec.build()
    assert cfg.limit1 == pytest.approx(UNIT_EXPONENTIAL.ppf(0.9))
    assert cfg.limit2 == math.inf
    s = simulate_censored(SimulationConfig(cfg.copula, 40_000, censor1=cfg.censor1, censor2=cfg.censor2, limit1=cfg.limit1))
    assert s.censored_fraction == pytest.approx(0.25, abs=0.01)


@pytest.mark.parametrize(
    "text",
    ["tau = 0.3\nn = 10\n", "family = clayton\nn = 10\nbogus = 1\n", "family = clayton\nn = 10\nscenario = weird\n"],
)
def test_bad_scenario_files(text):
    with pytest.raises(DataError):
        load_scenario(text)
