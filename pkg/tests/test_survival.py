import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archicens.copulas import alpha_from_tau, independence
from archicens.data import UNIT_EXPONENTIAL, Sample, SimulationConfig, calibrate_censoring, simulate_censored
from archicens.survival import (
    EstimatorWarning,
    KernelSpec,
    akritas_joint,
    avk_joint_single,
    beran_conditional,
    default_bandwidth,
    ecdf_bivariate,
    kaplan_meier,
)

TINY = KernelSpec(bandwidth=1e-9)
WIDE_UNIFORM = KernelSpec("uniform", bandwidth=1e9)


def naive_km(y, d):
    """Textbook product-limit survival over sorted distinct event times."""
    surv, out = 1.0, {}
    for t in np.unique(y[d == 1]):
        at_risk = np.sum(y >= t)
        deaths = np.sum((y == t) & (d == 1))
        surv *= 1 - deaths / at_risk
        out[t] = 1 - surv
    return out


def naive_beran(yt, dt, yc, dc, y, x, kern, h):
    """Term-by-term conditional product-limit estimate (continuous data, no ties)."""
    w = kern((x - yc) / h) * dc
    order = np.argsort(yt)
    surv = 1.0
    for i in order:
        if yt[i] > y:
            break
        if dt[i] == 1:
            risk = w[yt >= yt[i]].sum()
            if risk > 0:
                surv *= 1 - w[i] / risk
    return 1 - surv


def censored_sample(cop, n, target, seed, scenario="double"):
    c1, c2 = calibrate_censoring(cop, (UNIT_EXPONENTIAL, UNIT_EXPONENTIAL), target, scenario)
    return simulate_censored(SimulationConfig(cop, n, censor1=c1, censor2=c2, seed=seed))


# ---- Kaplan-Meier ---------------------------------------------------------------------


def test_km_complete_is_ecdf_steps():
    s = Sample.complete([1.0, 2.0, 3.0], [1.0, 1.0, 1.0])
    km = kaplan_meier(s, 1)
    np.testing.assert_array_equal(km.values, [1 / 3, 2 / 3, 1.0])


def test_km_hand_example():
    s = Sample([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], [1, 0, 1], [1, 1, 1])
    km = kaplan_meier(s, 1)
    assert km(1.0) == pytest.approx(1 / 3)
    assert km(2.5) == pytest.approx(1 / 3)
    assert km(3.0) == pytest.approx(1.0)
    resc = kaplan_meier(s, 1, rescale=True)
    np.testing.assert_allclose(resc.values, km.values * 3 / 4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 15), st.integers(0, 1)), min_size=1, max_size=40))
def test_km_matches_naive_product_limit(rows):
    y = np.array([r[0] for r in rows], float)
    d = np.array([r[1] for r in rows])
    s = Sample(y, y, d, np.ones(len(y)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EstimatorWarning)
        km = kaplan_meier(s, 1)
    ref = naive_km(y, d)
    assert list(km.jump_points) == list(ref)
    np.testing.assert_allclose(km.values, list(ref.values()), atol=1e-12)
    assert np.all(np.diff(km.values) >= -1e-15)


def test_km_bit_identical_to_ecdf_on_complete_data():
    rng = np.random.default_rng(0)
    for n in (7, 100, 1000):
        y = np.round(rng.exponential(size=n), 1)  # plenty of ties
        km = kaplan_meier(Sample.complete(y, y), 1)
        expected = np.searchsorted(np.sort(y), km.jump_points, side="right") / n
        assert np.array_equal(km.values, expected)


def test_km_fully_censored_margin_warns():
    s = Sample([1.0, 2.0], [1.0, 2.0], [0, 0], [1, 1])
    with pytest.warns(EstimatorWarning):
        km = kaplan_meier(s, 1)
    assert km.degenerate and km(5.0) == 0.0


def test_km_last_value_censored_stays_below_one():
    s = Sample([1.0, 2.0, 3.0], [1.0] * 3, [1, 1, 0], [1] * 3)
    assert kaplan_meier(s, 1).total == pytest.approx(2 / 3)


# ---- Beran --------------------------------------------------------------------------


def test_beran_wide_uniform_kernel_reduces_to_marginal():
    rng = np.random.default_rng(1)
    s = Sample.complete(rng.exponential(size=50), rng.exponential(size=50))
    km = kaplan_meier(s, 1)
    for y in np.quantile(s.y1, [0.1, 0.5, 0.9]):
        assert beran_conditional(s, 1, y, s.y2[3], WIDE_UNIFORM) == pytest.approx(km(y), abs=1e-12)


def test_beran_tiny_bandwidth_is_indicator_of_matched_pair():
    rng = np.random.default_rng(2)
    s = Sample.complete(rng.exponential(size=30), rng.exponential(size=30))
    k = 7
    for y in np.sort(s.y1)[::5]:
        assert beran_conditional(s, 1, y, s.y2[k], TINY) == float(s.y1[k] <= y)


@pytest.mark.parametrize("shape", ["epanechnikov", "gaussian", "uniform"])
def test_beran_matches_term_by_term_oracle(shape):
    cop = alpha_from_tau("clayton", 0.4)
    s = censored_sample(cop, 150, 0.3, 4, "single")
    kern = KernelSpec(shape)
    h = kern.resolve(s.y2)
    for x in s.y2[:5]:
        for y in np.quantile(s.y1, [0.2, 0.5, 0.8]):
            got = beran_conditional(s, 1, y, x, kern)
            ref = naive_beran(s.y1, s.delta1, s.y2, s.delta2, y, x, kern, h)
            assert got == pytest.approx(ref, abs=1e-12)


def test_beran_rejects_unobserved_conditioning_point():
    s = Sample([1.0, 2.0], [1.0, 2.0], [1, 1], [1, 0])
    with pytest.raises(ValueError):
        beran_conditional(s, 1, 1.0, 2.0)
    with pytest.raises(ValueError):
        beran_conditional(s, 1, 1.0, 1.5)


def test_default_bandwidth_rule():
    v = np.random.default_rng(3).normal(size=500)
    q75, q25 = np.percentile(v, [75, 25])
    sigma = min(np.std(v, ddof=1), (q75 - q25) / 1.349)
    assert default_bandwidth(v) == pytest.approx(sigma * 500 ** -0.2)
    assert default_bandwidth(v, 2.0) == pytest.approx(2 * sigma * 500 ** -0.2)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(bandwidth=0.0)
    with pytest.raises(ValueError):
        KernelSpec("triangle")


# ---- joint estimators ---------------------------------------------------------------


def test_ecdf_examples():
    e = ecdf_bivariate(Sample.complete([1.0, 2.0], [1.0, 2.0]))
    assert e.cdf(1.5, 1.5) == 0.5
    assert e.cdf(2.0, 2.0) == 1.0
    assert e.cdf(0.5, 3.0) == 0.0
    with pytest.raises(ValueError):
        ecdf_bivariate(Sample([1.0], [1.0], [0], [1]))


@pytest.mark.parametrize("n", [20, 500])
def test_akritas_tiny_bandwidth_is_ecdf(n):
    u = alpha_from_tau("gumbel", 0.4).sample(n, np.random.default_rng(n))
    s = Sample.complete(-np.log1p(-u[:, 0]), -np.log1p(-u[:, 1]))
    e = ecdf_bivariate(s)
    for w in (0.0, 0.5, 1.0):
        assert akritas_joint(s, TINY, w).sup_distance(e) <= 1e-12
    assert avk_joint_single(s, TINY).sup_distance(e) <= 1e-12


def test_akritas_infinite_bandwidth_is_product_of_marginals():
    rng = np.random.default_rng(5)
    u = alpha_from_tau("clayton", 0.5).sample(200, rng)
    s = Sample.complete(u[:, 0], u[:, 1])
    j = akritas_joint(s, WIDE_UNIFORM, 0.5)
    F1, F2 = kaplan_meier(s, 1), kaplan_meier(s, 2)
    X, Y = np.meshgrid(j.x, j.y, indexing="ij")
    np.testing.assert_allclose(j.F, F1(X) * F2(Y), atol=1e-12)


def test_akritas_default_bandwidth_close_to_ecdf():
    u = alpha_from_tau("clayton", 0.4).sample(500, np.random.default_rng(6))
    s = Sample.complete(-np.log1p(-u[:, 0]), -np.log1p(-u[:, 1]))
    assert akritas_joint(s).sup_distance(ecdf_bivariate(s)) <= 0.05


def test_branch_weights_select_branches():
    s = censored_sample(alpha_from_tau("frank", 0.4), 200, 0.3, 7)
    j0, j1, jh = akritas_joint(s, w=0.0), akritas_joint(s, w=1.0), akritas_joint(s, w=0.5)
    np.testing.assert_allclose(jh.mass, 0.5 * (j0.mass + j1.mass), atol=1e-15)
    for j in (j0, j1):
        assert np.all(j.mass >= 0)
        assert j.total_mass <= 1 + 1e-12
        assert np.all(np.diff(j.F, axis=0) >= -1e-15) and np.all(np.diff(j.F, axis=1) >= -1e-15)
    assert not np.allclose(j0.mass, j1.mass)


def test_akritas_independence_at_medians():
    s = censored_sample(independence(), 2000, 0.2, 8)
    j = akritas_joint(s)
    m = np.log(2.0)
    assert j.cdf(m, m) == pytest.approx(0.25, abs=0.03)


def test_avk_agrees_with_akritas_under_single_censoring():
    s = censored_sample(alpha_from_tau("clayton", 0.4), 1000, 0.2, 9, "single")
    assert avk_joint_single(s).sup_distance(akritas_joint(s)) <= 0.05


def test_avk_single_observation_and_mirror():
    j = avk_joint_single(Sample.complete([2.0], [3.0]))
    assert j.total_mass == pytest.approx(1.0) and j.cdf(2.0, 3.0) == pytest.approx(1.0)
    s = censored_sample(alpha_from_tau("joe", 0.4), 300, 0.2, 10, "single")
    a = avk_joint_single(s)
    b = avk_joint_single(s.swapped())
    np.testing.assert_allclose(a.mass, b.mass.T, atol=1e-14)
    with pytest.raises(ValueError):
        avk_joint_single(censored_sample(independence(), 100, 0.3, 1))


def test_callable_weight_is_repaired_to_a_distribution():
    s = censored_sample(alpha_from_tau("gumbel", 0.4), 200, 0.3, 11)
    j = akritas_joint(s, w=lambda a, b: (a > b).astype(float))
    assert "monotone-repair" in j.flags
    assert np.all(j.mass >= 0)
    assert np.all(np.diff(j.F, axis=0) >= -1e-14)


def test_fully_censored_margin_falls_back_to_one_branch():
    s = Sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [0, 0, 0], [1, 1, 1])
    with pytest.warns(EstimatorWarning):
        j = akritas_joint(s)
    assert any(f.startswith("single-branch") for f in j.flags)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(1, 8), st.integers(1, 8), st.integers(0, 1), st.integers(0, 1)),
        min_size=2,
        max_size=25,
    ),
    st.floats(0.0, 1.0),
    st.sampled_from(["epanechnikov", "gaussian", "uniform"]),
)
def test_joint_masses_nonnegative_and_bounded(rows, w, shape):
    s = Sample.from_observations(rows)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EstimatorWarning)
        j = akritas_joint(s, KernelSpec(shape), w)
    assert np.all(j.mass >= -1e-15)
    assert j.total_mass <= 1 + 1e-12
