import json

import numpy as np
import pytest

from fullrand import SimSpec, gen_crossed, gen_famsize, gen_one_way, gen_regression
from fullrand.errors import BadSpec, DegenerateDraw
from fullrand.simgen import Stream, generate
from fullrand.simgen.dists import Dist, effect, parse_count, parse_regressor


def test_same_seed_same_data():
    a = gen_one_way(SimSpec.one_way(r=200, seed=9))
    b = gen_one_way(SimSpec.one_way(r=200, seed=9))
    c = gen_one_way(SimSpec.one_way(r=200, seed=10))
    assert a == b and a != c


def test_zero_variances_give_constant_responses():
    s = gen_one_way(SimSpec.one_way(sigma_a2=0.0, sigma_e2=0.0, r=50))
    assert np.all(s.values == 10.0)
    d = gen_crossed(SimSpec.crossed(sigma_a2=0, sigma_b2=0, sigma_e2=0, r=30, c=30, density=0.2))
    assert np.all(d.values == 3.0)


def test_one_way_moments():
    s = gen_one_way(SimSpec.one_way(seed=4))
    se = np.sqrt((4.0 * np.mean(s.counts ** 2.0) + 5.0) / s.M ** 2 * s.r)
    assert abs(s.values.mean() - 10.0) < 3 * se
    gi = s.group_index
    means = np.bincount(gi, s.values) / s.counts
    within = np.sum((s.values - means[gi]) ** 2) / (s.M - s.r)
    assert within == pytest.approx(1.0, rel=0.10)


def test_famsize_reduces_to_one_way():
    fam = gen_famsize(SimSpec.famsize(c1=10.0, c2=0.0, sigma_a2=4.0, r=300, count="poisson:4", seed=2))
    one = gen_one_way(SimSpec.one_way(r=300, seed=2))
    np.testing.assert_array_equal(fam.values, one.values)
    np.testing.assert_array_equal(fam.counts, one.counts)


def test_famsize_noiseless_means_and_slope():
    s = gen_famsize(SimSpec.famsize(sigma_a2=0.0, sigma_e2=0.0, r=100))
    means = np.bincount(s.group_index, s.values) / s.counts
    np.testing.assert_allclose(means, 1.0 - 0.1 * s.counts, atol=1e-14)
    s = gen_famsize(SimSpec.famsize(seed=5))
    means = np.bincount(s.group_index, s.values) / s.counts
    X = np.column_stack([np.ones(s.r), s.counts])
    coef, res, *_ = np.linalg.lstsq(X, means, rcond=None)
    sigma2 = res[0] / (s.r - 2)
    se = np.sqrt(sigma2 * np.linalg.inv(X.T @ X)[1, 1])
    assert abs(coef[1] + 0.1) < 3 * se


def test_regression_generation():
    spec = SimSpec.regression(r=3000, seed=1)
    a, b = gen_regression(spec), gen_regression(spec)
    assert a == b and a.p == 2
    np.testing.assert_array_equal(a.regressors[:, 0], 1.0)
    # Var(Y) = Var(X'gamma) + sa2 + se2 = 1.5^2 + 2 + 1
    assert np.var(a.values, ddof=1) == pytest.approx(5.25, rel=0.08)
    quiet = gen_regression(SimSpec.regression(sigma_a2=0.0, sigma_e2=0.0, r=40))
    fitted = np.repeat(quiet.regressors @ np.array([5.0, 1.5]), quiet.counts)
    np.testing.assert_array_equal(quiet.values, fitted)


@pytest.mark.parametrize("make", [
    lambda: SimSpec.one_way(r=500, seed=3, alpha="gamma", eps="uniform"),
    lambda: SimSpec.famsize(r=500, seed=3),
    lambda: SimSpec.regression(r=500, seed=3),
    lambda: SimSpec.crossed(r=120, c=90, density=0.1, seed=3),
    lambda: SimSpec.crossed(r=120, c=90, density=0.1, seed=3, mode="draws"),
])
def test_blockwise_generation_matches_serial(make):
    spec = make()
    a = generate(spec)
    b = generate(spec, blocks=7, workers=3)
    assert a == b


def test_stream_slices_are_consistent():
    s = Stream(123, "alpha")
    full = s.raw(0, 40)
    for start, n in [(0, 1), (3, 5), (4, 4), (17, 23)]:
        np.testing.assert_array_equal(s.raw(start, n), full[start:start + n])
    u = s.uniforms(0, 10_000)
    assert 0 < u.min() and u.max() < 1
    assert not np.array_equal(Stream(123, "eps").raw(0, 8), full[:8])


def test_variance_mismatch_is_rejected():
    spec = SimSpec.one_way(r=10)
    with pytest.raises(BadSpec):
        SimSpec(spec.model, {**spec.true_params, "sigma_a2": 5.0}, spec.r,
                count_dist=spec.count_dist, alpha=spec.alpha, eps=spec.eps)
    with pytest.raises(BadSpec):
        SimSpec.crossed(density=0.0)
    with pytest.raises(BadSpec):
        Dist("uniform_int", {"low": 0, "high": 3}, "count")


@pytest.mark.parametrize("family", ["normal", "gamma", "uniform"])
@pytest.mark.parametrize("var", [0.0, 0.5, 4.0])
def test_effect_closed_forms(family, var):
    d = effect(family, var, shape=3.0)
    assert d.mean == 0.0
    assert d.variance == pytest.approx(var, rel=1e-12, abs=0)
    u = (np.arange(200_000) + 0.5) / 200_000
    x = d.ppf(u)
    assert abs(x.mean()) < 1e-3 * (1 + var)
    assert x.var() == pytest.approx(var, rel=2e-2, abs=1e-12)


def test_count_parsers():
    assert parse_count("poisson:4").mean == 5.0
    d = parse_count("uniform:2:10")
    assert (d.mean, d.variance) == (6.0, 80 / 12)
    assert parse_count("const:3").variance == 0.0
    assert parse_regressor("1").family == "constant"
    with pytest.raises(BadSpec):
        parse_count("binomial:3")


def test_dense_crossed_grid():
    d = gen_crossed(SimSpec.crossed(r=20, c=15, density=1.0))
    assert np.all(d.row_counts == 15) and d.n_entries == 300


def test_crossed_entry_count_and_variance():
    d = gen_crossed(SimSpec.crossed(seed=7))
    n, p = 500 * 500, 0.05
    assert abs(d.n_entries - n * p) < 4 * np.sqrt(n * p * (1 - p))
    assert np.var(d.values, ddof=1) == pytest.approx(2.5, rel=0.10)
    assert sorted(d.arrival.tolist()) == list(range(d.n_entries))


def test_draws_mode_collapses_duplicates():
    d = gen_crossed(SimSpec.crossed(r=10, c=10, density=0.8, mode="draws", seed=1))
    assert d.collapsed_duplicates > 0
    assert d.n_entries + d.collapsed_duplicates == 80


def test_degenerate_draw():
    spec = SimSpec.crossed(r=1, c=1, density=1e-9, seed=0)
    strict = SimSpec.from_dict({**spec.to_dict(), "resample_degenerate": False})
    with pytest.raises(DegenerateDraw):
        gen_crossed(strict)


def test_crossed_features_shift_means():
    spec = SimSpec.crossed(r=50, c=40, density=0.5, row_x=("normal:0:1",), row_gamma=(2.0,))
    d = gen_crossed(spec)
    assert d.row_features.shape == (50, 1)
    base = gen_crossed(SimSpec.crossed(r=50, c=40, density=0.5))
    shift = d.values - base.values
    np.testing.assert_allclose(shift, 2.0 * d.row_features[d.rows, 0])


@pytest.mark.parametrize("make", [
    lambda: SimSpec.one_way(alpha="gamma", gamma_shape=3.0),
    lambda: SimSpec.famsize(count="uniform:1:6"),
    lambda: SimSpec.regression(),
    lambda: SimSpec.crossed(mode="draws", row_x=("uniform:0:1",), row_gamma=(1.0,)),
])
def test_spec_json_round_trip(make):
    spec = make()
    back = SimSpec.loads(spec.dumps())
    assert back == spec
    assert json.loads(back.dumps()) == json.loads(spec.dumps())


def test_unknown_spec_field():
    d = SimSpec.one_way().to_dict()
    d["colour"] = "blue"
    with pytest.raises(BadSpec):
        SimSpec.from_dict(d)
