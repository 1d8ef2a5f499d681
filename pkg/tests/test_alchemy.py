import numpy as np
import pytest

from fullrand import (GroupedSample, SimSpec, SparseRatings, alchemy_estimate,
                      estimate_one_way_fr, gen_crossed, gen_one_way, make_chunks,
                      make_stream_chunks)
from fullrand.alchemy import average_chunks, chunk_data
from fullrand.errors import ChunkEstimationFailed, InsufficientChunks, TooManyChunks
from fullrand.results import OneWayEstimate


def _groups(r):
    return GroupedSample(np.arange(2.0 * r), [2] * r)


@pytest.mark.parametrize("r,g,sizes", [(5, 2, [3, 2]), (4, 4, [1, 1, 1, 1]), (7, 3, [3, 2, 2])])
def test_chunk_sizes(r, g, sizes):
    plan = make_chunks(_groups(r), g)
    assert plan.sizes == sizes
    # contiguous in input order
    np.testing.assert_array_equal(plan.assignment, np.repeat(np.arange(g), sizes))


def test_too_many_chunks():
    with pytest.raises(TooManyChunks):
        make_chunks(_groups(3), 4)
    with pytest.raises(TooManyChunks):
        make_stream_chunks(SparseRatings(2, 2, [0, 1], [0, 1], [1.0, 2.0]), 3)


def test_shuffled_plan_is_seeded_and_balanced():
    a = make_chunks(_groups(11), 3, shuffle_seed=5)
    b = make_chunks(_groups(11), 3, shuffle_seed=5)
    np.testing.assert_array_equal(a.assignment, b.assignment)
    assert sorted(a.sizes) == [3, 4, 4]
    assert a.describe()["shuffled"]


def test_stream_chunks_follow_arrival_order():
    data = SparseRatings(10, 10, np.arange(10), np.arange(10), np.arange(10.0))
    plan = make_stream_chunks(data, 2)
    assert plan.sizes == [5, 5]
    np.testing.assert_array_equal(chunk_data(data, plan, 0).values, np.arange(5.0))
    assert chunk_data(data, make_stream_chunks(data, 1), 0) is data


def test_shuffled_arrival_changes_membership():
    rows, cols, vals = [0, 0, 1, 1], [0, 1, 0, 1], [1.0, 2.0, 3.0, 4.0]
    sorted_ = SparseRatings(2, 2, rows, cols, vals)
    shuffled = SparseRatings(2, 2, rows, cols, vals, arrival_order=[3, 1, 0, 2])
    a = chunk_data(sorted_, make_stream_chunks(sorted_, 2), 0)
    b = chunk_data(shuffled, make_stream_chunks(shuffled, 2), 0)
    # worked by hand: sorted takes entries 0,1 = (1,1),(1,2); shuffled takes 3,1 = (2,2),(1,2)
    assert sorted(a.values.tolist()) == [1.0, 2.0]
    assert sorted(b.values.tolist()) == [2.0, 4.0]


def test_average_of_two_chunks():
    np.testing.assert_array_equal(average_chunks([[1.0, 2.0], [3.0, 4.0]]), [2.0, 3.0])


def test_single_chunk_is_identity():
    data = gen_one_way(SimSpec.one_way(r=300, seed=1))
    res = alchemy_estimate(data, make_chunks(data, 1))
    np.testing.assert_array_equal(res.theta_bar, estimate_one_way_fr(data).as_vector())
    assert res.std_errors is None and res.emp_cov is None
    with pytest.raises(InsufficientChunks):
        alchemy_estimate(data, make_chunks(data, 1), require_se=True)


def test_averaging_identity_and_se_formula():
    data = gen_one_way(SimSpec.one_way(r=800, seed=2))
    res = alchemy_estimate(data, make_chunks(data, 8))
    np.testing.assert_array_equal(res.theta_bar, average_chunks(res.per_chunk))
    np.testing.assert_allclose(res.emp_cov, np.cov(res.per_chunk, rowvar=False))
    np.testing.assert_allclose(res.std_errors, np.sqrt(np.diag(res.emp_cov) / 8))
    assert res.param_names == OneWayEstimate.param_names
    for k in range(8):
        est = estimate_one_way_fr(chunk_data(data, make_chunks(data, 8), k))
        np.testing.assert_array_equal(res.per_chunk[k], est.as_vector())


def test_parallel_matches_serial_bitwise():
    data = gen_one_way(SimSpec.one_way(r=800, seed=3))
    plan = make_chunks(data, 4)
    a = alchemy_estimate(data, plan, workers=1)
    b = alchemy_estimate(data, plan, workers=3)
    for f in ("per_chunk", "theta_bar", "emp_cov", "std_errors"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
    assert a.clamp_counts == b.clamp_counts


def test_crossed_stream_alchemy():
    data = gen_crossed(SimSpec.crossed(r=300, c=300, density=0.1, seed=2))
    res = alchemy_estimate(data, make_stream_chunks(data, 3), base="crossed")
    assert res.per_chunk.shape == (3, 4)
    assert res.param_names[0] == "mu"


def test_failed_chunk_is_named():
    # the second chunk holds only singleton groups
    data = GroupedSample.from_groups([[1.0, 2.0], [3.0, 5.0], [1.0], [2.0]])
    with pytest.raises(ChunkEstimationFailed) as info:
        alchemy_estimate(data, make_chunks(data, 2))
    assert info.value.chunk == 1


def test_clamp_flags_are_counted():
    data = GroupedSample.from_groups([[0.0, 0.0], [2.0, 2.0]] * 3)
    res = alchemy_estimate(data, make_chunks(data, 3))
    assert res.clamp_counts == {"sigma_a2": 0, "sigma_e2": 3}


def test_chunk_average_close_to_full_estimate():
    data = gen_one_way(SimSpec.one_way(r=4000, seed=6))
    res = alchemy_estimate(data, make_chunks(data, 8))
    full = estimate_one_way_fr(data).as_vector()
    assert np.all(np.abs(res.theta_bar - full)[:3] < 2 * res.std_errors[:3])
