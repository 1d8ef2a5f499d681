import warnings

import numpy as np
import pytest

from fullrand import GroupedSample, SolverOptions, estimate_famsize
from fullrand.errors import InsufficientData, NotConvergedWarning, Unidentifiable
from fullrand.estimators import famsize_step
from fullrand.simgen import SimSpec, gen_famsize


def test_constant_counts_unidentifiable():
    s = GroupedSample.from_groups([[1.0, 2.0, 3.0]] * 5)
    with pytest.raises(Unidentifiable):
        estimate_famsize(s)


def test_needs_three_groups():
    with pytest.raises(InsufficientData):
        estimate_famsize(GroupedSample.from_groups([[1.0], [1.0, 2.0]]))


def test_noiseless_fixed_point():
    counts = [1, 2, 3, 4, 5, 2, 7, 3]
    groups = [[1 - 0.1 * n] * n for n in counts]
    est = estimate_famsize(GroupedSample.from_groups(groups))
    assert est.converged and est.iterations <= 2
    assert est.c1 == pytest.approx(1.0, abs=1e-12)
    assert est.c2 == pytest.approx(-0.1, abs=1e-12)
    assert est.sigma_a2 == pytest.approx(0.0, abs=1e-12)
    assert est.sigma_e2 == pytest.approx(0.0, abs=1e-12)
    assert est.residual_norm < 1e-8


def test_simulated_recovery():
    est = estimate_famsize(gen_famsize(SimSpec.famsize(seed=0)))
    assert est.converged
    truth = {"c1": 1.0, "c2": -0.1, "sigma_a2": 1.0, "sigma_e2": 1.0}
    # one replicate at r=2000; c2 is the noisiest component
    for k, v in truth.items():
        assert abs(getattr(est, k) - v) / abs(v) < 0.20, k


def test_converged_solution_is_fixed_point():
    s = gen_famsize(SimSpec.famsize(r=800, seed=3))
    opts = SolverOptions(tol=1e-10)
    est = estimate_famsize(s, opts)
    assert est.converged
    c, x, raw, _ = famsize_step(s, np.array([est.c1, est.c2]))
    move = np.max(np.abs(np.concatenate([c, raw]) - np.array([est.c1, est.c2, *est.raw])))
    assert move < opts.tol


def test_reports_higher_count_moments():
    s = GroupedSample.from_groups([[0.0], [1.0, 2.0], [2.0, 2.0, 5.0], [1.0] * 4])
    est = estimate_famsize(s)
    n = np.array([1, 2, 3, 4], float)
    d = n - n.mean()
    np.testing.assert_allclose(est.n_moments,
                               [n.mean(), n.var(ddof=1), np.mean(d ** 3), np.mean(d ** 4)])


def test_not_converged_returns_last_iterate():
    s = gen_famsize(SimSpec.famsize(r=300, seed=1))
    with pytest.warns(NotConvergedWarning):
        est = estimate_famsize(s, SolverOptions(max_iter=1))
    assert not est.converged and est.iterations == 1
    assert np.isfinite(est.c1)


def test_solver_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(tol=0)
    with pytest.raises(ValueError):
        SolverOptions(max_iter=0)


def test_custom_init_converges_to_same_answer():
    s = gen_famsize(SimSpec.famsize(r=1000, seed=4))
    a = estimate_famsize(s)
    b = estimate_famsize(s, SolverOptions(init=(5.0, 2.0)))
    np.testing.assert_allclose(a.as_vector(), b.as_vector(), atol=1e-10)
