import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from depcost.errors import ShapeError, TrainingError
from depcost.models import (FnnConfig, GridSearchPlan, fit_family, fnn_fit, forest_fit, grid_search,
                            load_model, param_count, predict, save_model, svr_fit)
from depcost.models.fnn import HIDDEN, init_params
from depcost.models.search import expand_grid
from depcost.models.svr import rbf_kernel, svr_objectives
from helpers import fnn_gradient_error, held_out_rmse, linear_task, svr_toy


# ---------------------------------------------------------------- SVR

def test_rbf_kernel_definition(rng):
    A, B = rng.normal(size=(4, 3)), rng.normal(size=(5, 3))
    ref = np.array([[np.exp(-0.7 * np.sum((a - b) ** 2)) for b in B] for a in A])
    assert np.allclose(rbf_kernel(A, B, 0.7), ref, atol=1e-14)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_svr_dual_feasible_and_small_gap(seed):
    X, y = svr_toy(seed)
    m = svr_fit(X, y, C=1.0, gamma=0.5, epsilon=0.1)
    assert m.converged
    assert np.all(np.abs(m.dual_coef) <= m.C + 1e-9)
    primal, dual = svr_objectives(m, X, y)
    assert primal >= dual - 1e-9
    assert primal - dual < 1e-2


def test_svr_matches_reference_solver(rng):
    sklearn_svm = pytest.importorskip("sklearn.svm")
    X, y = svr_toy(4, n=60)
    Xt = rng.normal(size=(30, 3))
    for C, g in ((1.0, 0.5), (10.0, 0.1)):
        ours = svr_fit(X, y, C, g, 0.1).decision(Xt)
        ref = sklearn_svm.SVR(C=C, gamma=g, epsilon=0.1, tol=1e-3).fit(X, y).predict(Xt)
        assert np.max(np.abs(ours - ref)) < 5e-3


def test_svr_constant_target(rng):
    X = rng.normal(size=(25, 4))
    m = svr_fit(X, np.ones(25), C=1.0, gamma=0.1, epsilon=0.1)
    assert np.all(np.abs(m.decision(rng.normal(size=(10, 4))) - 1.0) <= 0.1 + 1e-9)


def test_svr_interpolates_identity(rng):
    X = rng.uniform(-2, 2, size=(30, 1))
    y = X[:, 0].copy()
    m = svr_fit(X, y, C=1000.0, gamma=1.0, epsilon=0.01)
    assert held_out_rmse(m.decision(X), y) < 0.1
    free = np.abs(m.dual_coef) < m.C - 1e-9
    fit = m.decision(m.support_vectors[free])
    target = y[m.support_index[free]]
    assert np.all(np.abs(fit - target) <= m.epsilon + 1e-3)


def test_svr_row_order_independent(rng):
    X, y = svr_toy(5, n=40)
    perm = rng.permutation(40)
    Xt = rng.normal(size=(10, 3))
    a = svr_fit(X, y, 10.0, 0.3, 0.1).decision(Xt)
    b = svr_fit(X[perm], y[perm], 10.0, 0.3, 0.1).decision(Xt)
    assert np.max(np.abs(a - b)) < 1e-2


def test_svr_input_validation():
    with pytest.raises(ValueError):
        svr_fit(np.ones((3, 2)), np.ones(3), C=0.0)
    with pytest.raises(ShapeError):
        svr_fit(np.ones((3, 2)), np.ones(4))


# ---------------------------------------------------------------- forest

def test_forest_is_exact_mean_of_trees(rng):
    X, y, Xt, _ = linear_task(0, n=80)
    m = forest_fit(X, y, n_trees=3, seed=1)
    per_tree = [t.predict(Xt) for t in m.trees]
    assert np.array_equal(m.predict(Xt), (per_tree[0] + per_tree[1] + per_tree[2]) / 3)


def test_depth_zero_tree_predicts_training_mean(rng):
    X, y = rng.normal(size=(40, 3)), rng.normal(size=40)
    m = forest_fit(X, y, n_trees=1, max_depth=0, bootstrap=False)
    assert np.allclose(m.predict(rng.normal(size=(7, 3))), y.mean(), atol=1e-12)


def test_single_unpruned_tree_memorizes(rng):
    X, y = rng.normal(size=(60, 4)), rng.normal(size=60)
    m = forest_fit(X, y, n_trees=1, bootstrap=False, max_features=4)
    assert np.array_equal(m.predict(X), y)


def test_step_function_sign_accuracy(rng):
    X = rng.normal(size=(300, 3))
    y = (X[:, 0] > 0).astype(float)
    Xt = rng.normal(size=(1000, 3))
    m = forest_fit(X, y, n_trees=50, max_depth=2, seed=0)
    acc = np.mean((m.predict(Xt) > 0.5) == (Xt[:, 0] > 0))
    assert acc >= 0.95


def test_forest_same_seed_bit_identical(rng):
    X, y, Xt, _ = linear_task(1, n=100)
    a = forest_fit(X, y, n_trees=20, seed=9).predict(Xt)
    b = forest_fit(X, y, n_trees=20, seed=9).predict(Xt)
    assert a.tobytes() == b.tobytes()
    c = forest_fit(X, y, n_trees=20, seed=10).predict(Xt)
    assert not np.array_equal(a, c)


def test_forest_without_bootstrap_is_row_order_independent(rng):
    X, y, Xt, _ = linear_task(2, n=100)
    perm = rng.permutation(100)
    a = forest_fit(X, y, n_trees=5, seed=3, bootstrap=False).predict(Xt)
    b = forest_fit(X[perm], y[perm], n_trees=5, seed=3, bootstrap=False).predict(Xt)
    assert np.allclose(a, b, atol=1e-12)


def test_tree_depth_limit(rng):
    X, y = rng.normal(size=(200, 5)), rng.normal(size=200)
    m = forest_fit(X, y, n_trees=4, max_depth=3)
    assert all(t.depth() <= 3 for t in m.trees)


# ---------------------------------------------------------------- FNN

def test_param_count_closed_form():
    p = 16
    closed = (p * 500 + 500) + (500 * 250 + 250) + (250 * 125 + 125) + (125 * 125 + 125) + (125 * 1 + 1)
    assert param_count(p) == closed
    W, B = init_params(p)
    assert sum(w.size + b.size for w, b in zip(W, B)) == closed


def test_gradient_check_small_net_exhaustive(rng):
    # nonzero biases keep every ReLU away from its kink, where finite differences are invalid
    W, _ = init_params(4, (6, 5, 4, 3), rng)
    B = [rng.normal(0, 0.1, size=w.shape[1]) for w in W]
    X, y = rng.normal(size=(5, 4)), rng.normal(size=5)
    assert fnn_gradient_error(W, B, X, y) < 1e-4


def test_gradient_check_full_architecture_sampled(rng):
    W, _ = init_params(16, HIDDEN, rng)
    B = [rng.normal(0, 0.1, size=w.shape[1]) for w in W]
    X, y = rng.normal(size=(5, 16)), rng.normal(size=5)
    assert fnn_gradient_error(W, B, X, y, per_tensor=40, rng=rng) < 1e-4


def test_fnn_zero_target_trains_to_zero(rng):
    X = rng.normal(size=(256, 5))
    m = fnn_fit(X, np.zeros(256), seed=0, config=FnnConfig(hidden=(32, 16), epochs=150))
    # last epoch's loss (dropout active) and the loss of deterministic inference
    assert m.loss_history[-1] < 1e-2
    assert np.mean(m.predict(X) ** 2) < 1e-2


def test_fnn_linear_p20_noise_floor():
    X, y, Xt, yt = linear_task(0, n=500, p=20, sigma=0.5)
    m = fnn_fit(X, y, seed=0)
    assert held_out_rmse(m.predict(Xt), yt) <= 0.75


def test_fnn_inference_deterministic_and_seeded(rng):
    X, y = rng.normal(size=(50, 4)), rng.normal(size=50)
    cfg = FnnConfig(hidden=(16, 8), epochs=5)
    m = fnn_fit(X, y, seed=3, config=cfg)
    assert m.predict(X).tobytes() == m.predict(X).tobytes()
    again = fnn_fit(X, y, seed=3, config=cfg)
    assert m.predict(X).tobytes() == again.predict(X).tobytes()
    assert not np.array_equal(m.predict(X), fnn_fit(X, y, seed=4, config=cfg).predict(X))


def test_fnn_non_finite_loss_raises(rng):
    X = rng.normal(size=(10, 3)) * 1e300
    with np.errstate(all="ignore"), pytest.raises(TrainingError) as info:
        fnn_fit(X, np.ones(10), seed=0, config=FnnConfig(hidden=(4,), epochs=3, standardize_target=False))
    assert info.value.epoch == 0


def test_fnn_config_validation():
    with pytest.raises(ValueError):
        FnnConfig(dropout=1.0)
    with pytest.raises(ValueError):
        FnnConfig(epochs=0)


# ---------------------------------------------------------------- all families on the linear task

@pytest.mark.parametrize("family", ["svr", "forest", "fnn"])
def test_linear_task_within_noise_budget(family):
    X, y, Xt, yt = linear_task(0)
    if family == "svr":
        params = grid_search("svr", X, y, GridSearchPlan(), np.arange(len(y))).best_params
    else:
        params = {"n_trees": 300} if family == "forest" else {}
    m = fit_family(family, X, y, params, seed=0)
    assert held_out_rmse(predict(m, Xt), yt) <= 1.5 * 1.0


# ---------------------------------------------------------------- grid search

def test_one_point_grid_returned_directly(rng):
    plan = GridSearchPlan(grids={"svr": {"C": [3.0], "gamma": [0.2], "epsilon": [0.1]}})
    res = grid_search("svr", rng.normal(size=(20, 2)), rng.normal(size=20), plan, np.arange(20))
    assert res.best_params == {"C": 3.0, "gamma": 0.2, "epsilon": 0.1}
    assert res.fold_rmse.shape == (1, 5)


def test_grid_prefers_good_point_over_degenerate(rng):
    X = rng.normal(size=(120, 3))
    y = 5 * X[:, 0] + 0.1 * rng.normal(size=120)
    plan = GridSearchPlan(grids={"forest": {"n_trees": [20], "max_depth": [0, None]}})
    res = grid_search("forest", X, y, plan, np.arange(120) // 2)
    assert res.best_params["max_depth"] is None
    assert res.fold_rmse.shape == (2, 5)
    assert np.all(np.isfinite(res.fold_rmse))


def test_expand_grid_order():
    pts = expand_grid({"a": [1, 2], "b": ["x", "y"]})
    assert pts == [{"a": 1, "b": "x"}, {"a": 1, "b": "y"}, {"a": 2, "b": "x"}, {"a": 2, "b": "y"}]


def test_predict_clamp(rng):
    m = svr_fit(rng.normal(size=(10, 2)), np.linspace(-50, 50, 10), C=100.0, gamma=0.1)
    out = predict(m, rng.normal(size=(20, 2)) * 5, clamp=(0.0, 24.0))
    assert out.min() >= 0.0 and out.max() <= 24.0
    with pytest.raises(TypeError):
        predict(object(), np.ones((1, 2)))


# ---------------------------------------------------------------- serialization

@pytest.mark.parametrize("family,params", [("svr", {"C": 2.0, "gamma": 0.3}),
                                           ("forest", {"n_trees": 7, "max_depth": 5}),
                                           ("fnn", {"hidden": (12, 6), "epochs": 3})])
def test_model_round_trip(tmp_path, rng, family, params):
    X, y = rng.normal(size=(40, 3)), rng.normal(size=40)
    m = fit_family(family, X, y, params, seed=2)
    path = tmp_path / f"{family}.json"
    save_model(path, m)
    back = load_model(path)
    Xt = rng.normal(size=(15, 3))
    assert np.max(np.abs(predict(back, Xt) - predict(m, Xt))) <= 1e-12


@given(st.integers(1, 5), st.integers(1, 40))
def test_param_count_matches_any_architecture(depth, width):
    hidden = tuple([width] * depth)
    W, B = init_params(7, hidden)
    assert param_count(7, hidden) == sum(w.size + b.size for w, b in zip(W, B))
