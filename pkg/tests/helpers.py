"""Shared constructions and independent oracles for the test suite."""

import numpy as np

from depcost.models.fnn import loss_and_grads


def linear_task(seed, n=200, p=10, sigma=1.0, n_test=2000):
    """y = X w + noise with X ~ N(0, I) and a unit-norm w (signal std 1)."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=p)
    w /= np.linalg.norm(w)
    X = rng.normal(size=(n, p))
    Xt = rng.normal(size=(n_test, p))
    return X, X @ w + sigma * rng.normal(size=n), Xt, Xt @ w + sigma * rng.normal(size=n_test)


def held_out_rmse(pred, truth):
    return float(np.sqrt(np.mean((np.asarray(pred) - np.asarray(truth)) ** 2)))


def fnn_gradient_error(weights, biases, X, y, per_tensor=None, h=1e-5, rng=None):
    """Max relative error between analytic and central-difference gradients.

    ``per_tensor`` limits the check to that many random entries per tensor.
    """
    _, gw, gb = loss_and_grads(weights, biases, X, y)
    worst = 0.0
    for params, grads in ((weights, gw), (biases, gb)):
        for P, G in zip(params, grads):
            flat, gflat = P.reshape(-1), G.reshape(-1)
            idx = np.arange(flat.size)
            if per_tensor is not None and flat.size > per_tensor:
                idx = rng.choice(flat.size, per_tensor, replace=False)
            for i in idx:
                orig = flat[i]
                flat[i] = orig + h
                up = loss_and_grads(weights, biases, X, y)[0]
                flat[i] = orig - h
                down = loss_and_grads(weights, biases, X, y)[0]
                flat[i] = orig
                num = (up - down) / (2 * h)
                worst = max(worst, abs(num - gflat[i]) / max(abs(num), abs(gflat[i]), 1e-7))
    return worst


def svr_toy(seed=0, n=20):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    return X, X[:, 0] + 0.1 * rng.normal(size=n)
