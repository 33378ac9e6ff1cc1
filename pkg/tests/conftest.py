import numpy as np
import pytest

from klpref.core import make_instance
from klpref.estimation import fit_bt_mle, fit_gp_mle
from klpref.learners import generate_offline_dataset
from klpref.models import bt_reward_matrix, gp_preference_matrices, sigmoid

CONSISTENCY_GRID = (100, 1_000, 10_000, 100_000)


def _prob_mse_eval_set(instance, n_eval=2000, seed=99):
    """Fixed evaluation triples (x, a1, a2) for preference-prob error.

    Contexts from the instance distribution, action pairs uniform, drawn
    once; the metric is then a deterministic functional of the model.
    """
    rng = np.random.default_rng(seed)
    X = instance.context_dist.sample(rng, n_eval)
    a1 = rng.integers(0, instance.n_actions, n_eval)
    a2 = rng.integers(0, instance.n_actions, n_eval)
    return X, a1, a2


def _prob_values(instance, params, X, a1, a2):
    idx = np.arange(X.shape[0])
    if instance.variant == "gp":
        Q = gp_preference_matrices(params, X, instance.actions)
        return Q[idx, a1, a2]
    R = bt_reward_matrix(params, X, instance.actions)
    return sigmoid(R[idx, a1] - R[idx, a2])


@pytest.fixture(scope="session")
def consistency_curves():
    """Preference-prob MSE of the default fitters across sample sizes.

    Shared between the estimation examples and the acceptance slope
    check; the expensive fits run once per session.
    """
    curves = {}
    for variant in ("bt", "gp"):
        instance = make_instance(variant=variant, seed=3)
        X, a1, a2 = _prob_mse_eval_set(instance)
        truth = (
            instance.params.tensor if variant == "gp" else instance.params.matrix
        )
        p_true = _prob_values(instance, truth, X, a1, a2)
        fit = fit_gp_mle if variant == "gp" else fit_bt_mle
        points = []
        for n in CONSISTENCY_GRID:
            data = generate_offline_dataset(instance, n, np.random.default_rng(n))
            result = fit(data, instance.actions)
            p_hat = _prob_values(instance, result.params, X, a1, a2)
            points.append((n, float(np.mean((p_hat - p_true) ** 2))))
        curves[variant] = points
    return curves
