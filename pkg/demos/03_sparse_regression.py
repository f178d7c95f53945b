"""Sparse regression: choose k predictors that maximize R^2.

The noisy objective fits on a random 200-row sample; the reported value uses
every row.
"""

import numpy as np

from noisysubset.algorithms import AlgoConfig, run_algorithm
from noisysubset.core import ItemSet
from noisysubset.regression import RegressionData, make_regression_objective, mse_on_rows, normalize

rng = np.random.default_rng(11)
rows, p = 3000, 30
X = rng.normal(size=(rows, p))
X[:, 10:20] += 0.7 * X[:, :10]  # correlated decoys
beta = np.zeros(p)
beta[[0, 3, 5, 8, 12]] = [1.0, -0.8, 0.6, 0.5, 0.4]
z = X @ beta + rng.normal(size=rows)
data = normalize(RegressionData(X, z))

truth = ItemSet.from_indices(p, [0, 3, 5, 8, 12])
print(f"R^2 of the generating features: {mse_on_rows(data, truth).r2:.4f}")

obj = make_regression_objective(data, sample_size=200)
noisy = [obj.noisy_eval(truth, rng) for _ in range(5)]
print("noisy R^2 on 200-row samples:", np.round(noisy, 4))

k = 5
cfg = AlgoConfig(k, theta=0.05)
for name in ("greedy", "poss", "ponss", "pore"):
    rec = run_algorithm(name, obj, cfg, seed=0, budget=None if name == "greedy" else 3000)
    print(f"{name:>6}: {sorted(rec.subset)}  R^2={rec.exact_value:.4f}  evals={rec.evals_used}")
