"""Max coverage with multiplicative noise: how the optimizers compare.

Run with ``python3 demos/01_coverage_under_noise.py``. Takes about ten seconds.
"""

import numpy as np

from noisysubset.algorithms import AlgoConfig, run_algorithm
from noisysubset.analysis import brute_force_opt, summarize
from noisysubset.core import ItemSet
from noisysubset.objectives import CoverageInstance, default_budget, make_coverage, wrap_multiplicative_noise

rng = np.random.default_rng(7)

# a small instance first, small enough to know the optimum
small = make_coverage(CoverageInstance.random(12, 40, rng, 1, 8))
best_set, opt = brute_force_opt(small, 3)
print(f"small instance: OPT={opt:g} with items {list(best_set)}")

# noise multiplies f by (1 + u), u ~ U(-eps, eps)
noisy_small = wrap_multiplicative_noise(small, 0.3)
samples = [noisy_small.noisy_eval(best_set, rng) for _ in range(5)]
print("five noisy looks at the optimum:", np.round(samples, 2))

# greedy trusts every sample, so it can be misled
for seed in range(3):
    rec = run_algorithm("greedy", noisy_small, AlgoConfig(3), seed)
    print(f"greedy seed {seed}: {sorted(rec.subset)} -> exact {rec.exact_value:g}")

# a larger instance, 10 paired seeds per optimizer
n, k = 40, 6
big = wrap_multiplicative_noise(make_coverage(CoverageInstance.random(n, 150, rng, 5, 25)), 0.3)
print(f"\nn={n}, k={k}, budget={default_budget(k, n)} evaluations per run")
for name in ("greedy", "poss", "ponss", "pore", "pore-f"):
    recs = [run_algorithm(name, big, AlgoConfig(k, theta=0.15), s) for s in range(10)]
    st = summarize(recs)
    evals = np.mean([r.evals_used for r in recs])
    print(f"{name:>7}: mean {st.mean:7.2f}  std {st.std:5.2f}  evals {evals:8.0f}")

# the robust f1 of a set is the mean noisy value of its leave-one-out subsets
s = ItemSet.from_indices(n, range(k))
loo = [big.exact_eval(t) for t in s.leave_one_out()]
print(f"\nf(S)={big.exact_eval(s):g}, leave-one-out values {loo}")
