"""Approximation guarantees as numbers.

The greedy and POSS guarantees shrink like 1/k under constant noise; the
PONSS guarantee stays constant.
"""

from noisysubset.analysis import BoundInputs, greedy_bound, ponss_bound, submodularity_ratio
from noisysubset.core import ItemSet
from noisysubset.objectives import FunctionObjective

print(" eps    k   greedy(2eps k)  greedy(2eps)  ponss")
for eps in (0.0, 0.05, 0.2):
    for k in (1, 5, 20, 100):
        inp = BoundInputs(eps, 1.0, k)
        print(f"{eps:4.2f} {k:4d}   {greedy_bound(inp):13.4f}  {greedy_bound(inp, '2eps'):12.4f}  "
              f"{ponss_bound(inp):5.4f}")

# gamma below one for a function with complementary items
table = {(): 0.0, (0,): 1.0, (1,): 1.0, (0, 1): 4.0}
f = FunctionObjective(2, lambda idx: table[idx])
gamma = submodularity_ratio(f, ItemSet(2), 2)
print(f"\nsubmodularity ratio of the pair function: {gamma}")
print(f"greedy guarantee with that gamma, eps=0.1, k=2: {greedy_bound(BoundInputs(0.1, gamma, 2)):.4f}")
