"""Dense-grid oracle for the fuzzifier rule on a 27 x 7 LCG matrix (seed 2024).

criterion(m) = population CV of d_ij^(2/(m-1)) over pairs with d_ij > 0.
The estimate is the smallest grid m (step 1e-4 on (1, 10]) where the
criterion is at most 0.03 * dims.
"""
import numpy as np
from lcg import lcg_matrix

x = np.array(lcg_matrix(27, 7, 2024))
d = np.array([np.linalg.norm(x[i] - x[j]) for i in range(len(x)) for j in range(i + 1, len(x))])
d = d[d > 0]
target = 0.03 * x.shape[1]


def crit(m):
    y = (d / d.max()) ** (2.0 / (m - 1.0))
    return y.std() / y.mean()


grid = 1.0 + 1e-4 * np.arange(1, 90001)
vals = np.array([crit(m) for m in grid])
idx = np.argmax(vals <= target)
print("m*", repr(grid[idx]), "crit(1.5)", repr(crit(1.5)), "crit(3)", repr(crit(3.0)))
