"""Four 2-D blobs (square corners spaced 10 apart, sd 1, 10 points each):
fraction of 50 numpy seeds whose Ward-cost elbow is k = 4."""
import numpy as np
from scipy.cluster.hierarchy import linkage

hits = 0
for seed in range(50):
    rng = np.random.default_rng(seed)
    centers = np.array([[0, 0], [10, 0], [0, 10], [10, 10]], dtype=float)
    x = np.vstack([c + rng.normal(size=(10, 2)) for c in centers])
    cost = linkage(x, method="ward")[:, 2] ** 2 / 2.0
    n = len(x)
    y = np.array([cost[n - k - 1] for k in range(1, 11)])
    xs = np.arange(1, 11, dtype=float)
    xn = (xs - 1) / 9
    yn = (y - y.min()) / (y.max() - y.min())
    dist = np.abs((xn[-1] - xn[0]) * (yn - yn[0]) - (yn[-1] - yn[0]) * (xn - xn[0]))
    hits += int(xs[np.argmax(dist)]) == 4
print("elbow == 4 in", hits, "of 50 seeds")
