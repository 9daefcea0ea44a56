"""Ward merge costs for equally spaced collinear points, via scipy.

scipy reports the Ward distance sqrt(2 * cost); cost = s_a s_b / (s_a + s_b) * |m_a - m_b|^2.
Prints the remaining-clusters vs merge-cost curve for k = 1..10 and its chord-distance elbow.
"""
import numpy as np
from scipy.cluster.hierarchy import linkage

for n in (10, 12, 20, 27):
    x = np.arange(n, dtype=float).reshape(-1, 1)
    z = linkage(x, method="ward")
    cost = z[:, 2] ** 2 / 2.0
    # merge t (0-based) leaves n - t - 1 clusters
    ys = [float(cost[n - k - 1]) if 0 <= n - k - 1 < len(cost) else 0.0 for k in range(1, 11)]
    xs = np.arange(1, 11, dtype=float)
    xn = (xs - xs.min()) / (xs.max() - xs.min())
    y = np.array(ys)
    yn = (y - y.min()) / (y.max() - y.min())
    a = np.array([xn[-1] - xn[0], yn[-1] - yn[0]])
    dist = np.abs(a[0] * (yn - yn[0]) - a[1] * (xn - xn[0])) / np.linalg.norm(a)
    print(n, "elbow k =", int(xs[np.argmax(dist)]), "distance =", round(float(dist.max()), 4), "ys =", [round(v, 4) for v in ys])
