"""Fixed point of fuzzy c-means on {0, 3, 6}, k = 2, m = 2 by direct scalar iteration."""
import numpy as np

x = np.array([0.0, 3.0, 6.0])
c = np.array([1.0, 5.0])
m = 2.0
for _ in range(10000):
    d = np.abs(x[:, None] - c[None, :])
    u = 1.0 / ((d[:, :, None] / d[:, None, :]) ** (2 / (m - 1))).sum(axis=2)
    w = u ** m
    new = (w * x[:, None]).sum(axis=0) / w.sum(axis=0)
    if np.max(np.abs(new - c)) < 1e-15:
        c = new
        break
    c = new
print(repr(c[0]), repr(c[1]))
print(repr(u[0, 0]), repr(u[1, 0]))
