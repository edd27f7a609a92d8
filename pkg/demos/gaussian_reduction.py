"""
Gaussian family and ordinary PCA
================================

With the Gaussian family the saturated natural parameter is the data itself
and the deviance is a plain sum of squares, so the fit lands on the
classical principal subspace.
"""

import numpy as np

from lpca import FitConfig, ResponseMatrix, fit

rng = np.random.default_rng(0)
x = rng.standard_normal((200, 6)) @ rng.standard_normal((6, 6))
data = ResponseMatrix.from_array(x)

res = fit(data, "gaussian", FitConfig(k=2))
print("sweeps:", res.n_iter, "objective:", round(res.objective, 6))

# classical PCA from an SVD of the centered data
xc = x - x.mean(axis=0)
_, s, Vt = np.linalg.svd(xc, full_matrices=False)
print("SVD residual:", round(float(np.sum(s[2:] ** 2)), 6))

# the two subspaces agree up to rounding
cosines = np.linalg.svd(res.params.U.T @ Vt[:2].T, compute_uv=False)
print("principal angles:", np.arccos(np.clip(cosines, -1, 1)))
