"""
Recovering a latent trait from binary responses
===============================================

Simulate a unidimensional M2PL test, fit a two-component logistic PCA and
check how well the first component tracks the simulated ability.
"""

import numpy as np

from lpca import FitConfig, fit
from lpca.irt import pearson_correlation
from lpca.synth import GeneratorSpec, generate, recovery_report

sd = generate(GeneratorSpec(n=2000, d=24, k=1, seed=1))
print("responses:", sd.data.values.shape,
      "share correct:", round(float(np.mean(sd.data.values)), 3))

res = fit(sd.data, "bernoulli", FitConfig(k=2, m=4.0))
print("converged:", res.converged, "after", res.n_iter, "sweeps")

# the objective never goes up between sweeps
trace = np.array(res.objective_trace)
print("largest step change:", float(np.max(np.diff(trace))))

r = pearson_correlation(res.scores[:, 0], sd.abilities[:, 0])
print("corr(PC1, ability):", round(abs(r), 3))

rep = recovery_report((sd.abilities, sd.items), res)
print("spearman of discriminations:", round(rep.discrimination_spearman, 3))
print("agreement of p > 0.5 with the truth:", round(rep.sign_agreement, 3))

# missing cells: mask a fifth of the responses and refit
masked = generate(GeneratorSpec(n=2000, d=24, k=1, seed=1, na_rate=0.2))
res_na = fit(masked.data, "bernoulli", FitConfig(k=2))
r_na = pearson_correlation(res_na.scores[:, 0], masked.abilities[:, 0])
print("with 20% missing:", round(abs(r_na), 3))
