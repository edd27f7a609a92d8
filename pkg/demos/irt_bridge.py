"""
Reading loadings as item parameters
===================================

Every fitted column is also an M2PL item: its loading row is the
discrimination vector and its offset the intercept. The same numbers
describe a line in score space on which the fitted probability is 0.5.
"""

import numpy as np

from lpca import FitConfig, fit, fitted_probabilities
from lpca.irt import (Side, classify_side, item_params_csv,
                      m2pl_probability, relative_loadings, to_hyperplanes,
                      to_item_params)
from lpca.synth import GeneratorSpec, generate

sd = generate(GeneratorSpec(n=800, d=10, k=2, seed=2))
res = fit(sd.data, "bernoulli", FitConfig(k=2))

items = to_item_params(res.params)
print(item_params_csv(items, res.params.column_names))

# probabilities from the item parameters match the fitted ones
probs = fitted_probabilities(res.params, sd.data)
i, j = 5, 3
print("fitted:", probs[i, j], "M2PL:", m2pl_probability(items[j], res.scores[i]))

# the side of the level-set line predicts the response
h = to_hyperplanes(res.params)[j]
sides = np.array([classify_side(h, psi) is Side.POSITIVE
                  for psi in res.scores])
print("side agrees with p > 0.5:", bool(np.all(sides == (probs[:, j] > 0.5))))

loads, mean = relative_loadings(res.params, 1)
top = np.argsort(-loads)[:3]
print("largest PC1 shares:",
      [(res.params.column_names[t], round(float(loads[t]), 2)) for t in top],
      "mean:", round(mean, 2))
