"""Logistic PCA for assessment response data.

Fits exponential-family PCA (Bernoulli or Gaussian) by deviance
minimization, reads the fit as a multidimensional two-parameter IRT model,
and draws proficiency, descriptor and category maps as SVG.
"""
from .core import (FitConfig, FitResult, Init, ModelParams, ResponseMatrix,
                   fit, fitted_probabilities, load_model, objective,
                   project_natural_params, save_model, scores)
from .exceptions import (ConfigError, DataError, DomainError, LPCAError,
                         ParseError)
from .expfam import Family

__version__ = "0.1.0"
