"""Exponential-family members used by the generalized PCA fit.

Only the two families needed here are supported: Bernoulli (logistic PCA)
and unit-variance Gaussian (classical PCA). Every function accepts scalars
or arrays and broadcasts like a numpy ufunc.
"""
import enum

import numpy as np
from scipy.special import expit, logit, xlogy

from .exceptions import ConfigError, DomainError

__all__ = [
    "Family",
    "log_partition",
    "link",
    "inverse_link",
    "deviance_cell",
    "saturated_natural_param",
]


class Family(str, enum.Enum):
    BERNOULLI = "bernoulli"
    GAUSSIAN = "gaussian"


def _finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _out(arr):
    return arr.item() if arr.ndim == 0 else arr


def log_partition(family, theta):
    """Log-partition function ``b(theta)``.

    ``theta**2 / 2`` for Gaussian, ``log(1 + exp(theta))`` for Bernoulli.
    The Bernoulli branch uses ``theta + log1p(exp(-theta))`` for positive
    arguments so that large saturated values do not overflow.
    """
    family = Family(family)
    theta = _finite("theta", theta)
    if family is Family.GAUSSIAN:
        return _out(0.5 * theta**2)
    pos = theta > 0
    with np.errstate(over="ignore"):
        res = np.where(pos,
                       theta + np.log1p(np.exp(-np.abs(theta))),
                       np.log1p(np.exp(np.minimum(theta, 0.0))))
    return _out(res)


def link(family, mean):
    """Canonical link ``g``: identity (Gaussian) or logit (Bernoulli)."""
    family = Family(family)
    mean = _finite("mean", mean)
    if family is Family.GAUSSIAN:
        return _out(mean.copy())
    if np.any((mean <= 0.0) | (mean >= 1.0)):
        raise DomainError(
            "Bernoulli mean must lie strictly inside (0, 1); "
            "use saturated_natural_param for boundary values")
    return _out(logit(mean))


def inverse_link(family, theta):
    """Mean function ``b'(theta)``."""
    family = Family(family)
    theta = _finite("theta", theta)
    if family is Family.GAUSSIAN:
        return _out(theta.copy())
    return _out(expit(theta))


def deviance_cell(family, x, theta):
    """Scaled deviance contributed by a single cell.

    Gaussian: ``(x - theta)**2``.

    Bernoulli: ``2 * [x log(x/p) + (1-x) log((1-x)/(1-p))]`` with
    ``p = expit(theta)`` and ``0 log 0 = 0``. It is evaluated as
    ``2 * [x log x + (1-x) log(1-x) - x theta + b(theta)]``, which is exact
    for every ``x`` in [0, 1] and reduces to ``2 * (b(theta) - x theta)``
    for binary ``x``.
    """
    family = Family(family)
    x = _finite("x", x)
    theta = _finite("theta", theta)
    if family is Family.GAUSSIAN:
        return _out((x - theta) ** 2)
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("Bernoulli observations must lie in [0, 1]")
    entropy = xlogy(x, x) + xlogy(1.0 - x, 1.0 - x)
    dev = 2.0 * (entropy - x * theta + log_partition(family, theta))
    # rounding can leave a tiny negative value at the exact fit
    return _out(np.maximum(dev, 0.0))


def saturated_natural_param(family, x, m=4.0):
    """Finite stand-in for the saturated-model natural parameter.

    Bernoulli returns ``m * (2x - 1)``; Gaussian returns ``x`` itself and
    ignores ``m``.
    """
    family = Family(family)
    x = _finite("x", x)
    if family is Family.GAUSSIAN:
        return _out(x.copy())
    if not m > 0:
        raise ConfigError(f"saturation scale m must be positive, got {m!r}")
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("Bernoulli observations must lie in [0, 1]")
    return _out(m * (2.0 * x - 1.0))
