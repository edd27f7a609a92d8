"""Reading a fitted model as an IRT model or as an inner product
representation.

Row ``j`` of the loadings is item ``j``'s relative-discrimination vector,
``mu[j]`` its intercept, and the score rows are examinee abilities. The
same quantities describe item ``j`` as the hyperplane
``{a : b_j . a = c_j}`` with ``b_j = u_j`` and ``c_j = -mu_j``; that
hyperplane is the 0.5 level set of the item's response probability.
"""
import csv
import dataclasses
import enum
import io
import math

import numpy as np
from scipy.special import expit

from .exceptions import DataError, DomainError

__all__ = [
    "ItemParams",
    "Hyperplane",
    "Side",
    "to_item_params",
    "rebuild_natural_params",
    "m2pl_probability",
    "to_hyperplanes",
    "classify_side",
    "relative_loadings",
    "pearson_correlation",
    "item_params_csv",
]

ZERO_DISCRIMINATION = 1e-12
ON_TOLERANCE = 1e-12


@dataclasses.dataclass(frozen=True, eq=False)
class ItemParams:
    delta: np.ndarray
    d_intercept: float

    def __post_init__(self):
        delta = np.array(self.delta, dtype=float).reshape(-1)
        delta.flags.writeable = False
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "d_intercept", float(self.d_intercept))

    @property
    def relative_difficulty(self):
        """``-d / delta_l`` per ability axis; None where ``delta_l`` is 0."""
        return tuple(
            float(-self.d_intercept / dl)
            if abs(dl) > ZERO_DISCRIMINATION else None
            for dl in self.delta)


@dataclasses.dataclass(frozen=True, eq=False)
class Hyperplane:
    b: np.ndarray
    c: float

    def __post_init__(self):
        b = np.array(self.b, dtype=float).reshape(-1)
        b.flags.writeable = False
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))


class Side(enum.Enum):
    POSITIVE = 1
    ON = 0
    NEGATIVE = -1


def to_item_params(params):
    return [ItemParams(params.U[j], params.mu[j]) for j in range(params.d)]


def rebuild_natural_params(items, abilities):
    """``theta_ij = delta_j . alpha_i + d_j`` for every examinee and item."""
    abilities = np.atleast_2d(np.asarray(abilities, dtype=float))
    delta = np.stack([it.delta for it in items])
    d = np.array([it.d_intercept for it in items])
    return abilities @ delta.T + d


def m2pl_probability(item, ability):
    """Probability of a correct response under the M2PL model."""
    z = float(np.dot(item.delta, np.asarray(ability, dtype=float).reshape(-1)))
    return float(expit(z + item.d_intercept))


def to_hyperplanes(params):
    return [Hyperplane(params.U[j], -params.mu[j]) for j in range(params.d)]


def classify_side(h, point):
    """Which side of ``h`` the point lies on.

    POSITIVE means ``b . a > c``, the side where the response probability
    exceeds 0.5; points within 1e-12 of the plane count as ON.
    """
    point = np.asarray(point, dtype=float).reshape(-1)
    if not np.all(np.isfinite(point)):
        raise DomainError("point must be finite")
    gap = float(np.dot(h.b, point)) - h.c
    if abs(gap) <= ON_TOLERANCE:
        return Side.ON
    return Side.POSITIVE if gap > 0 else Side.NEGATIVE


def relative_loadings(params, component):
    """Percentage share of each item in one principal component.

    Parameters
    ----------
    params : ModelParams
    component : int
        1-based component index.

    Returns
    -------
    loadings : ndarray, shape (d,)
        ``100 * U[:, component-1]**2``; sums to 100.
    mean : float
        The uniform reference share ``100 / d``.
    """
    if not 1 <= component <= params.k:
        raise DomainError(
            f"component must be in 1..{params.k}, got {component}")
    u = params.U[:, component - 1]
    return 100.0 * u**2, 100.0 / params.d


def pearson_correlation(a, b):
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise DataError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise DomainError("correlation needs at least two observations")
    ac = a - a.mean()
    bc = b - b.mean()
    saa = float(np.dot(ac, ac))
    sbb = float(np.dot(bc, bc))
    if saa == 0.0 or sbb == 0.0:
        raise DomainError("correlation is undefined for a constant vector")
    r = float(np.dot(ac, bc)) / math.sqrt(saa * sbb)
    return min(1.0, max(-1.0, r))


def item_params_csv(items, names=None):
    """Item parameters as CSV text.

    Columns are ``item, delta_1..delta_k, d, reldiff_1..reldiff_k``; an
    undefined relative difficulty is left empty.
    """
    k = len(items[0].delta)
    if names is None:
        names = [f"V{j + 1}" for j in range(len(items))]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["item", *(f"delta_{l + 1}" for l in range(k)), "d",
                *(f"reldiff_{l + 1}" for l in range(k))])
    for name, it in zip(names, items):
        w.writerow([name, *(repr(float(v)) for v in it.delta),
                    repr(it.d_intercept),
                    *("" if r is None else repr(r)
                      for r in it.relative_difficulty)])
    return buf.getvalue()
