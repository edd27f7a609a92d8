"""Synthetic M2PL response data with known parameters, and recovery
metrics for fits made on it."""
import dataclasses

import numpy as np
from scipy.special import expit
from scipy.stats import spearmanr

from .core import ResponseMatrix
from .exceptions import ConfigError, DataError
from .ingest import ResponseTable
from .irt import ItemParams, pearson_correlation, rebuild_natural_params

__all__ = [
    "GeneratorSpec",
    "SyntheticData",
    "RecoveryReport",
    "generate",
    "response_probabilities",
    "to_table",
    "procrustes_align",
    "recovery_report",
]


@dataclasses.dataclass(frozen=True)
class GeneratorSpec:
    n: int
    d: int
    k: int = 1
    seed: int = 0
    discrimination_range: tuple = (0.5, 2.0)
    intercept_range: tuple = (-2.0, 2.0)
    na_rate: float = 0.0

    def __post_init__(self):
        if self.n < 2 or self.d < 2:
            raise ConfigError("need n >= 2 and d >= 2")
        if not 1 <= self.k < self.d:
            raise ConfigError(f"need 1 <= k < d, got k={self.k}, d={self.d}")
        if not 0.0 <= self.na_rate <= 0.9:
            raise ConfigError(f"na_rate must lie in [0, 0.9], got {self.na_rate}")
        for name in ("discrimination_range", "intercept_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name} is empty: {(lo, hi)}")


@dataclasses.dataclass(frozen=True, eq=False)
class SyntheticData:
    data: ResponseMatrix
    abilities: np.ndarray
    items: list

    def __iter__(self):
        # allows ``data, abilities, items = generate(spec)``
        return iter((self.data, self.abilities, self.items))


def response_probabilities(items, abilities):
    """M2PL probabilities for all examinee/item pairs, shape (n, d)."""
    return expit(rebuild_natural_params(items, abilities))


def generate(spec):
    """Draw abilities, item parameters and responses from ``spec.seed``.

    Abilities are standard normal. Each item's discrimination vector is a
    uniform random direction scaled by a magnitude drawn uniformly from
    ``discrimination_range``; intercepts are uniform on
    ``intercept_range``. Cells are masked independently with probability
    ``na_rate``, except that every row and column keeps at least one
    observed cell.
    """
    rng = np.random.default_rng(spec.seed)
    n, d, k = spec.n, spec.d, spec.k
    abilities = rng.standard_normal((n, k))
    directions = rng.standard_normal((d, k))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    mags = rng.uniform(*spec.discrimination_range, size=d)
    intercepts = rng.uniform(*spec.intercept_range, size=d)
    items = [ItemParams(mags[j] * directions[j], intercepts[j])
             for j in range(d)]
    probs = response_probabilities(items, abilities)
    x = (rng.random((n, d)) < probs).astype(float)

    observed = rng.random((n, d)) >= spec.na_rate
    for i in np.flatnonzero(~observed.any(axis=1)):
        observed[i, rng.integers(d)] = True
    for j in np.flatnonzero(~observed.any(axis=0)):
        observed[rng.integers(n), j] = True
    values = np.where(observed, x, np.nan)
    names = [f"D{j + 1}" for j in range(d)]
    return SyntheticData(ResponseMatrix(values, observed, names), abilities,
                         items)


def to_table(synthetic, proficiency=True):
    """Ingest-format table of a synthetic data set.

    With ``proficiency`` a ``meta:proficiency`` column maps the first
    ability coordinate linearly to the 0-500 scale (250 + 50 * ability,
    clipped) so that maps and reports have something to color by.
    """
    data = synthetic.data
    n = data.n
    ids = [f"S{i + 1}" for i in range(n)]
    meta = {}
    if proficiency:
        score = np.clip(250.0 + 50.0 * synthetic.abilities[:, 0], 0.0, 500.0)
        meta["proficiency"] = [f"{s:.2f}" for s in score]
    cells = np.where(data.observed, data.values, np.nan)
    return ResponseTable(ids, data.column_names, cells, meta)


def procrustes_align(source, target):
    """Best orthogonal map from ``source`` columns onto ``target`` columns.

    Both matrices are centered and scaled to unit Frobenius norm before
    solving, so that the rotation is not driven by the arbitrary scale of
    the scores. ``source`` may have more columns than ``target``; the
    returned map then has orthonormal columns.

    Returns
    -------
    aligned : ndarray, shape (n, target.shape[1])
    R : ndarray, shape (source.shape[1], target.shape[1])
    """
    A = np.asarray(source, dtype=float)
    B = np.asarray(target, dtype=float)
    if A.shape[0] != B.shape[0] or A.shape[1] < B.shape[1]:
        raise DataError(
            f"cannot align {A.shape} onto {B.shape}")
    A = A - A.mean(axis=0)
    B = B - B.mean(axis=0)
    A = A / np.linalg.norm(A)
    B = B / np.linalg.norm(B)
    W, _, Vt = np.linalg.svd(A.T @ B, full_matrices=False)
    R = W @ Vt
    return A @ R, R


@dataclasses.dataclass(frozen=True)
class RecoveryReport:
    ability_correlations: tuple
    unaligned_correlations: tuple
    discrimination_spearman: float
    sign_agreement: float

    @property
    def mean_ability_correlation(self):
        return float(np.mean(self.ability_correlations))


def recovery_report(truth, fit):
    """Compare a fit against the generating parameters.

    Parameters
    ----------
    truth : (abilities, items)
    fit : FitResult
        Its rank may exceed the true ability dimension; the scores are then
        mapped onto the true axes by an orthonormal-column Procrustes map.
    """
    abilities, items = truth
    abilities = np.asarray(abilities, dtype=float)
    psi = np.asarray(fit.scores)
    params = fit.params
    if psi.shape[0] != abilities.shape[0]:
        raise DataError(
            f"fit has {psi.shape[0]} rows, truth has {abilities.shape[0]}")
    if params.d != len(items):
        raise DataError(f"fit has {params.d} items, truth has {len(items)}")
    k_true = abilities.shape[1]
    if params.k < k_true:
        raise DataError(
            f"fit rank {params.k} is below the true dimension {k_true}")

    aligned, R = procrustes_align(psi, abilities)
    aligned_corr = tuple(pearson_correlation(aligned[:, l], abilities[:, l])
                         for l in range(k_true))
    raw_corr = tuple(pearson_correlation(psi[:, l], abilities[:, l])
                     for l in range(k_true))

    true_disc = np.array([np.linalg.norm(it.delta) for it in items])
    fitted_disc = np.linalg.norm(params.U @ R, axis=1)
    rho = float(spearmanr(true_disc, fitted_disc)[0])

    theta_fit = params.mu + psi @ params.U.T
    theta_true = rebuild_natural_params(items, abilities)
    agree = float(np.mean((theta_fit > 0) == (theta_true > 0)))
    return RecoveryReport(aligned_corr, raw_corr, rho, agree)
