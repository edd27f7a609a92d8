"""Generalized PCA fit by scaled-deviance minimization.

The model projects the saturated natural parameters onto a translated
k-dimensional subspace,

    theta_i = mu + U U^T (theta_tilde_i - mu),

and chooses the offset ``mu`` and the orthonormal loadings ``U`` to
minimize the deviance summed over observed cells. The minimization is a
majorization-minimization scheme: each sweep replaces the deviance by a
quadratic upper bound (the Bernoulli curvature never exceeds 1/4) and
minimizes that bound exactly, first over ``mu`` and then over ``U``.

Missing cells contribute nothing to the deviance. Inside the projection a
missing entry of ``theta_tilde_i`` is replaced by the matching coordinate
of ``mu``, so its centered contribution is zero.
"""
import dataclasses
import enum
import json
import math

import numpy as np

from .exceptions import ConfigError, DataError
from .expfam import Family, deviance_cell, inverse_link, log_partition

__all__ = [
    "ResponseMatrix",
    "ModelParams",
    "FitConfig",
    "FitResult",
    "Init",
    "saturated_matrix",
    "project_natural_params",
    "natural_params",
    "objective",
    "objective_gradient_mu",
    "true_deviance",
    "fit",
    "scores",
    "fitted_probabilities",
    "save_model",
    "load_model",
    "model_to_json",
    "model_from_json",
]

_ORTHO_TOL = 1e-8


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclasses.dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """An n x d data matrix with a mask of observed cells.

    Values under a ``False`` mask entry are never read, so they may hold
    anything, NaN included.
    """
    values: np.ndarray
    observed: np.ndarray
    column_names: tuple = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        observed = np.array(self.observed, dtype=bool)
        if values.ndim != 2:
            raise DataError("response matrix must be two-dimensional")
        if observed.shape != values.shape:
            raise DataError(
                f"mask shape {observed.shape} differs from values shape "
                f"{values.shape}")
        if not np.all(np.isfinite(values[observed])):
            raise DataError("observed cells must hold finite values")
        empty_rows = np.flatnonzero(~observed.any(axis=1))
        if empty_rows.size:
            raise DataError(f"row {empty_rows[0]} has no observed cell")
        empty_cols = np.flatnonzero(~observed.any(axis=0))
        if empty_cols.size:
            raise DataError(f"column {empty_cols[0]} has no observed cell")
        names = self.column_names
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != values.shape[1]:
                raise DataError(
                    f"{len(names)} column names for {values.shape[1]} columns")
        values.flags.writeable = False
        observed.flags.writeable = False
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "observed", observed)

    @classmethod
    def from_array(cls, x, column_names=None):
        """Build from an array in which NaN marks a missing cell."""
        x = np.asarray(x, dtype=float)
        return cls(x, ~np.isnan(x), column_names)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def filled(self, fill=0.0):
        """Values with missing cells replaced by ``fill``."""
        return np.where(self.observed, self.values, fill)

    def take_rows(self, idx):
        return ResponseMatrix(self.values[idx], self.observed[idx],
                              self.column_names)


@dataclasses.dataclass(frozen=True, eq=False)
class ModelParams:
    """Offset ``mu`` (d,), orthonormal loadings ``U`` (d, k), scale ``m``."""
    mu: np.ndarray
    U: np.ndarray
    m: float
    family: Family
    column_names: tuple = None

    def __post_init__(self):
        mu = _frozen(self.mu)
        U = _frozen(self.U)
        if mu.ndim != 1 or U.ndim != 2 or U.shape[0] != mu.shape[0]:
            raise DataError(
                f"incompatible shapes mu {mu.shape} and U {U.shape}")
        d, k = U.shape
        if not 1 <= k <= d:
            raise ConfigError(f"need 1 <= k <= d, got k={k}, d={d}")
        gram_err = np.max(np.abs(U.T @ U - np.eye(k)))
        if not gram_err < _ORTHO_TOL:
            raise DataError(
                f"loadings are not orthonormal (max |U^T U - I| = "
                f"{gram_err:.3g})")
        if not self.m > 0:
            raise ConfigError("saturation scale m must be positive")
        names = self.column_names
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != d:
                raise DataError(f"{len(names)} column names for d={d}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "column_names", names)

    @property
    def d(self):
        return self.U.shape[0]

    @property
    def k(self):
        return self.U.shape[1]


class Init(str, enum.Enum):
    SVD = "svd"
    RANDOM = "random"


@dataclasses.dataclass(frozen=True)
class FitConfig:
    k: int
    m: float = 4.0
    max_iter: int = 500
    rel_tol: float = 1e-6
    seed: int = 0
    init: Init = Init.SVD

    def __post_init__(self):
        if not (isinstance(self.k, (int, np.integer)) and self.k >= 1):
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        if not self.m > 0:
            raise ConfigError(f"m must be positive, got {self.m!r}")
        if not self.rel_tol > 0:
            raise ConfigError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if not (isinstance(self.max_iter, (int, np.integer))
                and self.max_iter >= 1):
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter!r}")
        object.__setattr__(self, "init", Init(self.init))


@dataclasses.dataclass(frozen=True, eq=False)
class FitResult:
    """Fitted parameters, scores and optimization history.

    ``objective_trace[0]`` is the objective at the initial point and each
    following entry is the value after one (mu, U) sweep.
    """
    params: ModelParams
    scores: np.ndarray
    objective_trace: tuple
    true_deviance: float
    converged: bool
    diagnostics: tuple = ()

    @property
    def n_iter(self):
        return len(self.objective_trace) - 1

    @property
    def objective(self):
        return self.objective_trace[-1]


def saturated_matrix(data, family, m=4.0):
    """Saturated natural parameters for every observed cell.

    Missing cells hold 0. The value is a placeholder only: the projection
    recenters missing cells on ``mu`` and the objective skips them.
    """
    family = Family(family)
    x = data.filled(0.0)
    if family is Family.GAUSSIAN:
        return np.array(x)
    if not m > 0:
        raise ConfigError(f"saturation scale m must be positive, got {m!r}")
    if np.any((x < 0) | (x > 1)):
        raise DataError("Bernoulli data must lie in [0, 1]")
    return np.where(data.observed, m * (2.0 * x - 1.0), 0.0)


def _centered(theta_tilde, observed, mu):
    return np.where(observed, theta_tilde - mu, 0.0)


def project_natural_params(params, theta_tilde_row):
    """Project saturated natural parameters onto the fitted subspace.

    Returns ``mu + U U^T (theta_tilde - mu)``. Accepts one row (d,) or a
    stack of rows (n, d); NaN entries count as missing.
    """
    t = np.asarray(theta_tilde_row, dtype=float)
    if t.shape[-1] != params.d:
        raise DataError(
            f"row length {t.shape[-1]} does not match d={params.d}")
    c = np.where(np.isnan(t), 0.0, t - params.mu)
    return params.mu + (c @ params.U) @ params.U.T


def _check_dims(params, data):
    if data.d != params.d:
        raise DataError(
            f"data has {data.d} columns but the model expects {params.d}")


def scores(params, data):
    """Low-dimensional coordinates ``U^T (theta_tilde_i - mu)``, one row
    per examinee."""
    _check_dims(params, data)
    tt = saturated_matrix(data, params.family, params.m)
    return _centered(tt, data.observed, params.mu) @ params.U


def natural_params(params, data):
    """Projected natural parameter matrix for every cell."""
    return params.mu + scores(params, data) @ params.U.T


def fitted_probabilities(params, data):
    """Fitted means for every cell, missing ones included.

    For the Bernoulli family these are the probabilities ``expit(theta)``
    and double as imputations of the missing cells. For the Gaussian
    family the fitted means ``theta`` are returned.
    """
    return inverse_link(params.family, natural_params(params, data))


def _cell_objective(family, x, theta):
    if family is Family.GAUSSIAN:
        return (x - theta) ** 2
    return 2.0 * (log_partition(family, theta) - x * theta)


def _masked_sum(cells, observed):
    # fixed reduction order; independent of the thread count
    return float(math.fsum(cells[observed]))


def objective(data, params):
    """Deviance objective summed over observed cells.

    Bernoulli: ``2 * (b(theta) - x theta)`` per cell, i.e. the deviance
    up to a constant that does not depend on the parameters (it vanishes
    for binary data). Gaussian: ``(x - theta)**2``.
    """
    _check_dims(params, data)
    theta = natural_params(params, data)
    x = data.filled(0.0)
    return _masked_sum(_cell_objective(params.family, x, theta),
                       data.observed)


def true_deviance(data, params):
    """Scaled deviance including the saturated-model term.

    Equals :func:`objective` for binary Bernoulli or Gaussian data; for
    fractional Bernoulli data the two differ by a constant.
    """
    _check_dims(params, data)
    theta = natural_params(params, data)
    x = data.filled(0.0)
    return _masked_sum(deviance_cell(params.family, x, theta), data.observed)


def objective_gradient_mu(data, params):
    """Gradient of :func:`objective` with respect to ``mu`` at fixed ``U``."""
    _check_dims(params, data)
    obs = data.observed
    theta = natural_params(params, data)
    x = data.filled(0.0)
    if params.family is Family.GAUSSIAN:
        resid = 2.0 * (theta - x)
    else:
        resid = 2.0 * (inverse_link(params.family, theta) - x)
    resid = np.where(obs, resid, 0.0)
    proj = params.U @ params.U.T
    return resid.sum(axis=0) - np.where(obs, resid @ proj, 0.0).sum(axis=0)


def _canonical_signs(U):
    """Flip columns so that each one's largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def _top_eigenvectors(sym, k):
    w, V = np.linalg.eigh(sym)
    V = _canonical_signs(V)
    # descending eigenvalue, ties broken by the eigenvector coordinates
    order = sorted(range(len(w)), key=lambda i: (-w[i], tuple(-V[:, i])))
    return V[:, order[:k]]


def _orthonormal(A):
    Q, R = np.linalg.qr(A)
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def _initial_params(theta_tilde, observed, k, config):
    counts = observed.sum(axis=0)
    mu = np.where(observed, theta_tilde, 0.0).sum(axis=0) / counts
    d = theta_tilde.shape[1]
    if config.init is Init.RANDOM:
        rng = np.random.default_rng(config.seed)
        U = _orthonormal(rng.standard_normal((d, k)))
    else:
        c = _centered(theta_tilde, observed, mu)
        _, _, Vt = np.linalg.svd(c, full_matrices=False)
        U = Vt[:k].T
    return mu, _canonical_signs(U)


def _update_mu(mu, U, Z, theta_tilde, observed):
    """Exact minimizer over ``mu`` of ``||Z - Theta(mu, U)||_F^2``.

    Row i of Theta is ``a_i + (I - P D_i) mu`` with ``P = U U^T`` and
    ``D_i`` the observation mask of row i, so the normal equations have
    matrix ``sum_i (I - D_i P)(I - P D_i)``. The part of ``mu`` the
    objective cannot see (the null space) is kept from the previous value.
    """
    n = Z.shape[0]
    obs = observed.astype(float)
    proj = U @ U.T
    counts = obs.sum(axis=0)
    gram = (n * np.eye(len(mu)) - counts[:, None] * proj
            - proj * counts[None, :] + proj * (obs.T @ obs))
    a = np.where(observed, theta_tilde, 0.0) @ proj
    r = Z - a
    rhs = r.sum(axis=0) - (obs * (r @ proj)).sum(axis=0)
    step, *_ = np.linalg.lstsq(gram, rhs - gram @ mu, rcond=1e-10)
    return mu + step


def _update_U(mu, Z, theta_tilde, observed, k):
    c = _centered(theta_tilde, observed, mu)
    zc = Z - mu
    cz = c.T @ zc
    sym = cz + cz.T - c.T @ c
    return _top_eigenvectors(0.5 * (sym + sym.T), k)


def _theta(mu, U, theta_tilde, observed):
    return mu + (_centered(theta_tilde, observed, mu) @ U) @ U.T


def fit(data, family, config):
    """Fit the rank-k translated natural-parameter model.

    Parameters
    ----------
    data : ResponseMatrix
    family : Family or str
    config : FitConfig

    Returns
    -------
    FitResult
        ``converged`` is True when the relative change of the objective
        between two sweeps dropped below ``config.rel_tol`` within
        ``config.max_iter`` sweeps.
    """
    family = Family(family)
    n, d = data.values.shape
    k = int(config.k)
    if k >= d:
        raise ConfigError(f"k must be smaller than d={d}, got k={k}")
    obs = data.observed
    x = data.filled(0.0)
    if family is Family.BERNOULLI and np.any((x < 0) | (x > 1)):
        raise DataError("Bernoulli data must lie in [0, 1]")
    tt = saturated_matrix(data, family, config.m)

    diagnostics = []
    mu, U = _initial_params(tt, obs, k, config)
    const_cols = np.flatnonzero(
        ~np.any(_centered(tt, obs, mu) != 0.0, axis=0))
    for j in const_cols:
        diagnostics.append(f"column {j} is constant after centering")

    def evaluate(mu, U):
        theta = _theta(mu, U, tt, obs)
        return theta, _masked_sum(_cell_objective(family, x, theta), obs)

    theta, obj = evaluate(mu, U)
    trace = [obj]
    converged = False
    for _ in range(config.max_iter):
        if family is Family.GAUSSIAN:
            Z = np.where(obs, x, theta)
        else:
            Z = np.where(obs, theta + 4.0 * (x - inverse_link(family, theta)),
                         theta)
        mu = _update_mu(mu, U, Z, tt, obs)
        U = _update_U(mu, Z, tt, obs, k)
        theta, obj = evaluate(mu, U)
        prev = trace[-1]
        trace.append(obj)
        change = abs(prev - obj)
        if change <= config.rel_tol * max(abs(prev), np.finfo(float).tiny):
            converged = True
            break
    if not converged:
        diagnostics.append(
            f"no convergence after {config.max_iter} iterations")

    params = ModelParams(mu, U, config.m, family, data.column_names)
    psi = _centered(tt, obs, mu) @ U
    return FitResult(
        params=params,
        scores=_frozen(psi),
        objective_trace=tuple(trace),
        true_deviance=true_deviance(data, params),
        converged=converged,
        diagnostics=tuple(diagnostics),
    )


def model_to_json(params):
    doc = {
        "family": params.family.value,
        "k": params.k,
        "m": params.m,
        "mu": params.mu.tolist(),
        "U": params.U.tolist(),
        "column_names": list(params.column_names or
                             (f"V{j + 1}" for j in range(params.d))),
    }
    # float repr is the shortest string that round-trips exactly
    return json.dumps(doc, indent=2) + "\n"


def model_from_json(text):
    doc = json.loads(text)
    try:
        params = ModelParams(
            mu=doc["mu"], U=doc["U"], m=doc["m"], family=doc["family"],
            column_names=doc.get("column_names"))
    except KeyError as exc:
        raise DataError(f"model document lacks field {exc}") from None
    if params.k != doc["k"]:
        raise DataError(f"declared k={doc['k']} but U has {params.k} columns")
    return params


def save_model(params, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(params))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_json(fh.read())
