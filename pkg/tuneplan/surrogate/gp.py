# Copyright 2026 The Tuneplan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Gaussian-process regression with a Matérn-5/2 ARD kernel.

Targets are standardized to zero mean and unit variance before fitting, so
the hyperparameter bounds below hold for any objective scale. Inputs are
expected in [0,1]^d (see SpaceEncoder).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.spatial.distance import cdist

from tuneplan.errors import FactorizationError, InsufficientDataError
from tuneplan.space import SeedLike

logger = logging.getLogger(__name__)

JITTER_START = 1e-8
JITTER_MAX = 1e-2

LENGTHSCALE_BOUNDS = (1e-3, 10.0)
SIGNAL_BOUNDS = (1e-3, 1e3)
NOISE_BOUNDS = (1e-6, 1.0)

DEFAULT_LENGTHSCALE = 0.5
DEFAULT_NOISE = 1e-3
_FAILED_FIT = 1e25
_SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class SurrogateSettings:
    """How hyperparameters are fitted.

    Args:
        starts: Nelder-Mead runs; the first starts from fixed defaults, the
            others from seeded random points inside the bounds.
        max_iterations: iterations of each run.
        fixed_noise: noise variance to use instead of fitting it.
    """

    starts: int = 8
    max_iterations: int = 200
    fixed_noise: Optional[float] = None

    def __post_init__(self):
        if self.starts < 1 or self.max_iterations < 1:
            raise ValueError("starts and max_iterations must be at least 1")
        if self.fixed_noise is not None and self.fixed_noise < 0:
            raise ValueError("fixed_noise must be non-negative")


def matern52(
    a: np.ndarray, b: np.ndarray, lengthscales: np.ndarray, signal_variance: float
) -> np.ndarray:
    r = cdist(a / lengthscales, b / lengthscales)
    return signal_variance * (1.0 + _SQRT5 * r + 5.0 / 3.0 * r**2) * np.exp(-_SQRT5 * r)


def jittered_cholesky(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """Lower Cholesky factor of matrix + jitter * I.

    Jitter starts at 1e-8 and grows tenfold up to 1e-2.

    Returns:
        The factor and the jitter that made the factorization succeed.

    Raises:
        FactorizationError: the matrix is indefinite even with 1e-2 jitter.
    """
    eye = np.eye(matrix.shape[0])
    jitter = JITTER_START
    while jitter <= JITTER_MAX * (1 + 1e-9):
        try:
            return scipy.linalg.cholesky(matrix + jitter * eye, lower=True), jitter
        except np.linalg.LinAlgError:
            logger.debug("Cholesky failed with jitter %g", jitter)
            jitter *= 10
    raise FactorizationError(
        f"Covariance matrix of size {matrix.shape[0]} is not positive definite "
        f"even with jitter {JITTER_MAX}"
    )


@dataclass(frozen=True)
class GpModel:
    """A GP conditioned on data, in standardized target units.

    `predict` returns the posterior of the latent function. Use
    `standardize` to bring raw objective values to the model's scale.
    """

    inputs: np.ndarray
    targets: np.ndarray
    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float = JITTER_START
    target_mean: float = 0.0
    target_scale: float = 1.0
    notes: Tuple[str, ...] = field(default=())

    @property
    def dims(self) -> int:
        return self.inputs.shape[1]

    def standardize(self, value: float) -> float:
        return (value - self.target_mean) / self.target_scale

    def predict(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance at the rows of x (or a single point)."""
        points = np.atleast_2d(np.asarray(x, dtype=float))
        k_star = matern52(self.inputs, points, self.lengthscales, self.signal_variance)
        mean = k_star.T @ self.alpha
        v = scipy.linalg.solve_triangular(self.chol, k_star, lower=True)
        variance = np.maximum(self.signal_variance - np.sum(v**2, axis=0), 0.0)
        return mean, variance

    def log_marginal_likelihood(self) -> float:
        n = self.targets.shape[0]
        return float(
            -0.5 * self.targets @ self.alpha
            - np.sum(np.log(np.diag(self.chol)))
            - 0.5 * n * math.log(2 * math.pi)
        )


def condition(
    inputs: np.ndarray,
    targets: np.ndarray,
    lengthscales: Sequence[float],
    signal_variance: float,
    noise_variance: float,
    *,
    target_mean: float = 0.0,
    target_scale: float = 1.0,
    notes: Sequence[str] = (),
) -> GpModel:
    """Conditions a GP with fixed hyperparameters on already scaled data."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    targets = np.asarray(targets, dtype=float).ravel()
    lengthscales = np.broadcast_to(
        np.asarray(lengthscales, dtype=float), (inputs.shape[1],)
    ).copy()
    if np.any(lengthscales <= 0) or signal_variance <= 0 or noise_variance < 0:
        raise ValueError("Kernel hyperparameters must be positive")
    if targets.shape[0] != inputs.shape[0]:
        raise ValueError(
            f"{inputs.shape[0]} inputs but {targets.shape[0]} targets"
        )
    covariance = matern52(inputs, inputs, lengthscales, signal_variance)
    covariance += noise_variance * np.eye(inputs.shape[0])
    chol, jitter = jittered_cholesky(covariance)
    alpha = scipy.linalg.cho_solve((chol, True), targets)
    return GpModel(
        inputs=inputs,
        targets=targets,
        lengthscales=lengthscales,
        signal_variance=float(signal_variance),
        noise_variance=float(noise_variance),
        chol=chol,
        alpha=alpha,
        jitter=jitter,
        target_mean=float(target_mean),
        target_scale=float(target_scale),
        notes=tuple(notes),
    )


def _log_bounds(dims: int, settings: SurrogateSettings) -> np.ndarray:
    bounds = [LENGTHSCALE_BOUNDS] * dims + [SIGNAL_BOUNDS]
    if settings.fixed_noise is None:
        bounds.append(NOISE_BOUNDS)
    return np.log(np.array(bounds))


def starting_points(
    dims: int, settings: Optional[SurrogateSettings] = None, seed: SeedLike = 0
) -> np.ndarray:
    """Log-space hyperparameter vectors the fit starts from, one per row.

    A row holds d log-lengthscales, the log signal variance and, unless the
    noise is fixed, the log noise variance.
    """
    settings = settings or SurrogateSettings()
    bounds = _log_bounds(dims, settings)
    first = [math.log(DEFAULT_LENGTHSCALE)] * dims + [0.0]
    if settings.fixed_noise is None:
        first.append(math.log(DEFAULT_NOISE))
    rng = np.random.default_rng(seed)
    others = rng.uniform(
        bounds[:, 0], bounds[:, 1], size=(settings.starts - 1, bounds.shape[0])
    )
    return np.vstack([np.array(first)[None, :], others])


def _unpack(theta: np.ndarray, dims: int, settings: SurrogateSettings):
    values = np.exp(theta)
    noise = settings.fixed_noise if settings.fixed_noise is not None else values[-1]
    return values[:dims], float(values[dims]), float(noise)


def fit(
    inputs: np.ndarray,
    targets: np.ndarray,
    seed: SeedLike = 0,
    settings: Optional[SurrogateSettings] = None,
) -> GpModel:
    """Fits the hyperparameters by maximizing the log marginal likelihood.

    Every start runs Nelder-Mead in log space inside the bounds; the best
    point seen over all runs and starts wins. Constant targets yield a
    constant-mean model with default hyperparameters and a note.

    Raises:
        InsufficientDataError: fewer than two data points.
        ValueError: non-finite targets or mismatched shapes.
    """
    settings = settings or SurrogateSettings()
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    targets = np.asarray(targets, dtype=float).ravel()
    n, dims = inputs.shape
    if n < 2:
        raise InsufficientDataError(f"A surrogate needs 2 data points, got {n}")
    if targets.shape[0] != n:
        raise ValueError(f"{n} inputs but {targets.shape[0]} targets")
    if not np.all(np.isfinite(targets)):
        raise ValueError("Surrogate targets must be finite")

    mean = float(np.mean(targets))
    scale = float(np.std(targets))
    if scale == 0.0:
        logger.info("All %d targets equal %g; using a constant model", n, mean)
        noise = DEFAULT_NOISE if settings.fixed_noise is None else settings.fixed_noise
        return condition(
            inputs,
            np.zeros(n),
            [DEFAULT_LENGTHSCALE] * dims,
            1.0,
            noise,
            target_mean=mean,
            notes=(f"all targets equal {mean:g}; constant model",),
        )
    y = (targets - mean) / scale

    def negative_lml(theta: np.ndarray) -> float:
        lengthscales, signal, noise = _unpack(theta, dims, settings)
        try:
            model = condition(inputs, y, lengthscales, signal, noise)
        except FactorizationError:
            return _FAILED_FIT
        value = -model.log_marginal_likelihood()
        return value if math.isfinite(value) else _FAILED_FIT

    bounds = _log_bounds(dims, settings)
    best_theta, best_value = None, math.inf
    for start in starting_points(dims, settings, seed):
        value = negative_lml(start)
        if value < best_value:
            best_theta, best_value = start, value
        result = scipy.optimize.minimize(
            negative_lml,
            start,
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxiter": settings.max_iterations},
        )
        if result.fun < best_value:
            best_theta, best_value = np.asarray(result.x), float(result.fun)
    if best_theta is None or best_value >= _FAILED_FIT:
        raise FactorizationError("No hyperparameters gave a factorizable covariance")

    lengthscales, signal, noise = _unpack(best_theta, dims, settings)
    model = condition(
        inputs,
        y,
        lengthscales,
        signal,
        noise,
        target_mean=mean,
        target_scale=scale,
    )
    if model.jitter > JITTER_START:
        logger.warning("Surrogate covariance needed jitter %g", model.jitter)
    logger.debug(
        "Fitted GP on %d points: lengthscales=%s signal=%.3g noise=%.3g lml=%.4g",
        n,
        np.round(lengthscales, 4),
        signal,
        noise,
        -best_value,
    )
    return model
