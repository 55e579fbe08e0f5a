"""Finite-sample Monte Carlo checks for the polynomial-decay model.

Designs are ``n x N`` Gaussian matrices with covariance ``diag(j**-kappa)``.
The PCR estimator keeps the first ``p`` coordinates (the top population
components) and fits them by least squares, or by the minimum-norm
interpolant once ``p > n``.  :func:`conditional_risk` gives the exact
expected prediction error over the isotropic prior on ``theta`` and the noise,
conditional on the design; :func:`sampled_risk` estimates the same quantity by
brute-force sampling and serves as its oracle.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import DegenerateDesignError, DomainError, PCRRiskError
from .numkernel import power_integral


class InterpolationThresholdWarning(UserWarning):
    """Emitted when ``p == n``; the Gram matrix is close to singular there."""


@dataclass(frozen=True)
class SimConfig:
    N: int
    n: int
    kappa: float
    sigma: float = 0.0
    p_values: tuple[int, ...] = ()
    replicates: int = 20
    seed: int = 0
    theta_draws: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p_values", tuple(int(p) for p in self.p_values))
        if not 1 <= self.n < self.N:
            raise DomainError(f"need 1 <= n < N, got n={self.n}, N={self.N}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma}")
        if self.replicates < 1:
            raise DomainError(f"replicates must be positive, got {self.replicates}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.theta_draws < 0:
            raise DomainError(f"theta_draws must be non-negative, got {self.theta_draws}")
        for p in self.p_values:
            if not 0 <= p <= self.N:
                raise DomainError(f"p must lie in [0, N], got {p}")

    @property
    def beta(self) -> float:
        return self.n / self.N


@dataclass(frozen=True)
class RiskEstimate:
    p: int
    mean: float
    stderr: float
    sampled_mean: float | None = None
    sampled_stderr: float | None = None
    failures: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class SpectrumReport:
    p: int
    ks_distance: float


def make_sigma(N: int, kappa: float) -> np.ndarray:
    """Population eigenvalues ``1, 2**-kappa, ..., N**-kappa``."""
    if N < 1 or not kappa > 0:
        raise DomainError(f"need N >= 1 and kappa > 0, got N={N}, kappa={kappa}")
    return np.arange(1, N + 1, dtype=float) ** (-float(kappa))


def replicate_rng(seed: int, replicate_index: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for one replicate; ``stream`` separates uses."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replicate_index, stream))))


def sample_design(config: SimConfig, replicate_index: int) -> np.ndarray:
    rng = replicate_rng(config.seed, replicate_index)
    scale = np.sqrt(make_sigma(config.N, config.kappa))
    return rng.standard_normal((config.n, config.N)) * scale


def _rank_cutoff(singular_values: np.ndarray, shape: tuple[int, int]) -> float:
    return singular_values[0] * max(shape) * np.finfo(float).eps if singular_values.size else 0.0


def _check_threshold(n: int, p: int, singular_values: np.ndarray, shape):
    if p == n:
        rank = int(np.sum(singular_values > _rank_cutoff(singular_values, shape)))
        warnings.warn(
            f"p = n = {n} sits at the interpolation threshold (effective rank {rank})",
            InterpolationThresholdWarning,
            stacklevel=3,
        )


def _check_rank(singular_values: np.ndarray, shape) -> None:
    rank = int(np.sum(singular_values > _rank_cutoff(singular_values, shape)))
    if rank < min(shape):
        raise DegenerateDesignError(f"selected design is rank deficient: rank {rank} < {min(shape)}")


def pcr_fit(X: np.ndarray, y: np.ndarray, p: int) -> np.ndarray:
    """PCR coefficients using the first ``p`` columns of ``X``.

    ``y`` may hold several responses as columns; the result then has one
    coefficient column per response.  Least squares for ``p <= n``,
    minimum-norm interpolation for ``p > n``; both come out of the same
    SVD-based solve.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, N = X.shape
    if not 0 <= p <= N:
        raise DomainError(f"p must lie in [0, {N}], got {p}")
    if y.shape[0] != n:
        raise DomainError(f"y has {y.shape[0]} rows, design has {n}")
    theta = np.zeros((N,) + y.shape[1:])
    if p == 0:
        return theta
    XP = X[:, :p]
    coef, _, _, sv = scipy.linalg.lstsq(XP, y, lapack_driver="gelsd")
    _check_rank(sv, XP.shape)
    _check_threshold(n, p, sv, XP.shape)
    theta[:p] = coef
    return theta


def conditional_risk(X: np.ndarray, p: int, kappa: float, sigma: float = 0.0) -> float:
    """Exact ``E[Error | X]`` over ``theta ~ N(0, I)`` and noise ``N(0, sigma^2)``.

    With ``A = X_P^+`` (the least-squares map for ``p <= n``, the min-norm map
    ``X_P^T (X_P X_P^T)^{-1}`` for ``p > n``)::

        tr(Sigma_P (I - A X_P)) + ||Sigma_P^{1/2} A X_Pc||_F^2 + tr(Sigma_Pc)
            + sigma^2 (||Sigma_P^{1/2} A||_F^2 + 1)

    The first term vanishes when ``p <= n``.  Nothing ``N x N`` is formed.
    """
    X = np.asarray(X, dtype=float)
    n, N = X.shape
    if not 0 <= p <= N:
        raise DomainError(f"p must lie in [0, {N}], got {p}")
    lam = make_sigma(N, kappa)
    tail = float(lam[p:].sum())
    if p == 0:
        return tail + sigma**2
    lam_p = lam[:p]
    XP = X[:, :p]
    U, s, Vt = np.linalg.svd(XP, full_matrices=False)
    _check_rank(s, XP.shape)
    _check_threshold(n, p, s, XP.shape)
    # G = V^T Sigma_P V in the row space of X_P
    G = (Vt * lam_p) @ Vt.T
    inv_s = 1.0 / s

    if p > n:
        projected = float(np.einsum("ij,ij,j->", Vt, Vt, lam_p))
        bias_p = max(float(lam_p.sum()) - projected, 0.0)
    else:
        bias_p = 0.0

    if p < N:
        B = inv_s[:, None] * (U.T @ X[:, p:])
        leak = float(np.sum((G @ B) * B))
    else:
        leak = 0.0

    noise = float(np.sum(np.diag(G) * inv_s**2))
    return bias_p + leak + tail + sigma**2 * (noise + 1.0)


def sampled_risk(
    X: np.ndarray,
    p: int,
    kappa: float,
    sigma: float,
    draws: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo estimate of :func:`conditional_risk` by drawing theta and noise.

    Returns ``(mean, standard error)`` over ``draws`` samples.
    """
    if draws < 2:
        raise DomainError(f"draws must be at least 2, got {draws}")
    X = np.asarray(X, dtype=float)
    n, N = X.shape
    lam = make_sigma(N, kappa)
    theta = rng.standard_normal((N, draws))
    y = X @ theta
    if sigma > 0:
        y += sigma * rng.standard_normal((n, draws))
    theta_hat = pcr_fit(X, y, p)
    errors = sigma**2 + lam @ (theta_hat - theta) ** 2
    return float(errors.mean()), float(errors.std(ddof=1) / math.sqrt(draws))


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values)
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), stderr


def _run_replicate(config: SimConfig, index: int):
    X = sample_design(config, index)
    rng = replicate_rng(config.seed, index, stream=1)
    out = []
    for p in config.p_values:
        try:
            risk = conditional_risk(X, p, config.kappa, config.sigma)
            sampled = None
            if config.theta_draws:
                sampled = sampled_risk(X, p, config.kappa, config.sigma, config.theta_draws, rng)
            out.append((risk, sampled, None))
        except (PCRRiskError, np.linalg.LinAlgError) as exc:
            out.append((None, None, f"replicate {index}: {exc}"))
    return out


def mc_curve(config: SimConfig, n_jobs: int = 1) -> list[RiskEstimate]:
    """Average conditional risk over independent designs for every ``p``.

    Replicates may run on ``n_jobs`` threads; aggregation follows replicate
    order so the output does not depend on scheduling.  Failures are kept
    in ``RiskEstimate.failures`` instead of being dropped.
    """
    indices = range(config.replicates)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(lambda i: _run_replicate(config, i), indices))
    else:
        results = [_run_replicate(config, i) for i in indices]

    estimates = []
    for k, p in enumerate(config.p_values):
        column = [rep[k] for rep in results]
        risks = [r for r, _, err in column if err is None]
        failures = tuple(err for _, _, err in column if err is not None)
        mean, stderr = _mean_stderr(risks)
        s_mean = s_err = None
        if config.theta_draws:
            sampled = [s for _, s, err in column if err is None]
            if sampled:
                s_mean = float(np.mean([m for m, _ in sampled]))
                s_err = float(math.sqrt(sum(e * e for _, e in sampled)) / len(sampled))
        estimates.append(RiskEstimate(p, mean, stderr, s_mean, s_err, failures))
    return estimates


def empirical_spectrum(p: int, N: int, kappa: float) -> SpectrumReport:
    """KS distance between ``{(N/j)**kappa : j <= p}`` and its limiting law.

    The limit with ``alpha = p/N`` has survival ``t**(-1/kappa) / alpha`` for
    ``t >= alpha**-kappa``.
    """
    if not 1 <= p <= N:
        raise DomainError(f"need 1 <= p <= N, got p={p}, N={N}")
    alpha = p / N
    values = np.sort((N / np.arange(1, p + 1, dtype=float)) ** kappa)
    survival = np.minimum(1.0, values ** (-1.0 / kappa) / alpha)
    cdf = 1.0 - survival
    i = np.arange(1, p + 1)
    ks = max(float(np.max(i / p - cdf)), float(np.max(cdf - (i - 1) / p)))
    return SpectrumReport(p, min(max(ks, 0.0), 1.0))


def empirical_stieltjes(
    X: np.ndarray, p: int, kappa: float, N: int | None = None, mu: float = 0.0
) -> tuple[float, float]:
    """Empirical companion Stieltjes transform and its derivative at ``z = -mu``.

    Uses the eigenvalues of ``(1/n) X~ X~^T`` with ``X~ = N**(kappa/2) X_P``.
    The default ``mu = 0`` evaluates exactly at zero.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    N = X.shape[1] if N is None else N
    if not n < p <= X.shape[1]:
        raise DomainError(f"empirical_stieltjes needs n < p <= N, got n={n}, p={p}")
    XP = X[:, :p] * float(N) ** (kappa / 2.0)
    eig = np.linalg.eigvalsh(XP @ XP.T / n)
    if eig[0] <= 0:
        raise DegenerateDesignError(f"non-positive eigenvalue {eig[0]} in the sample companion matrix")
    shifted = eig + mu
    return float(np.mean(1.0 / shifted)), float(np.mean(1.0 / shifted**2))


def wishart_trace_check(n: int, p: int, rng: np.random.Generator) -> tuple[float, float]:
    """``(n/p) tr(W^-1)`` and ``(n^2/p) tr(W^-2)`` for ``W = Xbar^T Xbar``."""
    if not 1 <= p < n:
        raise DomainError(f"need 1 <= p < n, got p={p}, n={n}")
    Xbar = rng.standard_normal((n, p))
    eig = np.linalg.eigvalsh(Xbar.T @ Xbar)
    if eig[0] <= 0:
        raise DegenerateDesignError("sampled Wishart matrix is singular")
    return float(n / p * np.sum(1.0 / eig)), float(n * n / p * np.sum(1.0 / eig**2))


def tail_trace_bounds(N: int, p: int, kappa: float) -> tuple[float, float, float]:
    """Integral sandwich around ``N**(kappa-1) * tr(Sigma_Pc)``.

    Returns ``(lower, exact, upper)``; requires ``1 <= p < N``.
    """
    if not 1 <= p < N:
        raise DomainError(f"need 1 <= p < N, got p={p}, N={N}")
    exact = N ** (kappa - 1.0) * float(make_sigma(N, kappa)[p:].sum())
    lower = power_integral((p + 1) / N, 1.0, -kappa)
    upper = power_integral(p / N, 1.0, -kappa)
    return lower, exact, upper
