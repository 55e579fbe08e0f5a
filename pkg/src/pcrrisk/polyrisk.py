"""Asymptotic PCR risk when the population eigenvalues decay as ``j**-kappa``.

``alpha = p/N`` is the fraction of retained components and ``beta = n/N`` the
sample fraction.  Below the interpolation threshold (``alpha < beta``) the
risk is a closed-form integral; above it the risk depends on the companion
Stieltjes transform at zero, obtained from the scalar fixed point solved in
:func:`fixed_point`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .exceptions import DomainError, SolverError
from .numkernel import (
    DEFAULT_TOL,
    TIGHT_QUAD,
    TIGHT_ROOT,
    Tolerance,
    find_root,
    power_integral,
    tail_ratio_integral,
)

DEFAULT_EXCLUSION = 0.01
_MAX_SHRINK = 60


@dataclass(frozen=True)
class PolyModel:
    """Problem instance: decay exponent, sample ratio, dimension, noise sd."""

    kappa: float
    beta: float
    N: int = 1000
    sigma: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.beta < 1:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma}")

    @property
    def scale(self) -> float:
        """The ``N**(1-kappa)`` factor multiplying every misspecification term."""
        return float(self.N) ** (1.0 - self.kappa)


@dataclass(frozen=True)
class FixedPoint:
    """Solution of the companion equation at ``z = 0`` for a given alpha."""

    s_star: float
    m0: float
    m0_prime: float
    alpha: float


class Regime(str, Enum):
    UNDER = "Under"
    OVER = "Over"
    EXCLUDED = "Excluded"


@dataclass(frozen=True)
class RiskPoint:
    alpha: float
    risk: float  # nan for excluded points
    regime: Regime


@dataclass(frozen=True)
class Comparison:
    """Best under-parameterized risk against the risk at ``alpha = 1``."""

    alpha_star: float
    risk_at_alpha_star: float
    risk_at_one: float
    s_star: float
    interpolation_wins: bool
    verdict: str


def _noise_dominated(model: PolyModel) -> bool:
    return model.sigma > 0 and model.kappa > 1


def h_kappa(model: PolyModel, alpha: float) -> float:
    """Sign function whose root is the optimal ``alpha`` below the threshold.

    The noise shifts it by ``-sigma**2`` only in the borderline case
    ``kappa == 1``.
    """
    if not 0 < alpha <= model.beta:
        raise DomainError(f"h_kappa needs 0 < alpha <= beta, got alpha={alpha}")
    value = model.beta / alpha - power_integral(alpha, 1.0, model.kappa - 2.0) - 1.0
    if model.sigma > 0 and model.kappa == 1:
        value -= model.sigma**2
    return value


def alpha_star(model: PolyModel, tol: Tolerance = DEFAULT_TOL) -> float:
    """Risk-minimizing ``alpha`` over ``[0, beta)``."""
    if _noise_dominated(model):
        return 0.0
    # h -> +inf as alpha -> 0+ and h(beta) < 0, so only the left end needs search
    lo = 1e-3 * model.beta
    for _ in range(_MAX_SHRINK):
        if h_kappa(model, lo) > 0:
            break
        lo *= 0.5
    else:
        raise SolverError("could not bracket the root of h_kappa near alpha = 0")
    return find_root(lambda a: h_kappa(model, a), lo, model.beta, tol)


def misspecification_integral(model: PolyModel, alpha: float) -> float:
    """``int_alpha^1 t**-kappa dt`` with the ``p = o(N)`` reading at alpha = 0."""
    if alpha > 0:
        return power_integral(alpha, 1.0, -model.kappa)
    if model.kappa > 1:
        return 0.0
    if model.kappa < 1:
        return 1.0 / (1.0 - model.kappa)
    raise DomainError("alpha = 0 is undefined for kappa = 1 (the tail grows like log N/p)")


def risk_under(model: PolyModel, alpha: float) -> float:
    """Asymptotic risk for ``0 <= alpha < beta``."""
    if not 0 <= alpha < model.beta:
        raise DomainError(f"risk_under needs 0 <= alpha < beta, got alpha={alpha}")
    tail = model.scale * misspecification_integral(model, alpha)
    return (tail + model.sigma**2) * model.beta / (model.beta - alpha)


def q_kappa(model: PolyModel, s: float, alpha: float, tol: Tolerance = DEFAULT_TOL) -> float:
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    if not model.beta < alpha <= 1:
        raise DomainError(f"q_kappa needs beta < alpha <= 1, got alpha={alpha}")
    return model.beta / s - alpha * tail_ratio_integral(s, model.kappa, tol)


def q_kappa_stationary_point(model: PolyModel, alpha: float) -> float:
    """Minimizer of ``q_kappa(., alpha)``; the root lies to its left."""
    return (model.beta / (alpha - model.beta)) ** (1.0 / model.kappa)


def _solve_s(model: PolyModel, alpha: float, z: float, quad_tol: Tolerance) -> float:
    # -z = q(s, alpha) / (beta * alpha * m**(1 - 1/kappa)) with m = (alpha s)**kappa
    kappa, beta = model.kappa, model.beta

    def g(s):
        q = q_kappa(model, s, alpha, quad_tol)
        if z == 0:
            return q
        return q + z * beta * alpha * (alpha * s) ** (kappa - 1.0)

    hi = q_kappa_stationary_point(model, alpha)
    lo = 0.5 * hi
    for _ in range(200):
        if g(lo) > 0:
            break
        lo *= 0.5
    else:
        raise SolverError(f"could not bracket the fixed point at alpha={alpha}")
    return find_root(g, lo, hi, TIGHT_ROOT)


def fixed_point(model: PolyModel, alpha: float, quad_tol: Tolerance = TIGHT_QUAD) -> FixedPoint:
    """Solve for ``s*``, ``m(0)`` and ``m'(0)`` at ``beta < alpha <= 1``."""
    if not model.beta < alpha <= 1:
        raise DomainError(f"fixed_point needs beta < alpha <= 1, got alpha={alpha}")
    kappa, beta = model.kappa, model.beta
    s = _solve_s(model, alpha, 0.0, quad_tol)
    sk = s**kappa
    m0 = (alpha * s) ** kappa
    m0_prime = kappa * beta * m0**2 * (1.0 + sk) / (beta + (beta - alpha) * sk)
    return FixedPoint(s_star=s, m0=m0, m0_prime=m0_prime, alpha=alpha)


def stieltjes_at(model: PolyModel, alpha: float, z: float, quad_tol: Tolerance = TIGHT_QUAD) -> float:
    """Limiting companion Stieltjes transform ``m(z)`` for ``z <= 0``."""
    if z > 0:
        raise DomainError(f"only z <= 0 is supported, got z={z}")
    if not model.beta < alpha <= 1:
        raise DomainError(f"stieltjes_at needs beta < alpha <= 1, got alpha={alpha}")
    s = _solve_s(model, alpha, z, quad_tol)
    return (alpha * s) ** model.kappa


def risk_over(model: PolyModel, alpha: float, fp: FixedPoint | None = None) -> float:
    """Asymptotic risk for ``beta < alpha <= 1``."""
    if not model.beta < alpha <= 1:
        raise DomainError(f"risk_over needs beta < alpha <= 1, got alpha={alpha}")
    if fp is None or fp.alpha != alpha:
        fp = fixed_point(model, alpha)
    tail = model.scale * power_integral(alpha, 1.0, -model.kappa)
    return model.scale * model.beta / fp.m0 + (tail + model.sigma**2) * fp.m0_prime / fp.m0**2


def risk(model: PolyModel, alpha: float) -> float:
    """Dispatch to :func:`risk_under` or :func:`risk_over`."""
    if alpha < model.beta:
        return risk_under(model, alpha)
    if alpha > model.beta:
        return risk_over(model, alpha)
    raise DomainError("the asymptotic risk diverges at alpha = beta")


def compare(model: PolyModel) -> Comparison:
    """Compare the optimal under-parameterized risk with ``alpha = 1``."""
    a_star = alpha_star(model)
    r_star = risk_under(model, a_star)
    fp_one = fixed_point(model, 1.0)
    r_one = risk_over(model, 1.0, fp_one)
    wins = r_one < r_star
    if _noise_dominated(model):
        verdict = f"noise dominated: minimum risk sigma^2={model.sigma**2:.9g} at alpha=0"
    elif wins:
        verdict = "interpolating regime wins"
    else:
        verdict = "under-parameterized regime wins"
    return Comparison(
        alpha_star=a_star,
        risk_at_alpha_star=r_star,
        risk_at_one=r_one,
        s_star=fp_one.s_star,
        interpolation_wins=wins,
        verdict=verdict,
    )


def classify(alpha: float, beta: float, exclusion: float = DEFAULT_EXCLUSION) -> Regime:
    if abs(alpha - beta) < exclusion:
        return Regime.EXCLUDED
    return Regime.UNDER if alpha < beta else Regime.OVER


def risk_curve(
    model: PolyModel, alpha_grid: Iterable[float], exclusion: float = DEFAULT_EXCLUSION
) -> list[RiskPoint]:
    """Evaluate the risk on a grid, skipping a band around ``alpha = beta``.

    A grid point at ``alpha = 0`` with ``kappa = 1`` has no defined risk and
    is returned as nan.
    """
    if not exclusion > 0:
        raise DomainError(f"exclusion must be positive, got {exclusion}")
    points = []
    for alpha in sorted(float(a) for a in alpha_grid):
        if not 0 <= alpha <= 1:
            raise DomainError(f"alpha grid values must lie in [0, 1], got {alpha}")
        regime = classify(alpha, model.beta, exclusion)
        if regime is Regime.EXCLUDED:
            value = math.nan
        elif regime is Regime.UNDER:
            value = math.nan if alpha == 0 and model.kappa == 1 else risk_under(model, alpha)
        else:
            value = risk_over(model, alpha)
        points.append(RiskPoint(alpha, value, regime))
    return points
