"""Asymptotic PCR risk under a general limiting spectral density.

Components are selected by thresholding the rescaled eigenvalues
``c_N * lambda_j >= nu``.  ``nu_b`` is the threshold at which the number of
selected components matches the sample size; larger thresholds are the
under-parameterized regime, smaller ones the interpolating regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .densities import DensitySpec
from .exceptions import DomainError, SolverError
from .numkernel import DEFAULT_TOL, TIGHT_ROOT, Tolerance, find_root

_MAX_DOUBLINGS = 200
_NU_CAP_DOUBLINGS = 40


@dataclass(frozen=True)
class GeneralModel:
    spec: DensitySpec
    beta: float
    N: int = 1000
    c_N: float = 1.0
    sigma: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        if not 0 < self.beta < self.spec.delta:
            raise DomainError(f"beta must lie in (0, delta={self.spec.delta}), got {self.beta}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")
        if not self.c_N > 0:
            raise DomainError(f"c_N must be positive, got {self.c_N}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma}")
        if not self.nu >= 0:
            raise DomainError(f"nu must be non-negative, got {self.nu}")

    @property
    def scale(self) -> float:
        return self.N / self.c_N

    @property
    def nu_eff(self) -> float:
        """Threshold with everything below the support edge mapped to ``eta1``."""
        return max(self.nu, self.spec.eta1)

    def with_nu(self, nu: float) -> "GeneralModel":
        return replace(self, nu=nu)


@dataclass(frozen=True)
class GeneralFixedPoint:
    s_star_f: float
    nu: float


@dataclass(frozen=True)
class NuStar:
    """Optimal threshold below the interpolation threshold.

    ``nu_star`` is None when the infimum is only approached as ``nu -> inf``.
    """

    nu_star: float | None
    min_risk: float

    @property
    def at_infinity(self) -> bool:
        return self.nu_star is None


@dataclass(frozen=True)
class GeneralComparison:
    risk_at_eta1: float
    best_under: NuStar
    s_star_f: float
    interpolation_wins: bool


def alpha_of_nu(spec: DensitySpec, nu: float) -> float:
    """Limiting fraction ``p/N`` of components selected by threshold ``nu``."""
    if not nu >= 0:
        raise DomainError(f"nu must be non-negative, got {nu}")
    return spec.delta * spec.family.survival(max(nu, spec.eta1))


def nu_b(model: GeneralModel, tol: Tolerance = DEFAULT_TOL) -> float:
    """Threshold at which ``alpha(nu) = beta``."""
    spec = model.spec
    g = lambda nu: spec.delta * spec.family.survival(nu) - model.beta
    hi = 2.0 * spec.eta1
    for _ in range(_MAX_DOUBLINGS):
        if hi >= spec.eta2:
            hi = spec.eta2
            break
        if g(hi) < 0:
            break
        hi *= 2.0
    else:
        raise SolverError("could not bracket nu_b")
    return find_root(g, spec.eta1, hi, tol)


def h_f(model: GeneralModel, nu: float) -> float:
    spec = model.spec
    if nu < spec.eta1:
        raise DomainError(f"h_f needs nu >= eta1={spec.eta1}, got {nu}")
    fam = spec.family
    return nu * model.beta - nu * spec.delta * fam.survival(nu) - spec.delta * fam.partial_moment(nu)


def nu_star(model: GeneralModel, tol: Tolerance = DEFAULT_TOL) -> NuStar:
    """Minimize the noiseless under-parameterized risk over ``nu > nu_b``.

    ``h_f`` is increasing on the support, negative at ``nu_b``; either it
    crosses zero (a unique minimizer) or the risk decreases all the way to
    its limit at the right edge of the support.
    """
    if model.sigma != 0:
        raise DomainError("nu_star is only defined for sigma = 0")
    spec = model.spec
    lo = nu_b(model)
    h = lambda nu: h_f(model, nu)
    if math.isfinite(spec.eta2):
        hi = spec.eta2
        if h(hi) < -tol.abs_tol:
            return NuStar(None, model.scale * spec.delta * spec.family.partial_moment(spec.eta2))
        if h(hi) <= tol.abs_tol:
            return NuStar(hi, model.scale * model.beta * hi)
    else:
        hi = 2.0 * lo
        cap = spec.eta1 * 2.0**_NU_CAP_DOUBLINGS
        while h(hi) <= 0:
            if hi >= cap:
                return NuStar(None, model.scale * spec.delta * spec.family.mean())
            hi = min(2.0 * hi, cap)
    root = find_root(h, lo, hi, tol)
    return NuStar(root, model.scale * model.beta * root)


def _under_denominator(model: GeneralModel) -> float:
    return model.beta - model.spec.delta * model.spec.family.survival(model.nu_eff)


def risk_under_general(model: GeneralModel) -> float:
    denom = _under_denominator(model)
    if not denom > 0:
        raise DomainError(f"nu={model.nu} is not above nu_b (alpha(nu) >= beta)")
    spec = model.spec
    tail = model.scale * spec.delta * spec.family.partial_moment(model.nu_eff)
    return (tail + model.sigma**2) * model.beta / denom


def _check_over(model: GeneralModel):
    if not _under_denominator(model) < 0:
        raise DomainError(f"nu={model.nu} is not below nu_b (alpha(nu) <= beta)")


def q_f(model: GeneralModel, s: float) -> float:
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    _check_over(model)
    spec = model.spec
    return s * model.beta - s * spec.delta * spec.family.weighted_tail(s, model.nu_eff)


def fixed_point_general(model: GeneralModel) -> GeneralFixedPoint:
    """Unique positive root of ``q_f(., nu)``, found through increasing ``q_f/s``."""
    _check_over(model)
    spec, nu = model.spec, model.nu_eff
    g = lambda s: model.beta - spec.delta * spec.family.weighted_tail(s, nu)
    lo = hi = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if g(lo) < 0:
            break
        lo *= 0.5
    else:
        raise SolverError("could not find s with q_f(s)/s < 0")
    for _ in range(_MAX_DOUBLINGS):
        if g(hi) > 0:
            break
        hi *= 2.0
    else:
        raise SolverError("could not find s with q_f(s)/s > 0")
    return GeneralFixedPoint(find_root(g, lo, hi, TIGHT_ROOT), model.nu)


def risk_over_general(model: GeneralModel, fp: GeneralFixedPoint | None = None) -> float:
    _check_over(model)
    if fp is None:
        fp = fixed_point_general(model)
    spec, nu, s = model.spec, model.nu_eff, fp.s_star_f
    tail = model.scale * spec.delta * spec.family.partial_moment(nu)
    variance = spec.delta * s * spec.family.weighted_tail2(s, nu)
    return model.scale * model.beta * s + model.beta * (tail + model.sigma**2) / variance


def risk_general(model: GeneralModel) -> float:
    """Dispatch on which side of ``nu_b`` the model's threshold lies."""
    denom = _under_denominator(model)
    if denom > 0:
        return risk_under_general(model)
    if denom < 0:
        return risk_over_general(model)
    raise DomainError("the asymptotic risk diverges at nu = nu_b")


def compare_general(model: GeneralModel) -> GeneralComparison:
    """Risk when keeping every positive-eigenvalue component versus the best ``nu > nu_b``."""
    at_edge = model.with_nu(model.spec.eta1)
    fp = fixed_point_general(at_edge)
    r_edge = risk_over_general(at_edge, fp)
    best = nu_star(model)
    return GeneralComparison(
        risk_at_eta1=r_edge,
        best_under=best,
        s_star_f=fp.s_star_f,
        interpolation_wins=r_edge < best.min_risk,
    )
