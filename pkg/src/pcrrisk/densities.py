"""Limiting spectral densities for the general eigenvalue-decay model.

A :class:`DensitySpec` is the continuous part ``f`` of the limiting law of
``c_N * Sigma`` together with its mass ``delta``; the remaining ``1 - delta``
sits at zero and never enters an integral.  Every family exposes the same
five evaluators.  The base class computes them by quadrature (infinite tails
through ``u = 1/t``); families override them with closed forms where those
exist, and the generic versions stay available for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .exceptions import DomainError
from .numkernel import Tolerance, adaptive_quad, power_integral

DENSITY_TOL = Tolerance(abs_tol=1e-14, rel_tol=1e-12, max_iter=400)


class DensityFamily:
    """Density supported on ``[eta1, eta2]`` (``eta2`` may be ``inf``)."""

    name = "generic"

    def __init__(self, eta1: float, eta2: float):
        if not (eta1 > 0 and eta2 > eta1):
            raise DomainError(f"need 0 < eta1 < eta2, got eta1={eta1}, eta2={eta2}")
        self.eta1 = float(eta1)
        self.eta2 = float(eta2)

    def __repr__(self):
        return f"{type(self).__name__}(eta1={self.eta1!r}, eta2={self.eta2!r})"

    def pdf(self, t):
        raise NotImplementedError

    # generic quadrature evaluators ------------------------------------------

    def _integrate(self, g, lo: float, hi: float) -> float:
        lo, hi = max(lo, self.eta1), min(hi, self.eta2)
        if lo >= hi:
            return 0.0
        if math.isinf(hi):
            return adaptive_quad(lambda u: g(1.0 / u) / (u * u) if u > 0 else 0.0, 0.0, 1.0 / lo, DENSITY_TOL)
        return adaptive_quad(g, lo, hi, DENSITY_TOL)

    def quad_survival(self, nu: float) -> float:
        return self._integrate(self.pdf, nu, math.inf)

    def quad_partial_moment(self, nu: float) -> float:
        return self._integrate(lambda t: t * self.pdf(t), self.eta1, nu)

    def quad_weighted_tail(self, s: float, nu: float) -> float:
        return self._integrate(lambda t: t * self.pdf(t) / (s + t), nu, math.inf)

    def quad_weighted_tail2(self, s: float, nu: float) -> float:
        return self._integrate(lambda t: t * self.pdf(t) / (s + t) ** 2, nu, math.inf)

    # public evaluators; subclasses override with closed forms ----------------

    def survival(self, nu: float) -> float:
        """Mass of ``f`` on ``[nu, inf)``."""
        return self.quad_survival(nu)

    def partial_moment(self, nu: float) -> float:
        """First moment of ``f`` over ``[eta1, nu]``."""
        return self.quad_partial_moment(nu)

    def weighted_tail(self, s: float, nu: float) -> float:
        """Integral of ``t f(t) / (s + t)`` over ``[nu, inf)``."""
        return self.quad_weighted_tail(s, nu)

    def weighted_tail2(self, s: float, nu: float) -> float:
        """Integral of ``t f(t) / (s + t)**2`` over ``[nu, inf)``."""
        return self.quad_weighted_tail2(s, nu)

    def mean(self) -> float:
        return self.partial_moment(self.eta2)

    def params(self) -> dict:
        return {}


class InversePoly(DensityFamily):
    """Limit of the rescaled spectrum ``N**kappa * j**-kappa`` for ``j <= alpha2 N``.

    ``f(t) = t**(-1 - 1/kappa) / (kappa * alpha2)`` on ``[alpha2**-kappa, inf)``.
    """

    name = "inverse_poly"

    def __init__(self, kappa: float, alpha2: float = 1.0):
        if not kappa > 0:
            raise DomainError(f"kappa must be positive, got {kappa}")
        if not 0 < alpha2 <= 1:
            raise DomainError(f"alpha2 must lie in (0, 1], got {alpha2}")
        self.kappa = float(kappa)
        self.alpha2 = float(alpha2)
        super().__init__(alpha2 ** (-kappa), math.inf)

    def __repr__(self):
        return f"InversePoly(kappa={self.kappa!r}, alpha2={self.alpha2!r})"

    def params(self):
        return {"kappa": self.kappa, "alpha2": self.alpha2}

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= self.eta1, np.maximum(t, self.eta1) ** (-1.0 - 1.0 / self.kappa), 0.0)
        out = out / (self.kappa * self.alpha2)
        return out if out.ndim else float(out)

    def survival(self, nu):
        nu = max(nu, self.eta1)
        return nu ** (-1.0 / self.kappa) / self.alpha2

    def partial_moment(self, nu):
        if nu <= self.eta1:
            return 0.0
        if math.isinf(nu):
            if self.kappa >= 1:
                return math.inf
            return self.eta1 ** (1.0 - 1.0 / self.kappa) / (1.0 / self.kappa - 1.0) / (self.kappa * self.alpha2)
        return power_integral(self.eta1, nu, -1.0 / self.kappa) / (self.kappa * self.alpha2)

    # With t = u**-kappa both tails become smooth integrals over [0, nu**(-1/kappa)].
    def weighted_tail(self, s, nu):
        upper = max(nu, self.eta1) ** (-1.0 / self.kappa)
        k = self.kappa
        return adaptive_quad(lambda u: 1.0 / (1.0 + s * u**k), 0.0, upper, DENSITY_TOL) / self.alpha2

    def weighted_tail2(self, s, nu):
        upper = max(nu, self.eta1) ** (-1.0 / self.kappa)
        k = self.kappa
        return adaptive_quad(lambda u: u**k / (1.0 + s * u**k) ** 2, 0.0, upper, DENSITY_TOL) / self.alpha2


class Uniform(DensityFamily):
    name = "uniform"

    def __init__(self, eta1: float, eta2: float):
        if math.isinf(eta2):
            raise DomainError("uniform density needs a finite eta2")
        super().__init__(eta1, eta2)
        self.width = self.eta2 - self.eta1

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where((t >= self.eta1) & (t <= self.eta2), 1.0 / self.width, 0.0)
        return out if out.ndim else float(out)

    def _clip(self, nu):
        return min(max(nu, self.eta1), self.eta2)

    def survival(self, nu):
        return (self.eta2 - self._clip(nu)) / self.width

    def partial_moment(self, nu):
        nu = self._clip(nu)
        return (nu * nu - self.eta1**2) / (2.0 * self.width)

    def weighted_tail(self, s, nu):
        nu = self._clip(nu)
        return ((self.eta2 - nu) - s * math.log((s + self.eta2) / (s + nu))) / self.width

    def weighted_tail2(self, s, nu):
        nu = self._clip(nu)
        a, b = s + nu, s + self.eta2
        return (math.log(b / a) + s * (1.0 / b - 1.0 / a)) / self.width


class Pareto(DensityFamily):
    """``f(t) = a eta1**a t**(-a-1)`` on ``[eta1, inf)`` with tail index ``a``.

    Survival and partial moment are closed form; the weighted tails use the
    generic quadrature.
    """

    name = "pareto"

    def __init__(self, tail_index: float, eta1: float):
        if not tail_index > 0:
            raise DomainError(f"tail_index must be positive, got {tail_index}")
        self.tail_index = float(tail_index)
        super().__init__(eta1, math.inf)

    def __repr__(self):
        return f"Pareto(tail_index={self.tail_index!r}, eta1={self.eta1!r})"

    def params(self):
        return {"tail_index": self.tail_index}

    def pdf(self, t):
        a = self.tail_index
        t = np.asarray(t, dtype=float)
        out = np.where(t >= self.eta1, a * self.eta1**a * np.maximum(t, self.eta1) ** (-a - 1.0), 0.0)
        return out if out.ndim else float(out)

    def survival(self, nu):
        return (self.eta1 / max(nu, self.eta1)) ** self.tail_index

    def partial_moment(self, nu):
        a = self.tail_index
        if nu <= self.eta1:
            return 0.0
        if math.isinf(nu):
            return a * self.eta1 / (a - 1.0) if a > 1 else math.inf
        return a * self.eta1**a * power_integral(self.eta1, nu, -a)


@dataclass(frozen=True)
class DensitySpec:
    """Continuous part ``f`` of the limiting law and its mass ``delta``."""

    family: DensityFamily
    delta: float = 1.0

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise DomainError(f"delta must lie in (0, 1], got {self.delta}")

    @property
    def eta1(self) -> float:
        return self.family.eta1

    @property
    def eta2(self) -> float:
        return self.family.eta2

    def to_config(self) -> dict:
        return {
            "family": self.family.name,
            "delta": self.delta,
            "eta1": self.eta1,
            "eta2": None if math.isinf(self.eta2) else self.eta2,
            "params": self.family.params(),
        }

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> "DensitySpec":
        """Build from ``{family, delta, eta1, eta2, params}``.

        Raises DomainError naming the offending field.
        """
        if not isinstance(config, Mapping):
            raise DomainError("density spec must be an object")
        family = config.get("family")
        params = config.get("params") or {}
        if not isinstance(params, Mapping):
            raise DomainError("field 'params' must be an object")
        delta = _number(config, "delta", default=1.0)
        eta1 = config.get("eta1")
        eta2 = config.get("eta2")

        if family == "inverse_poly":
            fam = InversePoly(_number(params, "kappa", prefix="params."), _number(params, "alpha2", 1.0, "params."))
            if eta1 is not None and not math.isclose(_number(config, "eta1"), fam.eta1, rel_tol=1e-12):
                raise DomainError(f"field 'eta1' must equal alpha2**-kappa = {fam.eta1}")
            if eta2 is not None and not math.isinf(_number(config, "eta2")):
                raise DomainError("field 'eta2' must be null/inf for inverse_poly")
        elif family == "uniform":
            fam = Uniform(_number(config, "eta1"), _number(config, "eta2"))
        elif family == "pareto":
            fam = Pareto(_number(params, "tail_index", prefix="params."), _number(config, "eta1"))
            if eta2 is not None and not math.isinf(_number(config, "eta2")):
                raise DomainError("field 'eta2' must be null/inf for pareto")
        else:
            raise DomainError(f"field 'family' must be inverse_poly, uniform or pareto, got {family!r}")
        return cls(fam, delta)


def _number(obj: Mapping[str, Any], key: str, default: float | None = None, prefix: str = "") -> float:
    value = obj.get(key, default)
    if value is None:
        raise DomainError(f"missing field '{prefix}{key}'")
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"field '{prefix}{key}' must be a number, got {value!r}") from None
    if math.isnan(value):
        raise DomainError(f"field '{prefix}{key}' is nan")
    return value
