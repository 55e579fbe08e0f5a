"""Scalar numerical primitives used by the risk formulas.

Closed-form power integrals, the tail integral appearing in the companion
fixed point, adaptive quadrature and bracketed root finding.  Quadrature and
root finding delegate to QUADPACK / Brent through scipy; this module only
adds input checks and a uniform error vocabulary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from scipy import integrate, optimize

from .exceptions import BracketError, ConvergenceError, DomainError

# brentq refuses rtol below 4 * machine epsilon
_BRENT_MIN_RTOL = 4.0 * 2.220446049250313e-16
_LOG_BRANCH = 1e-12


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative accuracy targets and an iteration budget."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol >= 0:
            raise DomainError(f"rel_tol must be non-negative, got {self.rel_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter}")


DEFAULT_TOL = Tolerance()
# Used where a root feeds a finite difference or a 1e-10 identity check.
TIGHT_QUAD = Tolerance(abs_tol=1e-14, rel_tol=1e-13, max_iter=400)
TIGHT_ROOT = Tolerance(abs_tol=1e-300, rel_tol=_BRENT_MIN_RTOL, max_iter=400)


def power_integral(a: float, b: float, exponent: float) -> float:
    """Integral of ``t**exponent`` over ``[a, b]`` in closed form.

    Switches to ``log(b / a)`` when ``exponent`` is within 1e-12 of -1.
    ``a = 0`` is only accepted for integrable exponents (> -1).
    """
    if not (0 <= a <= b):
        raise DomainError(f"need 0 <= a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    e1 = exponent + 1.0
    if a == 0 and e1 <= _LOG_BRANCH:
        raise DomainError(f"integral of t^{exponent} diverges at 0")
    if abs(e1) < _LOG_BRANCH:
        return math.log(b / a)
    return (b**e1 - a**e1) / e1


def adaptive_quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOL,
    points: Sequence[float] | None = None,
) -> float:
    """Integrate ``f`` over the finite interval ``[a, b]``.

    Raises ConvergenceError (carrying the estimate) when the subdivision
    budget runs out before the error estimate meets ``tol``.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("adaptive_quad needs a finite interval; transform first")
    if a > b:
        raise DomainError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    if points is not None:
        points = [p for p in points if a < p < b] or None
    out = integrate.quad(
        f,
        a,
        b,
        epsabs=tol.abs_tol,
        epsrel=tol.rel_tol,
        limit=int(tol.max_iter),
        points=points,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    # a fourth element is only present when QUADPACK flagged a problem
    if len(out) > 3 and abserr > max(tol.abs_tol, tol.rel_tol * abs(value)):
        raise ConvergenceError(
            f"quadrature on [{a}, {b}] did not converge: {out[3]}", estimate=value
        )
    return float(value)


def tail_ratio_integral(s: float, kappa: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Integral of ``t**(kappa-2) / (1 + t**kappa)`` over ``[s, inf)``.

    Evaluated as the integral of ``1 / (1 + u**kappa)`` over ``[0, 1/s]``.
    """
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    upper = 1.0 / s
    return adaptive_quad(
        lambda u: 1.0 / (1.0 + u**kappa), 0.0, upper, tol, points=(1.0,) if upper > 1 else None
    )


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Root of ``f`` inside ``[lo, hi]`` by Brent's method.

    The iterate never leaves the bracket.  ``f(lo)`` and ``f(hi)`` must
    have strictly opposite signs unless one of them is exactly zero.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got lo={lo}, hi={hi}")
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if math.isnan(flo) or math.isnan(fhi) or (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    try:
        root, info = optimize.brentq(
            f,
            lo,
            hi,
            xtol=tol.abs_tol,
            rtol=max(tol.rel_tol, _BRENT_MIN_RTOL),
            maxiter=int(tol.max_iter),
            full_output=True,
            disp=False,
        )
    except RuntimeError as exc:  # pragma: no cover - disp=False should prevent this
        raise ConvergenceError(str(exc)) from exc
    if not info.converged:
        raise ConvergenceError(
            f"root search on [{lo}, {hi}] exceeded {tol.max_iter} iterations",
            estimate=root,
        )
    return float(root)
