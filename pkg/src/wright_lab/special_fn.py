"""Wright function, log-gamma and modified Bessel functions of the first kind.

Only real, nonnegative arguments and ``rho > 0`` are supported, so every
series term is positive and truncation can be certified by a geometric
majorant on the term ratio.
"""

import math
from dataclasses import dataclass

from . import _kernels
from ._kernels import STATUS_OK

DEFAULT_TOL = 1e-12
MAX_TERMS = 100_000
MAX_TOL = 1e-2


class SeriesConvergenceError(ArithmeticError):
    """The term ratio never dropped below 1/2 within ``MAX_TERMS`` terms."""


@dataclass(frozen=True)
class WrightParams:
    rho: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"rho must be a finite number > 0, got {self.rho!r}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be a finite number > 0, got {self.beta!r}")


@dataclass(frozen=True)
class SeriesResult:
    """Truncated positive series with an absolute tail bound.

    ``log_value`` is kept alongside ``value`` because the latter overflows
    for arguments beyond roughly ``z = 1.2e5`` at ``rho = 1``.
    """

    value: float
    terms_used: int
    tail_bound: float
    converged: bool
    log_value: float = 0.0
    relative_tail: float = 0.0


def _check_tol(tol):
    if not (0 < tol <= MAX_TOL):
        raise ValueError(f"tol must lie in (0, {MAX_TOL}], got {tol!r}")


def log_gamma(x):
    """Natural log of the gamma function for real ``x > 0``.

    Accurate to ``1e-13 * max(1, |ln Gamma(x)|)`` on ``[1e-3, 1e6]``.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise ValueError(f"log_gamma requires a finite x > 0, got {x!r}")
    return float(_kernels.lgamma_scalar(x))


def _positive_series(offset, log_a, rho, beta, tol, cap=MAX_TERMS):
    log_scale, scaled, K, scaled_tail, status = _kernels.series_log_sum(
        float(offset), float(log_a), float(rho), float(beta), float(tol), int(cap))
    if status != STATUS_OK:
        raise SeriesConvergenceError(
            f"series did not meet its stopping rule within {cap} terms "
            f"(rho={rho}, beta={beta}, log_a={log_a})")
    log_value = log_scale + math.log(scaled)
    return SeriesResult(
        value=math.exp(log_value) if log_value < 709.0 else math.inf,
        terms_used=int(K) + 1,
        tail_bound=math.exp(log_scale) * scaled_tail if log_value < 709.0 else math.inf,
        converged=True,
        log_value=log_value,
        relative_tail=scaled_tail / scaled,
    )


def wright_phi(params, z, tol=DEFAULT_TOL):
    """Sum ``z^k / (k! Gamma(rho k + beta))`` over k >= 0 with a tail certificate.

    Stops at the first K where the term ratio ``q_K <= 1/2`` and the
    geometric tail ``t_{K+1} / (1 - q_K)`` is at most ``tol`` times the
    running partial sum. The ratio is decreasing in k for ``rho > 0``, so
    the majorant is valid from any K.
    """
    _check_tol(tol)
    z = float(z)
    if not math.isfinite(z) or z < 0:
        raise ValueError(f"wright_phi requires a finite z >= 0, got {z!r}")
    if z == 0.0:
        lv = -log_gamma(params.beta)
        return SeriesResult(math.exp(lv), 1, 0.0, True, lv, 0.0)
    return _positive_series(0.0, math.log(z), params.rho, params.beta, tol)


def log_wright_phi_exact(beta, z):
    """``ln phi_{1,beta}(z)`` summed to machine precision (normalising constant)."""
    if z == 0.0:
        return -log_gamma(beta)
    return _positive_series(0.0, math.log(z), 1.0, beta, 1e-18).log_value


def bessel_I(nu, w, tol=DEFAULT_TOL):
    """Modified Bessel function ``I_nu(w) = sum (w/2)^(2k+nu) / (k! Gamma(k+nu+1))``."""
    _check_tol(tol)
    nu = float(nu)
    w = float(w)
    if not math.isfinite(nu) or nu < 0:
        raise ValueError(f"bessel_I requires nu >= 0, got {nu!r}")
    if not math.isfinite(w) or w < 0:
        raise ValueError(f"bessel_I requires w >= 0, got {w!r}")
    if w == 0.0:
        if nu == 0.0:
            return SeriesResult(1.0, 1, 0.0, True, 0.0)
        return SeriesResult(0.0, 1, 0.0, True, -math.inf)
    log_half = math.log(w / 2.0)
    return _positive_series(nu * log_half, 2.0 * log_half, 1.0, nu + 1.0, tol)


def bessel_identity_residual(m, z, tol=DEFAULT_TOL):
    """``phi_{1,m}(z) - z^{-(m-1)/2} I_{m-1}(2 sqrt z)``; zero up to rounding."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m!r}")
    if z <= 0:
        raise ValueError(f"z must be > 0, got {z!r}")
    lhs = wright_phi(WrightParams(1.0, m), z, tol)
    bes = bessel_I(m - 1.0, 2.0 * math.sqrt(z), tol)
    rhs = math.exp(bes.log_value - 0.5 * (m - 1.0) * math.log(z))
    return lhs.value - rhs


def mehrez_gap(alpha, beta, z, tol=DEFAULT_TOL):
    """``Gamma(beta) phi_{alpha,beta}(z) - Gamma(beta+alpha) phi_{alpha,beta+alpha}(z)``.

    Nonnegative for ``alpha, beta, z > 0``.
    """
    if alpha <= 0 or beta <= 0 or z <= 0:
        raise ValueError("mehrez_gap requires alpha, beta, z > 0")
    lo = wright_phi(WrightParams(alpha, beta), z, tol)
    hi = wright_phi(WrightParams(alpha, beta + alpha), z, tol)
    return (math.exp(log_gamma(beta) + lo.log_value)
            - math.exp(log_gamma(beta + alpha) + hi.log_value))

