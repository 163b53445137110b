"""Wright operators ``W_n^(beta)`` and their moments.

    W_n f(x) = sum_k f((k + beta)/n) w_k(x),
    w_k(x)   = (nx)^k / (k! Gamma(k + beta) phi_{1,beta}(nx)).

Moments are available two ways: the closed form in shifted Wright
functions (via a falling-factorial expansion of ``(k + beta)^j``) and a
brute-force weighted sum over the truncated weight distribution. The two
routes share nothing beyond the log-gamma kernel.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Callable, Optional

import numpy as np

from . import _kernels
from ._kernels import STATUS_OK
from .special_fn import (
    MAX_TERMS,
    MAX_TOL,
    SeriesConvergenceError,
    WrightParams,
    log_wright_phi_exact,
    wright_phi,
)

_EPS = np.finfo(float).eps

# k^m = sum_i S(m, i) k(k-1)...(k-i+1), Stirling numbers of the second kind
_STIRLING2 = (
    (1,),
    (0, 1),
    (0, 1, 1),
    (0, 1, 3, 1),
    (0, 1, 7, 6, 1),
)

# the two printed forms of the linear falling-factorial coefficient at j = 3
CUBIC_C1_CANDIDATES = {
    "1+3b+3b^2": lambda b: 1.0 + 3.0 * b + 3.0 * b * b,
    "1+3b+b^2": lambda b: 1.0 + 3.0 * b + b * b,
}


class CentralMomentSignError(ArithmeticError):
    """An even central moment came out clearly negative."""


@dataclass(frozen=True)
class OperatorConfig:
    n: int
    beta: float
    tol: float = 1e-12
    allow_small_beta: bool = False

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        lo = 0.0 if self.allow_small_beta else 1.0
        if not (math.isfinite(self.beta) and self.beta > lo):
            raise ValueError(f"beta must be > {lo:g}, got {self.beta!r}")
        if not (0 < self.tol <= MAX_TOL):
            raise ValueError(f"tol must lie in (0, {MAX_TOL}], got {self.tol!r}")

    @classmethod
    def exploratory(cls, n, beta, tol=1e-12):
        """Config that accepts any ``beta > 0`` (outside the operator's standing assumption)."""
        return cls(n, beta, tol, allow_small_beta=True)


def _spot_grid():
    return np.concatenate([np.linspace(0.0, 10.0, 1001), np.geomspace(10.0, 1e6, 400)])


@dataclass(frozen=True)
class TestFunction:
    """A function of quadratic growth, ``|f(x)| <= growth_constant (1 + x^2)``.

    ``eval`` must accept numpy arrays. The growth certificate is spot-checked
    on a dense grid at construction.
    """

    __test__ = False  # keep pytest from collecting this class

    label: str
    eval: Callable
    growth_constant: float
    second_derivative: Optional[Callable] = None
    check_growth: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if not self.growth_constant > 0:
            raise ValueError("growth_constant must be positive")
        if self.check_growth:
            xs = _spot_grid()
            ratio = np.abs(np.asarray(self.eval(xs), dtype=float)) / (1.0 + xs * xs)
            worst = float(np.max(ratio))
            if not worst <= self.growth_constant * (1 + 1e-12):
                raise ValueError(
                    f"{self.label}: |f(x)|/(1+x^2) reaches {worst:g} > "
                    f"growth_constant {self.growth_constant:g}")

    def __call__(self, x):
        return self.eval(x)


@dataclass(frozen=True)
class WeightDistribution:
    """Truncated weights ``w_0..w_K`` at ``x`` with certified tail bounds.

    ``tail_moment_bound`` bounds ``sum_{k>K} ((k+beta)/n)^moment_order w_k``.
    """

    x: float
    weights: np.ndarray
    sample_points: np.ndarray
    tail_mass_bound: float
    tail_second_moment_bound: float
    moment_order: int = 2
    tail_moment_bound: float = 0.0

    def __post_init__(self):
        self.weights.setflags(write=False)
        self.sample_points.setflags(write=False)

    @property
    def terms(self):
        return len(self.weights)


@lru_cache(maxsize=4096)
def _weights_cached(n, beta, tol, x, order):
    if x == 0.0:
        pts = np.array([beta / n])
        return WeightDistribution(0.0, np.array([1.0]), pts, 0.0, 0.0, order, 0.0)
    z = n * x
    log_norm = log_wright_phi_exact(beta, z)
    w, tail0, tail_hi, status = _kernels.operator_weights(
        math.log(z), float(beta), float(n), float(tol), int(order), log_norm, MAX_TERMS)
    if status != STATUS_OK:
        raise SeriesConvergenceError(
            f"weight tail not certified within {MAX_TERMS} terms (n={n}, beta={beta}, x={x})")
    pts = (np.arange(len(w), dtype=float) + beta) / n
    tail2 = tail_hi if order == 2 else tail0 + tail_hi
    return WeightDistribution(float(x), np.array(w), pts, float(tail0), float(tail2),
                              order, float(tail_hi))


def build_weights(config, x, moment_order=2):
    """Weights of ``W_n^(beta)`` at ``x``.

    The retained range ends at the first K where both the plain term ratio
    and the ratio augmented by ``((k+1+beta)/(k+beta))^moment_order`` are
    at most 1/2 and both geometric tails are at most ``config.tol``.
    """
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"x must be a finite number >= 0, got {x!r}")
    if moment_order < 2:
        raise ValueError("moment_order must be >= 2")
    return _weights_cached(config.n, float(config.beta), float(config.tol), x, int(moment_order))


def apply_operator(config, f, x, with_error=False):
    """``W_n^(beta)(f; x)`` over the retained weights.

    With ``with_error=True`` returns ``(value, bound)`` where the bound on the
    discarded tail is ``A_f (tail_mass + tail_second_moment)``.
    """
    wd = build_weights(config, x)
    fv = np.asarray(f(wd.sample_points), dtype=float)
    value = float(np.dot(fv, wd.weights))
    if with_error:
        return value, f.growth_constant * (wd.tail_mass_bound + wd.tail_second_moment_bound)
    return value


# --------------------------------------------------------------------------
# moments
# --------------------------------------------------------------------------

def falling_factorial_polynomials(j):
    """Integer coefficients (in ascending powers of beta) of each ``c_i(beta)``.

    ``(k + beta)^j = sum_i c_i(beta) k(k-1)...(k-i+1)``.
    """
    if j not in range(5):
        raise ValueError(f"falling-factorial expansion supported for j in 0..4, got {j!r}")
    polys = []
    for i in range(j + 1):
        coeffs = [0] * (j + 1)
        for m in range(i, j + 1):
            coeffs[j - m] += comb(j, m) * _STIRLING2[m][i]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        polys.append(coeffs)
    return polys


def falling_factorial_coeffs(j, beta):
    """``[c_0, ..., c_j]`` evaluated at ``beta``."""
    return [sum(c * beta ** p for p, c in enumerate(poly))
            for poly in falling_factorial_polynomials(j)]


@lru_cache(maxsize=4096)
def _phi_ratios(n, beta, tol, x):
    # R_i = phi_{1,beta+i}(nx) / phi_{1,beta}(nx) and relative tails eps_i
    z = n * x
    res = [wright_phi(WrightParams(1.0, beta + i), z, tol) for i in range(5)]
    ratios = tuple(math.exp(r.log_value - res[0].log_value) for r in res)
    eps = tuple(r.relative_tail for r in res)
    return ratios, eps


def _closed_form(config, j, x, coeffs=None):
    if j == 0:
        return 1.0, 0.0
    beta, n = float(config.beta), config.n
    if coeffs is None:
        coeffs = falling_factorial_coeffs(j, beta)
    ratios, eps = _phi_ratios(n, beta, float(config.tol), float(x))
    total = 0.0
    err = 0.0
    for i, c in enumerate(coeffs):
        term = c * x ** i * ratios[i] / n ** (j - i)
        total += term
        err += abs(term) * (eps[i] + eps[0] + 8 * _EPS)
    return total, err


def raw_moment_closed_form(config, j, x, coeffs=None, with_error=False):
    """``W_n(t^j; x)`` as ``n^-j sum_i c_i (nx)^i phi_{1,beta+i}(nx)/phi_{1,beta}(nx)``.

    ``coeffs`` overrides the falling-factorial coefficients (used to test
    alternative printed forms).
    """
    if j not in range(5):
        raise ValueError(f"raw moments supported for j in 0..4, got {j!r}")
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"x must be a finite number >= 0, got {x!r}")
    value, err = _closed_form(config, j, x, coeffs)
    return (value, err) if with_error else value


def raw_moment_series(config, j, x, with_error=False):
    """``sum_k ((k+beta)/n)^j w_k`` over weights truncated for order ``max(j, 2)``."""
    if j not in range(5):
        raise ValueError(f"raw moments supported for j in 0..4, got {j!r}")
    order = max(j, 2)
    wd = build_weights(config, x, moment_order=order)
    value = float(np.dot(wd.sample_points ** j, wd.weights))
    if j == 0:
        tail = wd.tail_mass_bound
    elif j == order:
        tail = wd.tail_moment_bound
    else:
        tail = wd.tail_mass_bound + wd.tail_moment_bound
    return (value, tail) if with_error else value


def _clamp_even(i, value, err):
    if i % 2 == 0 and value < 0:
        if value < -1e-10 - err:
            raise CentralMomentSignError(
                f"even central moment of order {i} is {value!r}; truncation bound broken")
        return 0.0
    return value


def central_moment(config, i, x, with_error=False):
    """``W_n((t - x)^i; x)`` from the closed-form raw moments."""
    if i not in range(1, 5):
        raise ValueError(f"central moments supported for i in 1..4, got {i!r}")
    x = float(x)
    total = 0.0
    err = 0.0
    scale = 0.0
    for r in range(i + 1):
        m, e = raw_moment_closed_form(config, r, x, with_error=True)
        w = comb(i, r) * (-x) ** (i - r)
        total += w * m
        err += abs(w) * e
        scale += abs(w * m)
    err += 8 * _EPS * scale
    total = _clamp_even(i, total, err)
    return (total, err) if with_error else total


def central_moment_series(config, i, x, with_error=False):
    """Direct ``sum_k ((k+beta)/n - x)^i w_k``; independent of the closed form."""
    if i not in range(1, 5):
        raise ValueError(f"central moments supported for i in 1..4, got {i!r}")
    x = float(x)
    order = max(i, 2)
    wd = build_weights(config, x, moment_order=order)
    value = float(np.dot((wd.sample_points - x) ** i, wd.weights))
    # |s - x|^i <= 2^(i-1) (s^i + x^i)
    tail = 2 ** (i - 1) * (wd.tail_mass_bound + wd.tail_moment_bound) * (1.0 + x ** i)
    return (value, tail) if with_error else value


def cubic_coefficient_check(config, x):
    """Relative error of the j=3 closed form against the series for each candidate ``c_1``.

    Returns a dict mapping candidate label to relative disagreement.
    """
    series = raw_moment_series(config, 3, x)
    beta = float(config.beta)
    base = falling_factorial_coeffs(3, beta)
    out = {}
    for label, c1 in CUBIC_C1_CANDIDATES.items():
        coeffs = [base[0], c1(beta), base[2], base[3]]
        closed = raw_moment_closed_form(config, 3, x, coeffs=coeffs)
        out[label] = abs(closed - series) / max(abs(series), 1e-300)
    return out
