"""Summability matrices, A-densities and finite-horizon A-statistical checks.

A-statistical limits are asymptotic statements. Everything here is a
desk-scale protocol: densities are evaluated along a finite schedule of
rows and the verdict only says whether the data are consistent with the
limit.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .operator_core import OperatorConfig, apply_operator, central_moment

CONSISTENT = "consistent-with-convergence"
NOT_CONSISTENT = "not-consistent"

DEFAULT_N_SCHEDULE = (100, 1000, 10000)
DEFAULT_X_GRID = (0.25, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class SummabilityMatrix:
    """Nonnegative infinite matrix accessed row by row.

    ``row_support(j)`` is the last column with a nonzero entry for the
    built-ins and the declared truncation horizon for custom matrices.
    ``regular`` is an attestation for custom matrices; it is not proved.
    """

    kind: str
    entry: Callable[[int, int], float]
    row_support: Callable[[int], Optional[int]]
    regular: bool = True

    def row_sum(self, j):
        if self.kind == "cesaro1":
            return 1.0
        if self.kind == "identity":
            return 1.0
        return math.fsum(self.entry(j, k) for k in range(1, self.row_support(j) + 1))


def cesaro1():
    return SummabilityMatrix("cesaro1", lambda j, k: 1.0 / j if k <= j else 0.0, lambda j: j)


def identity():
    return SummabilityMatrix("identity", lambda j, k: 1.0 if j == k else 0.0, lambda j: j)


def custom(entry, horizon, regular=False):
    """Matrix from an entry generator; ``horizon(j)`` (or an int) bounds each row."""
    support = horizon if callable(horizon) else (lambda j, h=int(horizon): h)

    def checked(j, k):
        v = float(entry(j, k))
        if v < 0:
            raise ValueError(f"matrix entry ({j}, {k}) is negative: {v!r}")
        return v

    return SummabilityMatrix("custom", checked, support, regular)


@dataclass(frozen=True)
class SequenceSpec:
    label: str
    term: Callable[[int], float]


def _check_row(A, j, horizon):
    if j < 1:
        raise ValueError(f"row index must be >= 1, got {j!r}")
    need = A.row_support(j)
    if horizon is None:
        horizon = need
    if A.kind in ("cesaro1", "identity") and horizon < need:
        raise ValueError(
            f"horizon {horizon} does not cover row {j} of the {A.kind} matrix (needs {need})")
    return min(horizon, need) if need is not None else horizon


def a_transform(A, s, j, horizon=None):
    """``(As)_j = sum_k a_jk s_k``, exact for finitely supported rows."""
    h = _check_row(A, j, horizon)
    if A.kind == "identity":
        return float(s.term(j))
    if A.kind == "cesaro1":
        return math.fsum(s.term(k) for k in range(1, j + 1)) / j
    return math.fsum(A.entry(j, k) * s.term(k) for k in range(1, h + 1))


def a_density(A, member, j, horizon=None):
    """A-density of ``{k : member(k)}`` at row ``j``."""
    h = _check_row(A, j, horizon)
    if A.kind == "identity":
        return 1.0 if member(j) else 0.0
    if A.kind == "cesaro1":
        return sum(1 for k in range(1, j + 1) if member(k)) / j
    return math.fsum(A.entry(j, k) for k in range(1, h + 1) if member(k))


@dataclass(frozen=True)
class AStatReport:
    densities: tuple  # ((j, d_j), ...)
    verdict: str
    threshold: float
    window: int


def astat_limit_estimate(A, s, L, eps, j_schedule, threshold=0.05, window=2):
    """Densities of the eps-exceptional set along ``j_schedule`` and a verdict.

    Consistent iff the last ``window`` densities are all below ``threshold``
    and do not increase across the window.
    """
    js = list(j_schedule)
    if not js or any(b <= a for a, b in zip(js, js[1:])):
        raise ValueError("j_schedule must be a non-empty increasing sequence")
    if eps <= 0:
        raise ValueError("eps must be positive")

    def exceptional(k):
        return abs(s.term(k) - L) >= eps

    dens = tuple((j, a_density(A, exceptional, j)) for j in js)
    tail = [d for _, d in dens[-window:]]
    ok = all(d < threshold for d in tail) and tail[-1] <= tail[0]
    return AStatReport(dens, CONSISTENT if ok else NOT_CONSISTENT, threshold, window)


# --------------------------------------------------------------------------
# limit experiments for the Wright operators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitEstimate:
    """Extrapolated limit of the last three values of a sequence.

    ``trend`` is "contracting" when successive differences shrink (Aitken
    delta-squared applied), otherwise the last value is reported as is.
    ``sensitivity`` holds d(value)/d(a_i) for the three inputs.
    """

    value: float
    trend: str
    sensitivity: tuple


def extrapolate(values):
    a = [float(v) for v in values]
    if len(a) < 3:
        return LimitEstimate(a[-1], "too-short", (0.0,) * (len(a) - 1) + (1.0,))
    a1, a2, a3 = a[-3:]
    d1, d2 = a2 - a1, a3 - a2
    if d2 == 0.0:
        return LimitEstimate(a3, "constant", (0.0, 0.0, 1.0))
    if abs(d2) < abs(d1):
        D = d2 - d1
        g = d2 * d2 / D
        g_d1 = d2 * d2 / (D * D)
        g_d2 = (d2 * d2 - 2.0 * d1 * d2) / (D * D)
        return LimitEstimate(a3 - g, "contracting", (g_d1, g_d2 - g_d1, 1.0 - g_d2))
    return LimitEstimate(a3, "not-contracting", (0.0, 0.0, 1.0))


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    x: float
    measured: float
    claimed: float
    error: float  # certified numerical error of ``measured``

    @property
    def deviation(self):
        return self.measured - self.claimed


@dataclass(frozen=True)
class ExperimentTable:
    beta: float
    rows: tuple  # ExperimentRow, n outer / x inner
    estimates: dict = field(default_factory=dict)  # x -> LimitEstimate
    claimed_constant: float = math.nan

    def column(self, x):
        return [r for r in self.rows if r.x == x]


def fourth_moment_constant(beta):
    """Claimed limit of ``n W_n((t-x)^4; x)``, as printed (no x dependence)."""
    b = beta
    return (4 * b + 6) / (b * (b + 1) * (b + 2)) + 18 / b + 12 + 4 * b


def voronovskaya_constant(beta):
    """Coefficient multiplying ``x f''(x)`` in the claimed Voronovskaya limit."""
    return (1 + 2 * beta + 2 * beta * beta) / (2 * beta)


def _check_schedule(n_schedule):
    ns = [int(n) for n in n_schedule]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_schedule must be a non-empty increasing sequence")
    return ns


def _with_estimates(beta, rows, xs, claimed_constant):
    est = {x: extrapolate([r.measured for r in rows if r.x == x]) for x in xs}
    return ExperimentTable(float(beta), tuple(rows), est, claimed_constant)


def fourth_moment_scaling_experiment(beta, x_grid=DEFAULT_X_GRID,
                                     n_schedule=DEFAULT_N_SCHEDULE, tol=1e-12):
    """Rows of ``n * W_n((t-x)^4; x)`` beside the claimed constant."""
    ns = _check_schedule(n_schedule)
    xs = [float(x) for x in x_grid]
    claimed = fourth_moment_constant(beta)
    rows = []
    for n in ns:
        cfg = OperatorConfig(n, beta, tol)
        for x in xs:
            mu4, err = central_moment(cfg, 4, x, with_error=True)
            rows.append(ExperimentRow(n, x, n * mu4, claimed, n * err))
    return _with_estimates(beta, rows, xs, claimed)


def voronovskaya_experiment(f, beta, x_grid=DEFAULT_X_GRID,
                            n_schedule=DEFAULT_N_SCHEDULE, tol=1e-12):
    """Rows of ``n (W_n f - f)(x)`` beside ``C(beta) x f''(x)``."""
    if f.second_derivative is None:
        raise ValueError(f"{f.label}: second derivative required")
    ns = _check_schedule(n_schedule)
    xs = [float(x) for x in x_grid]
    const = voronovskaya_constant(beta)
    rhs = {x: const * x * float(f.second_derivative(x)) for x in xs}
    rows = []
    for n in ns:
        cfg = OperatorConfig(n, beta, tol)
        for x in xs:
            wf, err = apply_operator(cfg, f, x, with_error=True)
            rows.append(ExperimentRow(n, x, n * (wf - float(f(x))), rhs[x], n * err))
    return _with_estimates(beta, rows, xs, const)
