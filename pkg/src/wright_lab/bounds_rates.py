"""Stated bounds, moduli of continuity, approximation errors and the claim audit.

The audit measures each claimed quantity, evaluates the stated bound and
records the margin. It never presumes that a claim holds.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np

from . import summability
from .operator_core import (
    OperatorConfig,
    TestFunction,
    apply_operator,
    central_moment,
    raw_moment_closed_form,
)

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"

_EPS = np.finfo(float).eps
LIMIT_REL_TOL = 0.05


# --------------------------------------------------------------------------
# function corpus
# --------------------------------------------------------------------------

def _one(t):
    return np.ones_like(np.asarray(t, dtype=float))


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


# All growth constants are 1: each f satisfies |f(x)| <= 1 + x^2 and
# |f(t) - f(x)| <= 1 + x^2 + t^2.
CORPUS = {
    f.label: f for f in (
        TestFunction("one", _one, 1.0, _zero),
        TestFunction("identity", lambda t: np.asarray(t, dtype=float), 1.0, _zero),
        TestFunction("square", lambda t: np.asarray(t, dtype=float) ** 2, 1.0,
                     lambda t: 2.0 * _one(t)),
        TestFunction("exp-neg", lambda t: np.exp(-np.asarray(t, dtype=float)), 1.0,
                     lambda t: np.exp(-np.asarray(t, dtype=float))),
        TestFunction("sin", np.sin, 1.0, lambda t: -np.sin(t)),
        TestFunction("abs-shift", lambda t: np.abs(np.asarray(t, dtype=float) - 1.0), 1.0),
        TestFunction("inv-quad", lambda t: 1.0 / (1.0 + np.asarray(t, dtype=float) ** 2), 1.0,
                     lambda t: (6.0 * np.asarray(t, dtype=float) ** 2 - 2.0)
                     / (1.0 + np.asarray(t, dtype=float) ** 2) ** 3),
    )
}


# --------------------------------------------------------------------------
# records and grids
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AuditRecord:
    claim_id: str
    params: dict
    measured: float
    stated: float
    margin: float
    verdict: str
    slack: float = 0.0

    def sort_key(self):
        def num(k):
            v = self.params.get(k)
            return -math.inf if v is None else float(v)
        return (self.claim_id, num("n"), num("beta"), num("x"), num("B"))


@dataclass(frozen=True)
class GridSpec:
    x_points: tuple
    n_values: tuple
    beta_values: tuple
    B: Optional[float] = None

    def __post_init__(self):
        for name in ("x_points", "n_values", "beta_values"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"GridSpec.{name} must be non-empty")
            object.__setattr__(self, name, vals)
        if any(not (math.isfinite(x) and x >= 0) for x in self.x_points):
            raise ValueError("x_points must be finite and >= 0")
        if any(int(n) != n or n < 1 for n in self.n_values):
            raise ValueError("n_values must be positive integers")
        if any(not b > 1 for b in self.beta_values):
            raise ValueError("beta_values must be > 1")
        if self.B is not None and not self.B > 0:
            raise ValueError("B must be positive")

    @property
    def x_in_interval(self):
        """x points inside ``[0, B]`` (all of them when B is unset)."""
        if self.B is None:
            return self.x_points
        return tuple(x for x in self.x_points if x <= self.B)


STANDARD_GRID = GridSpec(
    x_points=(0.0, 0.25, 0.5, 1.0, 2.0, 5.0),
    n_values=(10, 100, 1000),
    beta_values=(1.5, 2.0, 5.0),
    B=2.0,
)


def verdict(margin, slack, *values):
    """``holds`` iff ``margin >= -slack``; ``inconclusive`` on non-finite input."""
    if not all(math.isfinite(v) for v in (margin, slack) + values):
        return INCONCLUSIVE
    return HOLDS if margin >= -slack else VIOLATED


def _rounding(*values):
    return 16 * _EPS * sum(abs(v) for v in values)


def _record(claim_id, params, measured, stated, margin, numeric_error):
    slack = 10.0 * numeric_error + _rounding(measured, stated)
    return AuditRecord(claim_id, dict(params), measured, stated, margin,
                       verdict(margin, slack, measured, stated), slack)


# --------------------------------------------------------------------------
# stated bounds
# --------------------------------------------------------------------------

def lemma2_bound(j, config, x):
    """Stated right-hand side for ``|W_n(t^j; x) - x^j|``."""
    b, n = float(config.beta), config.n
    if j == 1:
        return b / n
    if j == 2:
        return x * (1 + 2 * b) / (b * n) + b ** 2 / n ** 2
    if j == 3:
        return 3 * x ** 2 / (n * b) + x * (1 + 3 * b + b ** 2) / (b * n ** 2) + b ** 3 / n ** 3
    if j == 4:
        return ((4 * b + 6) * x ** 3 / (n * b * (b + 1) * (b + 2))
                + (6 * b ** 2 + 12 * b + 7) * x ** 2 / (n ** 2 * b * (b + 1))
                + (4 * b ** 3 + 6 * b ** 2 + 4 * b + 1) * x / (n ** 3 * b)
                + b ** 4 / n ** 4)
    raise ValueError(f"lemma2_bound supports j in 1..4, got {j!r}")


def lemma3_bound(i, config, x, form="statement"):
    """Stated bound for ``W_n((t-x)^i; x)``.

    For ``i = 3`` two inconsistent expressions are printed; ``form="proof"``
    selects the one derived in the argument, ``"statement"`` the other.
    """
    b, n = float(config.beta), config.n
    if i == 1:
        return b / n
    if i == 2:
        return x * (1 + 2 * b) / (b * n) + 2 * x * b / n + b ** 2 / n ** 2
    if i == 3:
        if form == "proof":
            return 3 * x ** 2 * (b + 2) / (n * b * (b + 1)) + x / (n ** 2 * b)
        if form != "statement":
            raise ValueError(f"unknown form {form!r}")
        return (3 * x ** 2 / (n * b) + x * (1 + 3 * b + b ** 2) / (b * n ** 2) + b ** 3 / n ** 3
                + 3 * x * (x * (1 + 2 * b) / (b * n) + b ** 2 / n ** 2)
                + 3 * x ** 2 * b / n)
    if i == 4:
        a3 = (4 * b + 6) / (b * (b + 1) * (b + 2)) + 18 / b + 12 + 4 * b
        a2 = (6 * b ** 2 + 12 * b + 7) / (b * (b + 1)) + 4 / b + 12 + 4 * b + 6 * b ** 2
        a1 = 4 * b ** 3 + 4 * b ** 2 + 6 * b + 4 + 1 / b
        return a3 * x ** 3 / n + a2 * x ** 2 / n ** 2 + a1 * x / n ** 3 + b ** 4 / n ** 4
    raise ValueError(f"lemma3_bound supports i in 1..4, got {i!r}")


def theorem1_delta(beta, n, B):
    return B * (1 + 2 * beta) / (beta * n) + beta ** 2 / n ** 2


def norm_envelope(beta, n, x):
    """Proof envelope for ``1 + W_n(t^2; x)`` in the weighted-norm lemma."""
    return 1 + x ** 2 + x * (1 + 2 * beta) / (beta * n) + beta ** 2 / n ** 2


# --------------------------------------------------------------------------
# norms and moduli
# --------------------------------------------------------------------------

def _golden_max(g, a, b, iters=80):
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(iters):
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - invphi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + invphi * (b - a)
            gd = g(d)
    return max(gc, gd)


def weighted_norm(f, x_max, points=400):
    """Sampled ``sup |f(x)| / (1 + x^2)`` on ``[0, x_max]`` (a lower bound).

    Half the points are uniform, half geometric towards ``x_max``; the best
    grid cell is refined by golden-section search.
    """
    if points < 100:
        raise ValueError("points must be >= 100")
    if not x_max > 0:
        raise ValueError("x_max must be positive")
    half = points // 2
    xs = np.unique(np.concatenate([
        np.linspace(0.0, x_max, half),
        np.geomspace(x_max * 1e-6, x_max, points - half),
    ]))

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.abs(np.asarray(f(x), dtype=float)) / (1.0 + x * x)

    vals = g(xs)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    if hi > lo:
        best = max(best, float(_golden_max(lambda t: float(g(t)), lo, hi)))
    return best


def modulus_of_continuity(f, B, delta, points=200):
    """Grid estimate of ``sup{|f(t) - f(x)| : x, t in [0, B], |t - x| <= delta}``.

    Two pair families on a fixed lattice of spacing ``h/16`` over ``[0, B]``
    (``h = B/(points - 1)``): every lattice pair within ``delta`` (nested in
    delta) and every pair ``(x, x + delta)`` with ``x`` on the lattice (exact
    separation). A ``delta`` above ``B`` is clamped to ``B``.
    """
    if points < 200:
        raise ValueError("points must be >= 200")
    if not (B > 0 and delta > 0):
        raise ValueError("B and delta must be positive")
    B = float(B)
    delta = min(float(delta), B)
    m = 16 * (int(points) - 1)
    xs = np.linspace(0.0, B, m + 1)
    fx = np.asarray(f(xs), dtype=float)
    reach = min(m, int(math.floor(delta / (B / m) * (1 + 1e-12))))
    best = 0.0
    if reach >= 1:
        win = np.lib.stride_tricks.sliding_window_view(fx, reach + 1)
        # each window spans at most delta, so its range is an admissible pair
        best = float(np.max(win.max(axis=1) - win.min(axis=1)))
    lo = xs[xs <= B - delta]
    if lo.size:
        hi = np.minimum(lo + delta, B)
        best = max(best, float(np.max(np.abs(np.asarray(f(hi), dtype=float)
                                             - np.asarray(f(lo), dtype=float)))))
    return best


def theorem1_bound(f, config, B, points=200):
    """``M_f delta_n + 2 omega_{B+1}(f, sqrt(delta_n))`` with ``M_f = 6 A_f (1 + B^2)``."""
    if not B > 0:
        raise ValueError("B must be positive")
    dn = theorem1_delta(float(config.beta), config.n, B)
    mf = 6.0 * f.growth_constant * (1.0 + B * B)
    return mf * dn + 2.0 * modulus_of_continuity(f, B + 1.0, math.sqrt(dn), points)


def sup_error(f, config, B, points=41, with_location=False):
    """``max |W_n f(x) - f(x)|`` over a uniform grid of ``points`` in ``[0, B]``.

    With ``with_location=True`` returns ``(value, argmax_x, tail_error)``.
    """
    xs = np.linspace(0.0, B, points) if points > 1 else np.array([0.0])
    best, where, worst_tail = -1.0, 0.0, 0.0
    for x in xs:
        v, e = apply_operator(config, f, float(x), with_error=True)
        d = abs(v - float(f(float(x))))
        worst_tail = max(worst_tail, e)
        if d > best:
            best, where = d, float(x)
    return (best, where, worst_tail) if with_location else best


# --------------------------------------------------------------------------
# audit
# --------------------------------------------------------------------------

def norm_lemma_audit(config, x_grid):
    """Sup of ``(1 + W_n(t^2; x)) / (1 + x^2)`` against the proof envelope.

    ``measured`` is the smallest constant valid on the grid; ``stated`` is
    the grid sup of the envelope ratio.
    """
    b, n = float(config.beta), config.n
    best, where, err_at, env = -math.inf, 0.0, 0.0, -math.inf
    for x in x_grid:
        x = float(x)
        m2, e = raw_moment_closed_form(config, 2, x, with_error=True)
        val = (1.0 + m2) / (1.0 + x * x)
        env = max(env, norm_envelope(b, n, x) / (1.0 + x * x))
        if val > best:
            best, where, err_at = val, x, e / (1.0 + x * x)
    return _record("NormLemma", {"n": n, "beta": b, "x": where},
                   best, env, env - best, err_at)


def _lemma2(j, cfg, x):
    m, e = raw_moment_closed_form(cfg, j, x, with_error=True)
    measured = abs(m - x ** j)
    stated = lemma2_bound(j, cfg, x)
    return _record(f"Lemma2.item{j + 1}", {"n": cfg.n, "beta": float(cfg.beta), "x": x},
                   measured, stated, stated - measured, e + _rounding(m, x ** j))


def _lemma3(i, cfg, x, form=None):
    mu, e = central_moment(cfg, i, x, with_error=True)
    suffix = "" if form is None else ("a" if form == "statement" else "b")
    stated = lemma3_bound(i, cfg, x, form or "statement")
    return _record(f"Lemma3.item{i}{suffix}", {"n": cfg.n, "beta": float(cfg.beta), "x": x},
                   mu, stated, stated - mu, e)


def _theorem1(f, cfg, B):
    measured, where, tail = sup_error(f, cfg, B, with_location=True)
    stated = theorem1_bound(f, cfg, B)
    return _record(f"Theorem1:{f.label}",
                   {"n": cfg.n, "beta": float(cfg.beta), "x": where, "B": B},
                   measured, stated, stated - measured, tail)


def _limit_record(claim_id, table, x, B):
    col = table.column(x)
    est = table.estimates[x]
    stated = col[-1].claimed
    errs = [r.error for r in col[-len(est.sensitivity):]]
    numeric = sum(abs(s) * e for s, e in zip(est.sensitivity, errs))
    band = LIMIT_REL_TOL * max(abs(stated), 1.0)
    return _record(claim_id, {"n": col[-1].n, "beta": table.beta, "x": x, "B": B},
                   est.value, stated, band - abs(est.value - stated), numeric)


CLAIM_IDS = (
    "Lemma2.item2", "Lemma2.item3", "Lemma2.item4", "Lemma2.item5",
    "Lemma3.item1", "Lemma3.item2", "Lemma3.item3a", "Lemma3.item3b", "Lemma3.item4",
    "NormLemma", "Theorem1", "Lemma4.3", "Voronovskaya",
)


def expand_claims(claims=None, functions=None):
    """Registered claim ids, expanding ``Theorem1`` / ``Voronovskaya`` per function.

    ``Lemma3.item3`` expands to both printed forms.
    """
    functions = CORPUS if functions is None else functions
    out = []
    for c in (CLAIM_IDS if claims is None else claims):
        base, _, label = c.partition(":")
        if c == "Lemma3.item3":
            out += ["Lemma3.item3a", "Lemma3.item3b"]
        elif base in ("Theorem1", "Voronovskaya"):
            if label:
                if label not in functions:
                    raise ValueError(f"unknown function {label!r} in claim {c!r}")
                labels = [label]
            else:
                labels = list(functions)
            for lab in labels:
                if base == "Voronovskaya" and functions[lab].second_derivative is None:
                    if label:
                        raise ValueError(f"{lab!r} has no second derivative")
                    continue
                out.append(f"{base}:{lab}")
        elif c in CLAIM_IDS:
            out.append(c)
        else:
            raise ValueError(f"unknown claim_id {c!r}")
    return list(dict.fromkeys(out))


def _worker_count():
    raw = os.environ.get("WRIGHT_LAB_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise ValueError(f"WRIGHT_LAB_THREADS must be a positive integer, got {raw!r}")
    if k < 1:
        raise ValueError(f"WRIGHT_LAB_THREADS must be a positive integer, got {raw!r}")
    return k


def _lemma43_records(beta, xs, ns, tol, B):
    table = summability.fourth_moment_scaling_experiment(beta, xs, ns, tol)
    return [_limit_record("Lemma4.3", table, x, B) for x in table.estimates]


def _voronovskaya_records(claim, f, beta, xs, ns, tol, B):
    table = summability.voronovskaya_experiment(f, beta, xs, ns, tol)
    return [_limit_record(claim, table, x, B) for x in table.estimates]


def _tasks(grid, claim, tol, functions):
    B = grid.B if grid.B is not None else (max(grid.x_points) or 1.0)
    ns = sorted(int(n) for n in grid.n_values)
    base, _, label = claim.partition(":")
    for beta in grid.beta_values:
        beta = float(beta)
        if base == "Lemma4.3":
            yield partial(_lemma43_records, beta, grid.x_in_interval, ns, tol, B)
            continue
        if base == "Voronovskaya":
            yield partial(_voronovskaya_records, claim, functions[label], beta,
                          grid.x_in_interval, ns, tol, B)
            continue
        for n in grid.n_values:
            cfg = OperatorConfig(int(n), beta, tol)
            if base == "NormLemma":
                yield lambda cfg=cfg: [norm_lemma_audit(cfg, grid.x_points)]
            elif base == "Theorem1":
                yield lambda cfg=cfg, f=functions[label]: [_theorem1(f, cfg, B)]
            elif base.startswith("Lemma2"):
                j = int(base[-1]) - 1
                for x in grid.x_points:
                    yield partial(lambda *a: [_lemma2(*a)], j, cfg, float(x))
            elif base in ("Lemma3.item3a", "Lemma3.item3b"):
                form = "statement" if base.endswith("a") else "proof"
                for x in grid.x_points:
                    yield partial(lambda *a: [_lemma3(*a)], 3, cfg, float(x), form)
            else:
                i = int(base[-1])
                for x in grid.x_points:
                    yield partial(lambda *a: [_lemma3(*a)], i, cfg, float(x))


def run_claim_audit(grid, claims=None, tol=1e-12, functions=None, workers=None):
    """Evaluate every requested claim over ``grid``; records in canonical order."""
    if grid is None:
        raise ValueError("an audit grid is required")
    functions = CORPUS if functions is None else functions
    ids = expand_claims(claims, functions)
    tasks = [t for c in ids for t in _tasks(grid, c, tol, functions)]
    workers = _worker_count() if workers is None else int(workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda t: t(), tasks))
    else:
        chunks = [t() for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    return sorted(records, key=AuditRecord.sort_key)


def summarize(records):
    counts = {HOLDS: 0, VIOLATED: 0, INCONCLUSIVE: 0}
    for r in records:
        counts[r.verdict] += 1
    return counts
