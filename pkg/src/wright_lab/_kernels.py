"""Hot loops: log-gamma, positive-term series summation, operator weights.

Each kernel has a numba implementation (``*_nb``, scalar loops) and a
numpy implementation (``*_np``, chunked vectorised). The unsuffixed names
are bound to one of the two according to :mod:`wright_lab._accel`.

Series kernels work on terms of the form

    log t_k = offset + k * log_a - lgamma(k + 1) - lgamma(rho * k + beta)

which covers the Wright function (``offset = 0``, ``log_a = log z``) and
the modified Bessel function (``offset = nu log(w/2)``, ``log_a = 2 log(w/2)``,
``rho = 1``, ``beta = nu + 1``). Sums are accumulated as
``exp(log_scale) * scaled_sum`` so large arguments do not overflow.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

LN2 = math.log(2.0)
HALF_LOG_2PI_TERM = 2.5066282746310005  # sqrt(2 pi)

# Lanczos approximation, g = 671/128, 15 terms.
_LANCZOS_G_SHIFT = 5.24218750000000000
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS = np.array([
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3,
    -0.210264441724104883e-3, 0.217439618115212643e-3,
    -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
])

# ln((m)!) for m = 0..18, from exact integer factorials
_LOG_FACTORIAL = np.array([math.log(math.factorial(m)) for m in range(19)])

STATUS_OK = 0
STATUS_CAP = 1


# --------------------------------------------------------------------------
# log-gamma
# --------------------------------------------------------------------------

@njit
def lgamma_scalar(x):
    """ln Gamma(x) for finite x > 0 (no argument checking)."""
    if x == 1.0 or x == 2.0:
        return 0.0
    if x <= 19.0 and x == math.floor(x):
        # (x-1)! is exact in double precision here
        fact = 1.0
        for i in range(2, int(x)):
            fact *= i
        return math.log(fact)
    shift = 0.0
    if x < 0.5:
        # Gamma(x) = Gamma(x + 1) / x keeps the Lanczos sum well conditioned
        shift = math.log(x)
        x = x + 1.0
        if x == 1.0:
            return -shift
    y = x
    tmp = x + _LANCZOS_G_SHIFT
    tmp = (x + 0.5) * math.log(tmp) - tmp
    ser = _LANCZOS_C0
    for c in _LANCZOS:
        y += 1.0
        ser += c / y
    return tmp + math.log(HALF_LOG_2PI_TERM * ser / x) - shift


def lgamma_array(x):
    """Vectorised :func:`lgamma_scalar` (same formula, numpy ops)."""
    x = np.asarray(x, dtype=float)
    small = x < 0.5
    shift = np.where(small, np.log(np.where(small, x, 1.0)), 0.0)
    xs = np.where(small, x + 1.0, x)
    tmp = xs + _LANCZOS_G_SHIFT
    tmp = (xs + 0.5) * np.log(tmp) - tmp
    ser = np.full_like(xs, _LANCZOS_C0)
    y = xs.copy()
    for c in _LANCZOS:
        y = y + 1.0
        ser = ser + c / y
    out = tmp + np.log(HALF_LOG_2PI_TERM * ser / xs) - shift
    out = np.where(small & (xs == 1.0), -shift, out)
    exact = (x <= 19.0) & (x == np.floor(x)) & (x >= 1.0)
    if exact.any():
        out = np.where(exact, _LOG_FACTORIAL[np.where(exact, x, 1.0).astype(np.int64) - 1], out)
    return out


# --------------------------------------------------------------------------
# positive-term series with geometric tail certificate
# --------------------------------------------------------------------------

@njit
def _series_log_sum_nb(offset, log_a, rho, beta, rel_tol, cap):
    log_tol = math.log(rel_tol)
    l_k = offset - lgamma_scalar(beta)
    m = l_k
    s = 1.0
    k = 0
    while k < cap:
        l_next = (offset + (k + 1) * log_a - lgamma_scalar(k + 2.0)
                  - lgamma_scalar(rho * (k + 1) + beta))
        log_q = l_next - l_k
        if log_q <= -LN2:
            log_tail = l_next - math.log1p(-math.exp(log_q))
            if log_tail <= log_tol + m + math.log(s):
                return m, s, k, math.exp(log_tail - m), STATUS_OK
        if l_next > m:
            s = s * math.exp(m - l_next) + 1.0
            m = l_next
        else:
            s += math.exp(l_next - m)
        l_k = l_next
        k += 1
    return m, s, k, math.inf, STATUS_CAP


def _series_log_sum_np(offset, log_a, rho, beta, rel_tol, cap):
    log_tol = math.log(rel_tol)
    size = 64
    while True:
        size_eff = min(size, cap + 1)
        k = np.arange(size_eff, dtype=float)
        l = offset + k * log_a - lgamma_array(k + 1.0) - lgamma_array(rho * k + beta)
        cum = np.logaddexp.accumulate(l)
        log_q = l[1:] - l[:-1]
        q = np.exp(np.minimum(log_q, -LN2))
        log_tail = l[1:] - np.log1p(-q)
        cond = (log_q <= -LN2) & (log_tail <= log_tol + cum[:-1])
        hits = np.flatnonzero(cond)
        if hits.size:
            K = int(hits[0])
            return float(cum[K]), 1.0, K, math.exp(log_tail[K] - cum[K]), STATUS_OK
        if size_eff >= cap + 1:
            return float(cum[-1]), 1.0, cap, math.inf, STATUS_CAP
        size *= 4


# --------------------------------------------------------------------------
# Wright operator weights
# --------------------------------------------------------------------------

@njit
def _operator_weights_nb(log_z, beta, n, tol, order, log_norm, cap):
    l_prev = -lgamma_scalar(beta)
    k = 0
    status = STATUS_CAP
    tail0 = math.inf
    tail_hi = math.inf
    while k < cap:
        l_next = (k + 1) * log_z - lgamma_scalar(k + 2.0) - lgamma_scalar(k + 1.0 + beta)
        log_q = l_next - l_prev
        if log_q <= -LN2:
            log_qj = log_q + order * math.log((k + 1.0 + beta) / (k + beta))
            if log_qj <= -LN2:
                w_next = math.exp(l_next - log_norm)
                t0 = w_next / (1.0 - math.exp(log_q))
                s_next = (k + 1.0 + beta) / n
                tj = s_next ** order * w_next / (1.0 - math.exp(log_qj))
                if t0 <= tol and tj <= tol:
                    tail0 = t0
                    tail_hi = tj
                    status = STATUS_OK
                    break
        l_prev = l_next
        k += 1
    if status != STATUS_OK:
        return np.empty(0), tail0, tail_hi, status
    w = np.empty(k + 1)
    w[0] = math.exp(-lgamma_scalar(beta) - log_norm)
    for i in range(1, k + 1):
        w[i] = math.exp(i * log_z - lgamma_scalar(i + 1.0) - lgamma_scalar(i + beta) - log_norm)
    return w, tail0, tail_hi, status


def _operator_weights_np(log_z, beta, n, tol, order, log_norm, cap):
    size = 64
    while True:
        size_eff = min(size, cap + 1)
        k = np.arange(size_eff, dtype=float)
        l = k * log_z - lgamma_array(k + 1.0) - lgamma_array(k + beta)
        log_q = l[1:] - l[:-1]
        kk = k[:-1]
        log_qj = log_q + order * np.log((kk + 1.0 + beta) / (kk + beta))
        w_next = np.exp(l[1:] - log_norm)
        t0 = w_next / (1.0 - np.exp(np.minimum(log_q, -LN2)))
        s_next = (kk + 1.0 + beta) / n
        tj = s_next ** order * w_next / (1.0 - np.exp(np.minimum(log_qj, -LN2)))
        cond = (log_q <= -LN2) & (log_qj <= -LN2) & (t0 <= tol) & (tj <= tol)
        hits = np.flatnonzero(cond)
        if hits.size:
            K = int(hits[0])
            w = np.exp(l[:K + 1] - log_norm)
            return w, float(t0[K]), float(tj[K]), STATUS_OK
        if size_eff >= cap + 1:
            return np.empty(0), math.inf, math.inf, STATUS_CAP
        size *= 4


if USE_NUMBA:
    series_log_sum = _series_log_sum_nb
    operator_weights = _operator_weights_nb
else:
    series_log_sum = _series_log_sum_np
    operator_weights = _operator_weights_np
