"""Hot numeric loops, compiled with numba when available.

Two interchangeable backends are provided for every kernel:

* ``*_numba``  -- ``@njit`` loops.
* ``*_numpy``  -- vectorised numpy (plus ``scipy.signal.lfilter`` for the
  linear recurrence of the fixed-step integrator).

The public names (``eval_cycle``, ``rk4_linear``) point at the numba
versions unless numba is missing or the environment variable
``HYBRIDGAME_NO_NUMBA`` is set to a truthy value.

Cycles are passed to kernels as padded ``(2, n)`` arrays of coefficients and
rates; row 0 is the first subperiod, row 1 the second.  Padding terms carry a
zero coefficient.
"""

import os

import numpy as np
from scipy.signal import lfilter

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _flag("HYBRIDGAME_NO_NUMBA")


def _njit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


# ---------------------------------------------------------------------------
# cycle evaluation

def eval_cycle_numpy(coef, rate, period, split, t):
    t = np.asarray(t, dtype=float)
    k = np.floor(t / period)
    u = t - k * period
    # guard against u == period from rounding
    u = np.where(u >= period, u - period, u)
    u = np.where(u < 0.0, u + period, u)
    phase = (u >= split).astype(np.intp)
    c = coef[phase]
    r = rate[phase]
    return np.sum(c * np.exp(r * u[..., None]), axis=-1)


@_njit
def _eval_cycle_flat(coef, rate, period, split, t):
    out = np.empty(t.size)
    nterm = coef.shape[1]
    for j in range(t.size):
        tj = t[j]
        u = tj - np.floor(tj / period) * period
        if u >= period:
            u -= period
        elif u < 0.0:
            u += period
        p = 1 if u >= split else 0
        acc = 0.0
        for m in range(nterm):
            acc += coef[p, m] * np.exp(rate[p, m] * u)
        out[j] = acc
    return out


def eval_cycle_numba(coef, rate, period, split, t):
    t = np.asarray(t, dtype=float)
    flat = np.ascontiguousarray(t.ravel())
    return _eval_cycle_flat(coef, rate, float(period), float(split), flat).reshape(t.shape)


# ---------------------------------------------------------------------------
# fixed-step RK4 for  y' = f(t) + kappa(t) * y
#
# The mesh is a list of segments; each segment lies inside a single subperiod
# and is traversed with n equal steps of size dt.  seg_base is the start kT of
# the period containing the segment, seg_phase its subperiod index.

@_njit
def _rk4_linear_loop(seg_t0, seg_dt, seg_n, seg_base, seg_phase, y0, coef, rate, kappa):
    total = 0
    for s in range(seg_n.size):
        total += seg_n[s]
    out = np.empty(total + 1)
    out[0] = y0
    y = y0
    idx = 0
    nterm = coef.shape[1]
    for s in range(seg_n.size):
        p = seg_phase[s]
        kap = kappa[p]
        dt = seg_dt[s]
        u0 = seg_t0[s] - seg_base[s]
        for j in range(seg_n[s]):
            u = u0 + j * dt
            f0 = 0.0
            fm = 0.0
            f1 = 0.0
            for m in range(nterm):
                c = coef[p, m]
                r = rate[p, m]
                f0 += c * np.exp(r * u)
                fm += c * np.exp(r * (u + 0.5 * dt))
                f1 += c * np.exp(r * (u + dt))
            k1 = f0 + kap * y
            k2 = fm + kap * (y + 0.5 * dt * k1)
            k3 = fm + kap * (y + 0.5 * dt * k2)
            k4 = f1 + kap * (y + dt * k3)
            y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            idx += 1
            out[idx] = y
    return out


def rk4_linear_numba(seg_t0, seg_dt, seg_n, seg_base, seg_phase, y0, coef, rate, kappa):
    return _rk4_linear_loop(
        np.asarray(seg_t0, dtype=float),
        np.asarray(seg_dt, dtype=float),
        np.asarray(seg_n, dtype=np.int64),
        np.asarray(seg_base, dtype=float),
        np.asarray(seg_phase, dtype=np.int64),
        float(y0),
        np.ascontiguousarray(coef, dtype=float),
        np.ascontiguousarray(rate, dtype=float),
        np.asarray(kappa, dtype=float),
    )


def rk4_linear_numpy(seg_t0, seg_dt, seg_n, seg_base, seg_phase, y0, coef, rate, kappa):
    # One RK4 step of a linear ODE is affine, y_next = A*y + B_j, with A fixed
    # inside a segment; the recurrence is then a first-order IIR filter.
    pieces = [np.array([float(y0)])]
    y = float(y0)
    for t0, dt, n, base, p in zip(seg_t0, seg_dt, seg_n, seg_base, seg_phase):
        u = (t0 - base) + dt * np.arange(n)
        c = coef[p]
        r = rate[p]
        f0 = np.exp(np.outer(u, r)) @ c
        fm = np.exp(np.outer(u + 0.5 * dt, r)) @ c
        f1 = np.exp(np.outer(u + dt, r)) @ c
        kap = kappa[p]
        # step applied to y = 0 gives the inhomogeneous part
        k1 = f0
        k2 = fm + kap * (0.5 * dt * k1)
        k3 = fm + kap * (0.5 * dt * k2)
        k4 = f1 + kap * (dt * k3)
        b = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x = kap * dt
        a = 1.0 + x + x * x / 2.0 + x ** 3 / 6.0 + x ** 4 / 24.0
        seg, _ = lfilter([1.0], [1.0, -a], b, zi=[a * y])
        pieces.append(seg)
        y = seg[-1]
    return np.concatenate(pieces)


if USE_NUMBA:
    eval_cycle = eval_cycle_numba
    rk4_linear = rk4_linear_numba
else:
    eval_cycle = eval_cycle_numpy
    rk4_linear = rk4_linear_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
