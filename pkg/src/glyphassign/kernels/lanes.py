"""Per-lane SplitMix64 draws: one independent stream per array slot."""
import math

import numpy as np

from .._accel import USE_NUMBA, njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_MAXU = np.uint64(0xFFFFFFFFFFFFFFFF)
_TWO_M53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


def int_reject_remainder(n):
    """2**64 mod n; draws above ``MAX - rem`` are rejected."""
    return np.uint64((1 << 64) % int(n))


# ---------------------------------------------------------------- numba ----

@njit
def _next(states, k):
    s = states[k] + _GOLDEN
    states[k] = s
    z = (s ^ (s >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit
def _uniform(states, k):
    return (float(_next(states, k) >> _S11) + 0.5) * _TWO_M53


@njit
def _integer(states, k, n, rem):
    lim = _MAXU - rem
    while True:
        x = _next(states, k)
        if x <= lim:
            return np.int64(x % np.uint64(n))


@njit
def _normal(states, k):
    u1 = _uniform(states, k)
    u2 = _uniform(states, k)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@njit
def _gamma(states, k, shape):
    boost = shape < 1.0
    a = shape + 1.0 if boost else shape
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = _normal(states, k)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _uniform(states, k)
        if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
            g = d * v
            break
    if boost:
        g = g * _uniform(states, k) ** (1.0 / shape)
    return g


@njit
def beta_lanes_nb(states, a, b):
    n = states.shape[0]
    out = np.empty(n)
    for k in range(n):
        x = _gamma(states, k, a)
        y = _gamma(states, k, b)
        out[k] = x / (x + y)
    return out


@njit
def integer_lanes_nb(states, n, rem):
    m = states.shape[0]
    out = np.empty(m, dtype=np.int64)
    for k in range(m):
        out[k] = _integer(states, k, n, rem)
    return out


# ---------------------------------------------------------------- numpy ----

def _next_np(states, idx):
    with np.errstate(over="ignore"):
        s = states[idx] + _GOLDEN
        states[idx] = s
        z = (s ^ (s >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


# libm per element: numpy's SIMD log/cos can differ from libm in the last
# bit, which would make the two backends draw different variates
_log = np.frompyfunc(math.log, 1, 1)
_cos = np.frompyfunc(math.cos, 1, 1)
_pow = np.frompyfunc(math.pow, 2, 1)


def _f64(a):
    return np.asarray(a, dtype=np.float64)


def _uniform_np(states, idx):
    return ((_next_np(states, idx) >> _S11).astype(np.float64) + 0.5) * _TWO_M53


def integer_lanes_np(states, n, rem):
    out = np.empty(states.shape[0], dtype=np.int64)
    lim = _MAXU - np.uint64(rem)
    todo = np.arange(states.shape[0])
    while todo.size:
        x = _next_np(states, todo)
        ok = x <= lim
        out[todo[ok]] = (x[ok] % np.uint64(n)).astype(np.int64)
        todo = todo[~ok]
    return out


def _gamma_np(states, shape):
    n = states.shape[0]
    boost = shape < 1.0
    a = shape + 1.0 if boost else shape
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    todo = np.arange(n)
    while todo.size:
        u1 = _uniform_np(states, todo)
        u2 = _uniform_np(states, todo)
        x = np.sqrt(-2.0 * _f64(_log(u1))) * _f64(_cos(_TWO_PI * u2))
        v = 1.0 + c * x
        pos = v > 0.0
        cand = todo[pos]
        x = x[pos]
        v = v[pos]
        v = v * v * v
        u = _uniform_np(states, cand)
        acc = _f64(_log(u)) < 0.5 * x * x + d - d * v + d * _f64(_log(v))
        out[cand[acc]] = d * v[acc]
        done = np.zeros(n, dtype=bool)
        done[cand[acc]] = True
        todo = todo[~done[todo]]
    if boost:
        out = out * _f64(_pow(_uniform_np(states, np.arange(n)), 1.0 / shape))
    return out


def beta_lanes_np(states, a, b):
    x = _gamma_np(states, a)
    y = _gamma_np(states, b)
    return x / (x + y)


beta_lanes = beta_lanes_nb if USE_NUMBA else beta_lanes_np
integer_lanes = integer_lanes_nb if USE_NUMBA else integer_lanes_np
