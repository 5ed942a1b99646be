"""Template classification of mixed percepts through a centred Gram matrix.

For a mix ``m = g*T_i + (1-g)*T_j`` the centred inner product with template k
is ``g*G[i,k] + (1-g)*G[j,k]``, so Pearson-argmax classification needs only
the Gram matrix of centred templates and never materialises the mix.
"""
import numpy as np

from .._accel import USE_NUMBA, njit


@njit
def classify_mixes_nb(gram, inv_norm, cur, prev, gam, flat_tol):
    n = cur.shape[0]
    s = gram.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for t in range(n):
        i = cur[t]
        j = prev[t]
        g = gam[t]
        h = 1.0 - g
        m2 = g * g * gram[i, i] + 2.0 * g * h * gram[i, j] + h * h * gram[j, j]
        if m2 <= flat_tol:
            continue
        best = -np.inf
        arg = 0
        for k in range(s):
            v = (g * gram[i, k] + h * gram[j, k]) * inv_norm[k]
            if v > best:
                best = v
                arg = k
        out[t] = arg
    return out


def classify_mixes_np(gram, inv_norm, cur, prev, gam, flat_tol, chunk=4096):
    n = cur.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for lo in range(0, n, chunk):
        i = cur[lo:lo + chunk]
        j = prev[lo:lo + chunk]
        g = gam[lo:lo + chunk]
        h = 1.0 - g
        m2 = g * g * gram[i, i] + 2.0 * g * h * gram[i, j] + h * h * gram[j, j]
        scores = (g[:, None] * gram[i] + h[:, None] * gram[j]) * inv_norm[None, :]
        pred = np.argmax(scores, axis=1)
        pred[m2 <= flat_tol] = 0
        out[lo:lo + chunk] = pred
    return out


classify_mixes = classify_mixes_nb if USE_NUMBA else classify_mixes_np
