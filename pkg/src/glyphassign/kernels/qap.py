"""Objective evaluation and steepest-descent local search.

The objective for a letter->symbol map ``u`` is

    sum_a  N[a] / R[a],   N[a] = sum_b W[a,b] F[u_a,u_b],   R[a] = sum_b F[u_a,u_b]

where ``W`` is the bigram matrix with a zeroed diagonal and ``R`` renormalizes
each confusion row over the retained symbol set.  Rows with ``R == 0``
contribute nothing.
"""
import numpy as np

from .._accel import USE_NUMBA, njit


# ------------------------------------------------------------ batch costs --

def mapping_costs_np(W, F, maps, chunk=20000):
    maps = np.asarray(maps, dtype=np.int64)
    out = np.empty(maps.shape[0])
    for lo in range(0, maps.shape[0], chunk):
        m = maps[lo:lo + chunk]
        sub = F[m[:, :, None], m[:, None, :]]
        den = sub.sum(axis=2)
        num = np.einsum("ab,nab->na", W, sub)
        out[lo:lo + chunk] = np.divide(num, den, out=np.zeros_like(num), where=den > 0).sum(axis=1)
    return out


@njit
def mapping_costs_nb(W, F, maps):
    n, L = maps.shape
    out = np.empty(n)
    for k in range(n):
        total = 0.0
        for a in range(L):
            sa = maps[k, a]
            num = 0.0
            den = 0.0
            for b in range(L):
                f = F[sa, maps[k, b]]
                num += W[a, b] * f
                den += f
            if den > 0.0:
                total += num / den
        out[k] = total
    return out


# ---------------------------------------------------------- local search --

@njit
def _state_nb(W, F, u):
    L = u.shape[0]
    N = np.zeros(L)
    R = np.zeros(L)
    for a in range(L):
        for b in range(L):
            f = F[u[a], u[b]]
            N[a] += W[a, b] * f
            R[a] += f
    return N, R


@njit
def _total_nb(N, R):
    c = 0.0
    for a in range(N.shape[0]):
        if R[a] > 0.0:
            c += N[a] / R[a]
    return c


@njit
def local_search_nb(W, F, start, rel_tol, max_iter):
    L = start.shape[0]
    S = F.shape[0]
    u = start.copy()
    used = np.zeros(S, dtype=np.bool_)
    for a in range(L):
        used[u[a]] = True
    N, R = _state_nb(W, F, u)
    cost = _total_nb(N, R)
    it = 0
    while it < max_iter:
        best = -rel_tol * cost
        kind = -1
        bp = 0
        bq = 0
        # swaps: subset unchanged, so every R stays put (but moves with its symbol)
        for p in range(L):
            for q in range(p + 1, L):
                up = u[p]
                uq = u[q]
                d = 0.0
                for a in range(L):
                    if a == p or a == q or R[a] <= 0.0:
                        continue
                    d += (W[a, p] - W[a, q]) * (F[u[a], uq] - F[u[a], up]) / R[a]
                npn = W[p, q] * F[uq, up]
                nqn = W[q, p] * F[up, uq]
                for b in range(L):
                    if b == p or b == q:
                        continue
                    npn += W[p, b] * F[uq, u[b]]
                    nqn += W[q, b] * F[up, u[b]]
                if R[q] > 0.0:
                    d += npn / R[q]
                if R[p] > 0.0:
                    d += nqn / R[p]
                    d -= N[p] / R[p]
                if R[q] > 0.0:
                    d -= N[q] / R[q]
                if d < best:
                    best = d
                    kind = 0
                    bp = p
                    bq = q
        # replacements with an unused symbol
        for p in range(L):
            up = u[p]
            for t in range(S):
                if used[t]:
                    continue
                new = 0.0
                nn = 0.0
                rr = F[t, t]
                for a in range(L):
                    if a == p:
                        continue
                    df = F[u[a], t] - F[u[a], up]
                    ra = R[a] + df
                    if ra > 0.0:
                        new += (N[a] + W[a, p] * df) / ra
                    f = F[t, u[a]]
                    nn += W[p, a] * f
                    rr += f
                if rr > 0.0:
                    new += nn / rr
                d = new - cost
                if d < best:
                    best = d
                    kind = 1
                    bp = p
                    bq = t
        if kind < 0:
            break
        if kind == 0:
            tmp = u[bp]
            u[bp] = u[bq]
            u[bq] = tmp
        else:
            used[u[bp]] = False
            used[bq] = True
            u[bp] = bq
        N, R = _state_nb(W, F, u)
        cost = _total_nb(N, R)
        it += 1
    return u, cost, it


def _state_np(W, F, u):
    A = F[np.ix_(u, u)]
    return A, (W * A).sum(axis=1), A.sum(axis=1)


def _safe_div(num, den):
    return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)


def local_search_np(W, F, start, rel_tol, max_iter):
    L = start.shape[0]
    S = F.shape[0]
    u = np.array(start, dtype=np.int64)
    A, N, R = _state_np(W, F, u)
    cost = float(_safe_div(N, R).sum())
    invR = _safe_div(np.ones(L), R)
    it = 0
    eye = np.eye(L, dtype=bool)
    while it < max_iter:
        thresh = -rel_tol * cost
        # swaps, shape (p, q)
        D = (W[:, :, None] - W[:, None, :]) * (A[:, None, :] - A[:, :, None])  # (a, p, q)
        s1 = np.einsum("apq,a->pq", D, invR)
        ar = np.arange(L)
        s1 -= D[ar, ar, :] * invR[:, None]          # remove a == p
        s1 -= D[ar[None, :], ar[:, None], ar[None, :]] * invR[None, :]  # remove a == q
        WAt = W @ A.T
        npn = WAt - W * np.diag(A)[None, :] + W * A.T
        nqn = npn.T
        own = N * invR
        dswap = s1 + npn * invR[None, :] + nqn * invR[:, None] - own[:, None] - own[None, :]
        dswap[np.tril(np.ones((L, L), dtype=bool))] = np.inf
        # replacements, shape (p, t)
        free = np.setdiff1d(np.arange(S), u)
        if free.size:
            Ft = F[np.ix_(u, free)]                                 # (a, t)
            dF = Ft[:, None, :] - A[:, :, None]                     # (a, p, t)
            num = N[:, None, None] + W[:, :, None] * dF
            den = R[:, None, None] + dF
            part = _safe_div(num, den)
            part[ar, ar, :] = 0.0
            rows = F[np.ix_(free, u)]                               # (t, b)
            nn = W @ rows.T                                         # (p, t)
            rr = rows.sum(axis=1)[None, :] - rows.T + F[free, free][None, :]
            dnew = part.sum(axis=0) + _safe_div(nn, rr) - cost
        else:
            dnew = np.full((L, 0), np.inf)
        ks = int(np.argmin(dswap)) if L > 1 else -1
        kr = int(np.argmin(dnew)) if dnew.size else -1
        vs = dswap.flat[ks] if ks >= 0 else np.inf
        vr = dnew.flat[kr] if kr >= 0 else np.inf
        if vs <= vr and vs < thresh:
            p, q = divmod(ks, L)
            u[p], u[q] = u[q], u[p]
        elif vr < vs and vr < thresh:
            p, t = divmod(kr, free.size)
            u[p] = free[t]
        else:
            break
        A, N, R = _state_np(W, F, u)
        cost = float(_safe_div(N, R).sum())
        invR = _safe_div(np.ones(L), R)
        it += 1
    return u, cost, it


mapping_costs = mapping_costs_nb if USE_NUMBA else mapping_costs_np
local_search = local_search_nb if USE_NUMBA else local_search_np
