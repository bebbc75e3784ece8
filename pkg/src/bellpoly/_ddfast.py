"""Jitted inner kernel for the double description insertion step.

The kernel evaluates every ray against the incoming constraint, finds the
adjacent (positive, negative) ray pairs with the combinatorial minimality
test on packed bitsets, and returns the combined rays.  All arithmetic is
int64; callers must guard against overflow before invoking it.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - numba is an optional accelerator
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + (
        (x >> np.uint64(2)) & np.uint64(0x3333333333333333)
    )
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def dd_pairs(R, Z, pos, neg, thresh):
    """Adjacent (positive, negative) ray pairs for one insertion, restricted
    to the given positive-side indices so callers can chunk the quadratic
    pair search and honor time budgets between chunks."""
    n, D = R.shape
    W = Z.shape[1]
    cap = 256
    pairs = np.empty((cap, 2), np.int64)
    cnt = 0
    for ii in range(pos.size):
        p = pos[ii]
        for jj in range(neg.size):
            q = neg[jj]
            c = np.uint64(0)
            for w in range(W):
                c += _popcount(Z[p, w] & Z[q, w])
            if c < thresh:
                continue
            ok = True
            for k in range(n):
                if k == p or k == q:
                    continue
                sub = True
                for w in range(W):
                    zz = Z[p, w] & Z[q, w]
                    if zz & Z[k, w] != zz:
                        sub = False
                        break
                if sub:
                    ok = False
                    break
            if not ok:
                continue
            if cnt == cap:
                cap *= 2
                grown = np.empty((cap, 2), np.int64)
                grown[:cnt] = pairs[:cnt]
                pairs = grown
            pairs[cnt, 0] = p
            pairs[cnt, 1] = q
            cnt += 1
    return pairs[:cnt].copy()


def dd_step(R, Z, row, thresh):
    """One insertion: returns (vals, new_rays) where new_rays are the
    adjacent-pair combinations (not yet gcd-reduced)."""
    vals = R @ row
    pos = np.nonzero(vals > 0)[0]
    neg = np.nonzero(vals < 0)[0]
    pairs = dd_pairs(R, Z, pos, neg, thresh)
    return vals, combine_pairs(R, vals, pairs)


def combine_pairs(R, vals, pairs):
    if not len(pairs):
        return np.empty((0, R.shape[1]), np.int64)
    p, q = pairs[:, 0], pairs[:, 1]
    return vals[p, None] * R[q] - vals[q, None] * R[p]
