"""Exact rational linear algebra and complete facet enumeration.

Facet enumeration (V- to H-description) is done with the double description
method on the polar cone: for vertices v_1..v_m spanning a full-dimensional
polytope in R^d, the cone {(a, L) : a.v_i - L <= 0 for all i} is pointed and
its extreme rays are exactly the facet inequalities a.x <= L, plus the
trivial ray (0, 1).  Everything here is exact integer / Fraction arithmetic;
no floats.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

__all__ = [
    "Inequality",
    "FaceCertificate",
    "SeedError",
    "BudgetExceeded",
    "affine_rank",
    "matrix_rank",
    "is_facet",
    "facet_enum",
    "write_inequalities",
    "read_inequalities",
]


class SeedError(ValueError):
    """A seed inequality is not valid for the given vertex set."""


class BudgetExceeded(RuntimeError):
    """Facet-count or time budget exceeded during enumeration."""


@dataclass(frozen=True)
class Inequality:
    """Integer CG-coefficient vector with integer bound: coeffs . v <= bound."""

    scenario: object  # Scenario, or None for raw geometric use
    coeffs: tuple
    bound: int

    def normalized(self) -> "Inequality":
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        g = gcd(g, self.bound)
        if g in (0, 1):
            return self
        return Inequality(
            self.scenario, tuple(c // g for c in self.coeffs), self.bound // g
        )

    def key(self) -> tuple:
        return self.coeffs + (self.bound,)


@dataclass(frozen=True)
class FaceCertificate:
    saturating: tuple  # indices into the vertex list
    rank: int  # affine rank of the saturating set


# --- exact rank computation ------------------------------------------------

def matrix_rank(rows) -> int:
    """Rank of a matrix given as a list of numeric rows (exact arithmetic).
    Integer input goes through fraction-free (Bareiss-style) elimination on
    Python ints; anything else falls back to Fraction elimination."""
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    if all(isinstance(x, int) for row in m for x in row):
        return _matrix_rank_int(m)
    m = [list(map(Fraction, r)) for r in m]
    ncols = len(m[0])
    rank = 0
    col = 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        prow = m[rank]
        inv = 1 / prow[col]
        for i in range(rank + 1, len(m)):
            f = m[i][col]
            if f:
                f *= inv
                row = m[i]
                for j in range(col, ncols):
                    row[j] -= f * prow[j]
        rank += 1
        col += 1
    return rank


def _matrix_rank_int(m) -> int:
    """Fraction-free elimination over Python ints with row gcd reduction."""
    ncols = len(m[0])
    rank = 0
    col = 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        prow = m[rank]
        pv = prow[col]
        for i in range(rank + 1, len(m)):
            f = m[i][col]
            if f:
                row = m[i]
                g = gcd(f, pv)
                fp, pp = f // g, pv // g
                for j in range(col, ncols):
                    row[j] = pp * row[j] - fp * prow[j]
                rg = 0
                for j in range(col, ncols):
                    rg = gcd(rg, row[j])
                if rg > 1:
                    for j in range(col, ncols):
                        row[j] //= rg
        rank += 1
        col += 1
    return rank


def affine_rank(points) -> int:
    """Affine dimension of a nonempty point set (0 for a single point)."""
    pts = list(points)
    if not pts:
        raise ValueError("empty point set")
    first = _coords(pts[0])
    rows = [
        [a - b for a, b in zip(_coords(p), first)] for p in pts[1:]
    ]
    return matrix_rank(rows)


def _coords(p):
    return p.coords if hasattr(p, "coords") else p


# --- facet test ------------------------------------------------------------

def is_facet(ineq: Inequality, vertices, dim: int):
    """FaceCertificate if ineq is a facet of conv(vertices) in dimension dim,
    else None.  Requires validity on every vertex and a saturating set of
    affine rank dim - 1."""
    sat = []
    for i, v in enumerate(vertices):
        val = evaluate_int(ineq, v)
        if val > ineq.bound:
            return None
        if val == ineq.bound:
            sat.append(i)
    if not sat:
        return None
    rank = affine_rank([vertices[i] for i in sat])
    if rank != dim - 1:
        return None
    return FaceCertificate(tuple(sat), rank)


def evaluate_int(ineq: Inequality, v):
    c = ineq.coeffs
    return sum(c[i] * w for i, w in enumerate(_coords(v)) if w)


# --- double description ----------------------------------------------------

def _reduce(vec):
    g = 0
    for c in vec:
        g = gcd(g, c)
    if g > 1:
        return [c // g for c in vec]
    return list(vec)


def _initial_basis(hrows, D):
    """Greedily pick D linearly independent homogeneous rows; return their
    indices.  hrows are integer rows of length D."""
    chosen = []
    echelon = []  # rows of Fractions, reduced
    for idx, row in enumerate(hrows):
        r = list(map(Fraction, row))
        for erow, pivcol in echelon:
            f = r[pivcol]
            if f:
                for j in range(D):
                    r[j] -= f * erow[j]
        piv = next((j for j in range(D) if r[j]), None)
        if piv is None:
            continue
        inv = 1 / r[piv]
        r = [x * inv for x in r]
        echelon.append((r, piv))
        chosen.append(idx)
        if len(chosen) == D:
            return chosen
    raise ValueError("vertex set is not full-dimensional")


def _invert(rows):
    """Exact inverse of a square Fraction matrix given as list of rows."""
    n = len(rows)
    aug = [list(map(Fraction, rows[i])) + [Fraction(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def facet_enum(vertices, seeds=None, max_facets=None, time_budget=None,
               scenario=None):
    """Complete facet list of the full-dimensional polytope conv(vertices).

    Vertices may be BehaviorVectors or plain integer tuples.  Seeds, when
    given, must each pass is_facet against the vertices (invalid seeds raise
    SeedError); they steer the constraint insertion order and are checked
    against the output.  Output is normalized and sorted descending by
    coefficient vector, so identical inputs give identical output order.
    """
    pts = [_coords(v) for v in vertices]
    if not pts:
        raise ValueError("empty vertex set")
    d = len(pts[0])
    D = d + 1
    if scenario is None and hasattr(vertices[0], "scenario"):
        scenario = vertices[0].scenario
    if affine_rank(pts) != d:
        raise ValueError("vertex set is not full-dimensional; project first")

    seed_list = list(seeds) if seeds else []
    for sd in seed_list:
        if is_facet(sd, vertices, d) is None:
            raise SeedError(f"seed is not a facet of the input polytope: {sd}")

    # homogeneous constraint rows (v, -1); insertion order puts vertices that
    # saturate many seeds first, which keeps early intermediate cones close
    # to the seeded facets.
    order = list(range(len(pts)))
    if seed_list:
        sat_count = [0] * len(pts)
        for sd in seed_list:
            for i, p in enumerate(pts):
                if evaluate_int(sd, p) == sd.bound:
                    sat_count[i] += 1
        order.sort(key=lambda i: -sat_count[i])
    hrows = [tuple(pts[i]) + (-1,) for i in order]

    basis_pos = _initial_basis(hrows, D)
    inv = _invert([hrows[i] for i in basis_pos])
    # rays are columns of -inverse, cleared to integers
    rays = []
    for k in range(D):
        col = [-inv[j][k] for j in range(D)]
        den = 1
        for f in col:
            den = den * f.denominator // gcd(den, f.denominator)
        vec = _reduce([int(f * den) for f in col])
        rays.append(vec)

    processed = list(basis_pos)
    zsets = []
    for k in range(D):
        z = 0
        for bit, ci in enumerate(processed):
            if _hdot(hrows[ci], rays[k]) == 0:
                z |= 1 << bit
        zsets.append(z)

    t0 = time.monotonic()
    remaining = [i for i in range(len(hrows)) if i not in set(basis_pos)]
    try:
        rays = _dd_insert_numpy(
            hrows, remaining, rays, zsets, list(processed), D,
            max_facets, time_budget, t0,
        )
    except _IntOverflow:
        rays = _dd_insert_python(
            hrows, remaining, rays, zsets, processed, D,
            max_facets, time_budget, t0,
        )

    out = []
    for vec in rays:
        if not any(vec[:d]):
            continue  # trivial ray 0 <= 1
        out.append(Inequality(scenario, tuple(vec[:d]), vec[d]).normalized())
    out.sort(key=lambda q: q.key(), reverse=True)
    return out


class _IntOverflow(Exception):
    """int64 headroom exhausted in the vectorized path; redo exactly."""


def _pack_bits(B):
    """Pack a boolean (n, mbits) matrix into (n, ceil(mbits/64)) uint64 words,
    bit t living in word t // 64."""
    n, mb = B.shape
    W = (mb + 63) // 64
    Z = np.zeros((n, W), np.uint64)
    ri, ci = np.nonzero(B)
    np.bitwise_or.at(
        Z, (ri, ci // 64), np.uint64(1) << (ci % 64).astype(np.uint64)
    )
    return Z


def _dd_insert_numpy(hrows, remaining, rays, zsets, processed, D,
                     max_facets, time_budget, t0):
    """Vectorized double-description insertion on int64 arrays with a jitted
    adjacency kernel and dynamic (min pair work) constraint ordering.  Exact
    as long as intermediate products stay below 2^62 (guarded; raises
    _IntOverflow to fall back to Python ints otherwise)."""
    from . import _ddfast

    GUARD = 1 << 62
    H = np.array(hrows, dtype=np.int64)
    hmax = int(np.abs(H).max(initial=1))
    if hmax * max(abs(int(x)) for r in rays for x in r) * D > GUARD:
        raise _IntOverflow
    R = np.array(rays, dtype=np.int64)
    mbits = len(hrows)
    Z = np.zeros((len(R), (mbits + 63) // 64), np.uint64)
    Z[:, : ((len(processed) + 63) // 64)] = _pack_bits(
        (R @ H[processed].T) == 0
    )
    rem = list(remaining)
    while rem:
        if time_budget is not None and time.monotonic() - t0 > time_budget:
            raise BudgetExceeded("facet enumeration time budget exceeded")
        rmax = int(np.abs(R).max(initial=1))
        if 2 * rmax * rmax * hmax * D > GUARD:
            raise _IntOverflow
        V = R @ H[rem].T
        posc = (V > 0).sum(axis=0)
        # constraints already satisfied by every ray: bookkeeping only
        done = np.nonzero(posc == 0)[0]
        if done.size:
            for k in done:
                bit = len(processed)
                sel = V[:, k] == 0
                Z[sel, bit // 64] |= np.uint64(1 << (bit % 64))
                processed.append(rem[k])
            rem = [c for i, c in enumerate(rem) if i not in set(done)]
            continue
        negc = (V < 0).sum(axis=0)
        work = posc.astype(np.int64) * negc.astype(np.int64)
        k = int(np.lexsort((-negc, work))[0])
        ci = rem.pop(k)
        vals = R @ H[ci]
        pos = np.nonzero(vals > 0)[0]
        negi = np.nonzero(vals < 0)[0]
        # chunk the quadratic pair search so the time budget is honored
        # within large insertions, not just between them
        parts = []
        start, chunk = 0, 64
        while start < pos.size:
            if time_budget is not None and time.monotonic() - t0 > time_budget:
                raise BudgetExceeded("facet enumeration time budget exceeded")
            t_chunk = time.monotonic()
            sub = pos[start:start + chunk]
            pairs = _ddfast.dd_pairs(R, Z, sub, negi, np.uint64(D - 2))
            if len(pairs):
                parts.append(_ddfast.combine_pairs(R, vals, pairs))
            start += chunk
            dt = time.monotonic() - t_chunk
            if dt < 0.5:
                chunk = min(2 * chunk, 1 << 16)
            elif dt > 4.0:
                chunk = max(chunk // 2, 16)
        new = (
            np.concatenate(parts)
            if parts
            else np.empty((0, R.shape[1]), np.int64)
        )
        keep = vals <= 0
        R, Z = R[keep], Z[keep]
        bit = len(processed)
        sel = vals[keep] == 0
        Z[sel, bit // 64] |= np.uint64(1 << (bit % 64))
        processed.append(ci)
        if len(new):
            g = np.gcd.reduce(np.abs(new), axis=1)
            g[g == 0] = 1
            new //= g[:, None]
            if int(np.abs(new).max()) * hmax * D > GUARD:
                raise _IntOverflow
            Zn = np.zeros((len(new), Z.shape[1]), np.uint64)
            Zn[:, : ((len(processed) + 63) // 64)] = _pack_bits(
                (new @ H[processed].T) == 0
            )
            R = np.concatenate([R, new])
            Z = np.concatenate([Z, Zn])
        if max_facets is not None and len(R) > max_facets:
            raise BudgetExceeded("facet-count budget exceeded")
    return [[int(x) for x in r] for r in R]


def _dd_insert_python(hrows, remaining, rays, zsets, processed, D,
                      max_facets, time_budget, t0):
    """Reference insertion loop on Python ints (no overflow, slower)."""
    for ci in remaining:
        if time_budget is not None and time.monotonic() - t0 > time_budget:
            raise BudgetExceeded("facet enumeration time budget exceeded")
        row = hrows[ci]
        vals = [_hdot(row, r) for r in rays]
        neg, zero, pos = [], [], []
        for k, v in enumerate(vals):
            (neg if v < 0 else zero if v == 0 else pos).append(k)
        if not pos:
            bit = 1 << len(processed)
            for k in zero:
                zsets[k] |= bit
            processed.append(ci)
            continue
        new_rays = []
        thresh = D - 2
        keep = neg + zero
        keep_z = [zsets[k] for k in keep]
        for p in pos:
            zp, vp = zsets[p], vals[p]
            for n in neg:
                z = zp & zsets[n]
                if z.bit_count() < thresh:
                    continue
                # combinatorial adjacency: no other ray's zero set contains z
                adjacent = True
                zn = zsets[n]
                for k, zk in enumerate(zsets):
                    if k == p or k == n:
                        continue
                    if z & zk == z:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vn = vals[n]
                vec = _reduce([vp * b - vn * a
                               for a, b in zip(rays[p], rays[n])])
                new_rays.append(vec)
        bit = 1 << len(processed)
        processed.append(ci)
        rays = [rays[k] for k in keep]
        zsets = []
        for k, z in enumerate(keep_z):
            if vals[keep[k]] == 0:
                z |= bit
            zsets.append(z)
        for vec in new_rays:
            z = 0
            for b, cj in enumerate(processed):
                if _hdot(hrows[cj], vec) == 0:
                    z |= 1 << b
            rays.append(vec)
            zsets.append(z)
        if max_facets is not None and len(rays) > max_facets:
            raise BudgetExceeded("facet-count budget exceeded")
    return rays


def _hdot(row, ray):
    return sum(a * b for a, b in zip(row, ray) if a)


def facet_neighbors(vertices, facet: Inequality, dim: int,
                    time_budget=None, scenario=None):
    """All facets adjacent to the given facet of conv(vertices).

    The facet's saturating set spans its hyperplane; its own facets are the
    ridges of the polytope.  Each ridge is rotated about its span onto the
    unique other facet through it: with facet a.x <= L and ridge g.x <= c
    (valid on the saturating set, g chosen with zero coefficient where a is
    nonzero), the neighbor is (g - t*a).x <= c - t*L at the extreme
    t = min over outside vertices of (c - g.v)/(L - a.v).
    """
    pts = [_coords(v) for v in vertices]
    d = len(pts[0])
    if scenario is None and hasattr(vertices[0], "scenario"):
        scenario = vertices[0].scenario
    alpha, L = facet.coeffs, facet.bound
    sat, outside = [], []
    for p in pts:
        val = sum(alpha[i] * w for i, w in enumerate(p) if w)
        if val == L:
            sat.append(p)
        else:
            if val > L:
                raise ValueError("input is not a valid inequality")
            outside.append(p)
    if not outside:
        raise ValueError("inequality is trivial on the vertex set")
    j = next(i for i, a in enumerate(alpha) if a)
    proj = [tuple(p[:j] + p[j + 1:]) for p in sat]
    ridges = facet_enum(proj, time_budget=time_budget, scenario=None)
    out = {}
    for r in ridges:
        g = r.coeffs[:j] + (0,) + r.coeffs[j:]
        c = r.bound
        t = min(
            Fraction(c - sum(g[i] * w for i, w in enumerate(p) if w),
                     L - sum(alpha[i] * w for i, w in enumerate(p) if w))
            for p in outside
        )
        den = t.denominator
        coeffs = tuple(den * g[i] - t.numerator * alpha[i] for i in range(d))
        q = Inequality(scenario, coeffs, den * c - t.numerator * L).normalized()
        out[q.key()] = q
    res = list(out.values())
    res.sort(key=lambda q: q.key(), reverse=True)
    return res


# --- inequality file format ------------------------------------------------

def write_inequalities(path, scenario, ineqs) -> None:
    with open(path, "w") as fh:
        fh.write(f"#INEQ {scenario.X} {scenario.Y} {scenario.A} {scenario.B}\n")
        for q in ineqs:
            fh.write(" ".join(str(c) for c in q.coeffs) + f" {q.bound}\n")


def read_inequalities(path):
    from .scenario import Scenario

    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "#INEQ":
            raise ValueError("bad inequality file header, expected '#INEQ X Y A B'")
        s = Scenario(*map(int, header[1:]))
        out = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            nums = [int(t) for t in line.split()]
            if len(nums) != s.cg_dim + 1:
                raise ValueError("inequality line has wrong length")
            out.append(Inequality(s, tuple(nums[:-1]), nums[-1]))
    return s, out
