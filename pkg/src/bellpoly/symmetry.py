"""Relabeling symmetries of Bell scenarios and classification of facets.

The group is generated by input permutations, per-input output permutations
on either side, and (for X = Y, A = B) the party swap.  Inequalities are
transformed by expanding to P-notation coefficients, permuting, and
re-contracting to CG coordinates; the local bound absorbs the constant term
produced by normalization.  Class representatives are the descending-
lexicographic maxima of [coeffs..., L] over the orbit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from math import factorial

from .exactgeom import Inequality

__all__ = [
    "SymmetryElement",
    "FacetClass",
    "group_order",
    "generators",
    "apply_symmetry",
    "canonical_form",
    "orbit",
    "orbit_size",
    "classify",
    "write_classes",
    "read_classes",
]


@dataclass(frozen=True)
class SymmetryElement:
    """A relabeling: input permutations, per-input output permutations, and
    an optional party swap (applied after the permutations)."""

    a_in: tuple  # permutation of Alice inputs, x -> a_in[x]
    a_out: tuple  # per Alice input, outcome permutation a -> a_out[x][a]
    b_in: tuple
    b_out: tuple
    swap: bool = False


def identity_element(s) -> SymmetryElement:
    return SymmetryElement(
        tuple(range(s.X)),
        tuple(tuple(range(s.A)) for _ in range(s.X)),
        tuple(range(s.Y)),
        tuple(tuple(range(s.B)) for _ in range(s.Y)),
        False,
    )


def group_order(s) -> int:
    order = (
        factorial(s.X)
        * factorial(s.A) ** s.X
        * factorial(s.Y)
        * factorial(s.B) ** s.Y
    )
    if s.X == s.Y and s.A == s.B:
        order *= 2
    return order


def generators(s) -> list:
    """A generating set: adjacent input transpositions, adjacent outcome
    transpositions on single inputs, and the swap when legal."""
    gens = []
    ident = identity_element(s)
    for i in range(s.X - 1):
        p = list(range(s.X))
        p[i], p[i + 1] = p[i + 1], p[i]
        gens.append(
            SymmetryElement(tuple(p), ident.a_out, ident.b_in, ident.b_out)
        )
    for j in range(s.Y - 1):
        p = list(range(s.Y))
        p[j], p[j + 1] = p[j + 1], p[j]
        gens.append(
            SymmetryElement(ident.a_in, ident.a_out, tuple(p), ident.b_out)
        )
    for x in range(s.X):
        for a in range(s.A - 1):
            p = list(range(s.A))
            p[a], p[a + 1] = p[a + 1], p[a]
            a_out = list(ident.a_out)
            a_out[x] = tuple(p)
            gens.append(
                SymmetryElement(ident.a_in, tuple(a_out), ident.b_in, ident.b_out)
            )
    for y in range(s.Y):
        for b in range(s.B - 1):
            p = list(range(s.B))
            p[b], p[b + 1] = p[b + 1], p[b]
            b_out = list(ident.b_out)
            b_out[y] = tuple(p)
            gens.append(
                SymmetryElement(ident.a_in, ident.a_out, ident.b_in, tuple(b_out))
            )
    if s.X == s.Y and s.A == s.B:
        gens.append(
            SymmetryElement(ident.a_in, ident.a_out, ident.b_in, ident.b_out, True)
        )
    return gens


def all_elements(s):
    """Every group element (use only for small scenarios)."""
    swaps = (False, True) if s.X == s.Y and s.A == s.B else (False,)
    for a_in in permutations(range(s.X)):
        for a_out in product(permutations(range(s.A)), repeat=s.X):
            for b_in in permutations(range(s.Y)):
                for b_out in product(permutations(range(s.B)), repeat=s.Y):
                    for sw in swaps:
                        yield SymmetryElement(a_in, a_out, b_in, b_out, sw)


# --- transformation of inequalities ----------------------------------------

def _expand_to_p(s, ineq):
    """P-notation coefficient tensor c[x][y][a][b] representing the same
    functional on the no-signalling subspace (marginals expanded against the
    first context of the other party)."""
    c = [[[[0] * s.B for _ in range(s.A)] for _ in range(s.Y)] for _ in range(s.X)]
    for x in range(s.X):
        for y in range(s.Y):
            for a in range(s.A - 1):
                for b in range(s.B - 1):
                    c[x][y][a][b] += ineq.coeffs[s.joint_index(x, y, a, b)]
    for x in range(s.X):
        for a in range(s.A - 1):
            alpha = ineq.coeffs[s.alice_index(x, a)]
            if alpha:
                for b in range(s.B):
                    c[x][0][a][b] += alpha
    for y in range(s.Y):
        for b in range(s.B - 1):
            beta = ineq.coeffs[s.bob_index(y, b)]
            if beta:
                for a in range(s.A):
                    c[0][y][a][b] += beta
    return c


def _contract_to_cg(s, c, bound):
    """Inverse of the P expansion: rewrite a P coefficient tensor in CG
    coordinates using normalization and no-signalling; the constant term is
    absorbed into the bound."""
    coeffs = [0] * s.cg_dim
    A1, B1 = s.A - 1, s.B - 1
    const = 0
    for x in range(s.X):
        for y in range(s.Y):
            cxy = c[x][y]
            corner = cxy[A1][B1]
            const += corner
            for a in range(A1):
                for b in range(B1):
                    coeffs[s.joint_index(x, y, a, b)] += (
                        cxy[a][b] - cxy[a][B1] - cxy[A1][b] + corner
                    )
            for a in range(A1):
                coeffs[s.alice_index(x, a)] += cxy[a][B1] - corner
            for b in range(B1):
                coeffs[s.bob_index(y, b)] += cxy[A1][b] - corner
    return Inequality(s, tuple(coeffs), bound - const).normalized()


def apply_symmetry(ineq: Inequality, g: SymmetryElement) -> Inequality:
    s = ineq.scenario
    if g.swap and not (s.X == s.Y and s.A == s.B):
        raise ValueError("party swap requires X = Y and A = B")
    c = _expand_to_p(s, ineq)
    new = [[[[0] * s.B for _ in range(s.A)] for _ in range(s.Y)] for _ in range(s.X)]
    for x in range(s.X):
        xi = g.a_in[x]
        for y in range(s.Y):
            yi = g.b_in[y]
            for a in range(s.A):
                ai = g.a_out[x][a]
                row = c[x][y][a]
                for b in range(s.B):
                    if row[b]:
                        new[xi][yi][ai][g.b_out[y][b]] += row[b]
    if g.swap:
        swapped = [
            [[[new[y][x][b][a] for b in range(s.B)] for a in range(s.A)]
             for y in range(s.Y)]
            for x in range(s.X)
        ]
        new = swapped
    return _contract_to_cg(s, new, ineq.bound)


def orbit(ineq: Inequality, max_size=None) -> set:
    """Closure of the inequality under the generator set (keys of normalized
    inequalities)."""
    s = ineq.scenario
    gens = generators(s)
    start = ineq.normalized()
    seen = {start.key(): start}
    frontier = [start]
    while frontier:
        nxt = []
        for q in frontier:
            for g in gens:
                img = apply_symmetry(q, g)
                k = img.key()
                if k not in seen:
                    seen[k] = img
                    nxt.append(img)
                    if max_size is not None and len(seen) > max_size:
                        raise RuntimeError("orbit size cap exceeded")
        frontier = nxt
    return set(seen)


def orbit_size(ineq: Inequality) -> int:
    return len(orbit(ineq))


def canonical_form(ineq: Inequality) -> Inequality:
    s = ineq.scenario
    best = max(orbit(ineq))
    return Inequality(s, best[:-1], best[-1])


@dataclass(frozen=True)
class FacetClass:
    representative: Inequality
    orbit_size: int
    provenance: str = ""
    members_verified: bool = field(default=False, compare=False)


def classify(facets, provenance: str = "") -> list:
    """Partition facets into symmetry classes.

    Each unseen facet's full orbit is expanded once; every orbit member found
    in the input is charged to that class.  Classes are returned sorted by
    representative, descending lexicographic.  Raises on mixed scenarios.
    """
    facets = [f.normalized() for f in facets]
    if not facets:
        return []
    s = facets[0].scenario
    if any(f.scenario != s for f in facets):
        raise ValueError("facets from mixed scenarios")
    seen = {}
    classes = []
    for f in facets:
        if f.key() in seen:
            continue
        orb = orbit(f)
        rep_key = max(orb)
        rep = Inequality(s, rep_key[:-1], rep_key[-1])
        cls = FacetClass(rep, len(orb), provenance)
        classes.append(cls)
        for k in orb:
            seen[k] = cls
    classes.sort(key=lambda c: c.representative.key(), reverse=True)
    return classes


def merge_classes(*class_lists) -> list:
    """Set-union of class lists, deduplicated by representative."""
    by_rep = {}
    for lst in class_lists:
        for c in lst:
            by_rep.setdefault(c.representative.key(), c)
    out = list(by_rep.values())
    out.sort(key=lambda c: c.representative.key(), reverse=True)
    return out


# --- class file format -----------------------------------------------------

def write_classes(path, scenario, classes) -> None:
    with open(path, "w") as fh:
        fh.write(
            f"#CLASSES {scenario.X} {scenario.Y} {scenario.A} {scenario.B}\n"
        )
        for i, c in enumerate(classes, start=1):
            rep = c.representative
            line = " ".join(str(x) for x in rep.coeffs)
            fh.write(f"{i} {c.orbit_size} {line} {rep.bound}\n")


def read_classes(path):
    from .scenario import Scenario

    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "#CLASSES":
            raise ValueError("bad class file header, expected '#CLASSES X Y A B'")
        s = Scenario(*map(int, header[1:]))
        classes = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            nums = [int(t) for t in line.split()]
            _, osize = nums[0], nums[1]
            coeffs, bound = tuple(nums[2:-1]), nums[-1]
            classes.append(FacetClass(Inequality(s, coeffs, bound), osize))
    return s, classes
