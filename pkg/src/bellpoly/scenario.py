"""Bell scenarios, local deterministic vertices, and Collins-Gisin coordinates.

A bipartite scenario (X, Y, A, B) has X (Y) settings and A (B) outcomes for
Alice (Bob).  Behaviors are stored in Collins-Gisin (CG) coordinates: joint
terms p(ab|xy) with the last outcome of each party dropped, followed by
Alice's marginals p_A(a|x) and Bob's marginals p_B(b|y).  All arithmetic in
this module is exact (ints / Fractions).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

__all__ = [
    "Scenario",
    "BehaviorVector",
    "SignallingError",
    "enumerate_vertices",
    "vertex_from_strategy",
    "p_to_cg",
    "cg_to_p",
    "evaluate",
    "write_vertices",
    "read_vertices",
]

VERTEX_CAP = 10**7


class SignallingError(ValueError):
    """Input distribution table violates the no-signalling conditions."""


@dataclass(frozen=True)
class Scenario:
    """A bipartite Bell scenario (X, Y, A, B)."""

    X: int
    Y: int
    A: int
    B: int

    def __post_init__(self):
        if self.X < 1 or self.Y < 1:
            raise ValueError("need at least one input per party")
        if self.A < 2 or self.B < 2:
            raise ValueError("need at least two outcomes per party")

    @property
    def cg_dim(self) -> int:
        X, Y, A, B = self.X, self.Y, self.A, self.B
        return (A - 1) * (B - 1) * X * Y + (A - 1) * X + (B - 1) * Y

    @property
    def n_vertices(self) -> int:
        return self.A**self.X * self.B**self.Y

    # --- CG layout ---------------------------------------------------------
    # joints first, (x, y, a, b)-lexicographic with a < A-1, b < B-1, then
    # Alice marginals (x, a)-lexicographic, then Bob marginals (y, b).

    def joint_index(self, x: int, y: int, a: int, b: int) -> int:
        A1, B1 = self.A - 1, self.B - 1
        return ((x * self.Y + y) * A1 + a) * B1 + b

    def alice_index(self, x: int, a: int) -> int:
        base = (self.A - 1) * (self.B - 1) * self.X * self.Y
        return base + x * (self.A - 1) + a

    def bob_index(self, y: int, b: int) -> int:
        base = (self.A - 1) * (self.B - 1) * self.X * self.Y
        return base + self.X * (self.A - 1) + y * (self.B - 1) + b

    def dominates(self, other: "Scenario") -> bool:
        return (
            self.X >= other.X
            and self.Y >= other.Y
            and self.A >= other.A
            and self.B >= other.B
        )

    def __str__(self):
        return f"({self.X},{self.Y},{self.A},{self.B})"

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        parts = [int(t) for t in text.replace("(", "").replace(")", "").split(",")]
        if len(parts) != 4:
            raise ValueError(f"scenario must be four integers, got {text!r}")
        return cls(*parts)


@dataclass(frozen=True)
class BehaviorVector:
    """A point of behavior space in CG coordinates (exact entries)."""

    scenario: Scenario
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.scenario.cg_dim:
            raise ValueError(
                f"expected {self.scenario.cg_dim} coordinates, got {len(self.coords)}"
            )


def vertex_from_strategy(s: Scenario, alice: tuple, bob: tuple) -> BehaviorVector:
    """CG image of the deterministic strategy x -> alice[x], y -> bob[y]."""
    coords = [0] * s.cg_dim
    for x in range(s.X):
        if alice[x] < s.A - 1:
            coords[s.alice_index(x, alice[x])] = 1
    for y in range(s.Y):
        if bob[y] < s.B - 1:
            coords[s.bob_index(y, bob[y])] = 1
    for x, y in product(range(s.X), range(s.Y)):
        a, b = alice[x], bob[y]
        if a < s.A - 1 and b < s.B - 1:
            coords[s.joint_index(x, y, a, b)] = 1
    return BehaviorVector(s, tuple(coords))


def enumerate_vertices(s: Scenario, cap: int = VERTEX_CAP) -> list:
    """All A^X * B^Y deterministic-strategy vertices, in lexicographic
    strategy order (Alice assignment major)."""
    if s.n_vertices > cap:
        raise ResourceWarning(
            f"{s}: {s.n_vertices} vertices exceeds the cap of {cap}"
        )
    out = []
    for alice in product(range(s.A), repeat=s.X):
        for bob in product(range(s.B), repeat=s.Y):
            out.append(vertex_from_strategy(s, alice, bob))
    return out


def p_to_cg(s: Scenario, table) -> BehaviorVector:
    """Convert a full distribution table table[x][y][a][b] to CG coordinates.

    The table must be normalized in every context and exactly no-signalling;
    marginals are read off the first context of the other party.
    """
    frac = Fraction
    for x, y in product(range(s.X), range(s.Y)):
        tot = sum(table[x][y][a][b] for a in range(s.A) for b in range(s.B))
        if frac(tot) != 1:
            raise ValueError(f"context ({x},{y}) not normalized: total {tot}")
    # marginal consistency across contexts
    for x in range(s.X):
        for a in range(s.A):
            margs = {
                sum(frac(table[x][y][a][b]) for b in range(s.B)) for y in range(s.Y)
            }
            if len(margs) != 1:
                raise SignallingError(f"Alice marginal p({a}|{x}) depends on y")
    for y in range(s.Y):
        for b in range(s.B):
            margs = {
                sum(frac(table[x][y][a][b]) for a in range(s.A)) for x in range(s.X)
            }
            if len(margs) != 1:
                raise SignallingError(f"Bob marginal p({b}|{y}) depends on x")

    coords = [frac(0)] * s.cg_dim
    for x, y in product(range(s.X), range(s.Y)):
        for a in range(s.A - 1):
            for b in range(s.B - 1):
                coords[s.joint_index(x, y, a, b)] = frac(table[x][y][a][b])
    for x in range(s.X):
        for a in range(s.A - 1):
            coords[s.alice_index(x, a)] = sum(
                frac(table[x][0][a][b]) for b in range(s.B)
            )
    for y in range(s.Y):
        for b in range(s.B - 1):
            coords[s.bob_index(y, b)] = sum(
                frac(table[0][y][a][b]) for a in range(s.A)
            )
    return BehaviorVector(s, tuple(coords))


def cg_to_p(s: Scenario, v: BehaviorVector):
    """Reconstruct the full table table[x][y][a][b] from CG coordinates."""
    if len(v.coords) != s.cg_dim:
        raise ValueError("coordinate length mismatch")
    c = v.coords
    frac = Fraction
    table = [
        [[[frac(0)] * s.B for _ in range(s.A)] for _ in range(s.Y)]
        for _ in range(s.X)
    ]
    for x, y in product(range(s.X), range(s.Y)):
        pa = [frac(c[s.alice_index(x, a)]) for a in range(s.A - 1)]
        pb = [frac(c[s.bob_index(y, b)]) for b in range(s.B - 1)]
        joint = [
            [frac(c[s.joint_index(x, y, a, b)]) for b in range(s.B - 1)]
            for a in range(s.A - 1)
        ]
        for a in range(s.A - 1):
            for b in range(s.B - 1):
                table[x][y][a][b] = joint[a][b]
            table[x][y][a][s.B - 1] = pa[a] - sum(joint[a])
        for b in range(s.B - 1):
            table[x][y][s.A - 1][b] = pb[b] - sum(joint[a][b] for a in range(s.A - 1))
        table[x][y][s.A - 1][s.B - 1] = (
            1 - sum(pa) - sum(pb) + sum(sum(row) for row in joint)
        )
    return table


def evaluate(ineq, v: BehaviorVector):
    """Exact value of the inequality's coefficient vector on a behavior
    (the bound is not subtracted)."""
    if len(ineq.coeffs) != len(v.coords):
        raise ValueError("layout mismatch between inequality and behavior")
    return sum(c * w for c, w in zip(ineq.coeffs, v.coords) if c)


# --- vertex file format ----------------------------------------------------

def write_vertices(path, s: Scenario, vertices) -> None:
    with open(path, "w") as fh:
        fh.write(f"#CG {s.X} {s.Y} {s.A} {s.B}\n")
        for v in vertices:
            fh.write(" ".join(str(c) for c in v.coords) + "\n")


def read_vertices(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "#CG":
            raise ValueError("bad vertex file header, expected '#CG X Y A B'")
        s = Scenario(*map(int, header[1:]))
        vertices = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            vertices.append(BehaviorVector(s, tuple(int(t) for t in line.split())))
    return s, vertices
