"""Polytope slicing with lifted seed inequalities.

A slice keeps the vertices on the saturating/violating side of a hyperplane
built from a lifting of a known facet, enumerates the (much smaller)
subpolytope, and filters out the faces that are artifacts of the cut.  What
survives is a set of genuine facets of the original polytope.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations, product

from .exactgeom import (
    BudgetExceeded,
    Inequality,
    affine_rank,
    evaluate_int,
    facet_enum,
    facet_neighbors,
    is_facet,
)
from .scenario import Scenario
from .symmetry import FacetClass, classify, merge_classes

__all__ = [
    "LiftPlan",
    "SliceSpec",
    "SliceError",
    "CampaignReport",
    "lift_inequality",
    "lifted_class_keys",
    "enumerate_lift_plans",
    "slice_vertices",
    "filter_artificial",
    "run_slicing_campaign",
]


class SliceError(ValueError):
    """Vacuous or degenerate slice; pick another bound."""


@dataclass(frozen=True)
class LiftPlan:
    """How to embed a smaller scenario's inequality into a larger one.

    alice_inputs / bob_inputs: target input index for each source input
    (added inputs get zero coefficients).  alice_outcomes / bob_outcomes:
    source outcome that each target outcome duplicates (surjective onto the
    source outcomes).
    """

    alice_inputs: tuple
    bob_inputs: tuple
    alice_outcomes: tuple
    bob_outcomes: tuple

    def describe(self) -> str:
        return (
            f"xin={self.alice_inputs} yin={self.bob_inputs} "
            f"aout={self.alice_outcomes} bout={self.bob_outcomes}"
        )


@dataclass(frozen=True)
class SliceSpec:
    cut: Inequality  # hyperplane coefficients with its own bound ignored
    bound: int  # keep vertices with cut.coeffs . v >= bound
    provenance: str = ""


@dataclass
class CampaignReport:
    slices_attempted: int = 0
    slices_kept: int = 0
    rows: list = field(default_factory=list)  # per-slice dicts

    def to_tsv(self) -> str:
        cols = [
            "slice", "provenance", "bound", "vertices", "facets",
            "new_classes", "total_classes", "seconds", "status",
        ]
        lines = ["\t".join(cols)]
        for r in self.rows:
            lines.append("\t".join(str(r[c]) for c in cols))
        return "\n".join(lines) + "\n"


def lift_inequality(ineq: Inequality, source: Scenario, target: Scenario,
                    plan: LiftPlan) -> Inequality:
    """Lift a facet of the source scenario into the target scenario.

    Works on the P-notation coefficients: a target joint probability picks up
    the source coefficient of the merged outcomes on the mapped inputs, and
    contexts involving an added input contribute nothing.
    """
    if not target.dominates(source):
        raise ValueError(f"{target} does not dominate {source}")
    _check_plan(plan, source, target)
    from .symmetry import _contract_to_cg, _expand_to_p

    c_src = _expand_to_p(source, ineq)
    c = [
        [[[0] * target.B for _ in range(target.A)] for _ in range(target.Y)]
        for _ in range(target.X)
    ]
    inv_x = {tx: sx for sx, tx in enumerate(plan.alice_inputs)}
    inv_y = {ty: sy for sy, ty in enumerate(plan.bob_inputs)}
    for tx, sx in inv_x.items():
        for ty, sy in inv_y.items():
            for a in range(target.A):
                for b in range(target.B):
                    c[tx][ty][a][b] = c_src[sx][sy][
                        plan.alice_outcomes[a]
                    ][plan.bob_outcomes[b]]
    return _contract_to_cg(target, c, ineq.bound)


def _check_plan(plan: LiftPlan, source: Scenario, target: Scenario) -> None:
    if len(plan.alice_inputs) != source.X or len(plan.bob_inputs) != source.Y:
        raise ValueError("plan input maps must cover every source input")
    if len(set(plan.alice_inputs)) != source.X or len(set(plan.bob_inputs)) != source.Y:
        raise ValueError("plan input maps must be injective")
    if not all(0 <= t < target.X for t in plan.alice_inputs):
        raise ValueError("Alice input map out of range")
    if not all(0 <= t < target.Y for t in plan.bob_inputs):
        raise ValueError("Bob input map out of range")
    if len(plan.alice_outcomes) != target.A or len(plan.bob_outcomes) != target.B:
        raise ValueError("plan outcome maps must cover every target outcome")
    if set(plan.alice_outcomes) != set(range(source.A)):
        raise ValueError("Alice outcome map must be onto the source outcomes")
    if set(plan.bob_outcomes) != set(range(source.B)):
        raise ValueError("Bob outcome map must be onto the source outcomes")


def enumerate_lift_plans(source: Scenario, target: Scenario):
    """Deterministic stream of lifting plans: input embeddings first (with
    identity outcome maps extended by duplicating the suppressed outcome),
    then output liftings duplicating the suppressed outcome, then outcome 0,
    across all input embeddings."""
    input_embeddings = [
        (ax, bx)
        for ax in combinations(range(target.X), source.X)
        for bx in combinations(range(target.Y), source.Y)
    ]
    outcome_choices = []
    for dup_a, dup_b in product(_dup_choices(source.A, target.A),
                                _dup_choices(source.B, target.B)):
        if (dup_a, dup_b) not in outcome_choices:
            outcome_choices.append((dup_a, dup_b))
    for dup_a, dup_b in outcome_choices:
        for ax, bx in input_embeddings:
            yield LiftPlan(tuple(ax), tuple(bx), dup_a, dup_b)


def _dup_choices(src_n: int, tgt_n: int):
    """Outcome maps target -> source: identity on the first src_n outcomes,
    extra outcomes duplicating the suppressed outcome or outcome 0."""
    base = tuple(range(src_n))
    if tgt_n == src_n:
        return [base]
    return [
        base + (src_n - 1,) * (tgt_n - src_n),
        base + (0,) * (tgt_n - src_n),
    ]


def lifted_class_keys(source_classes, target: Scenario) -> dict:
    """Map each target-scenario class reachable by lifting one of the given
    source class representatives to the key of its source representative.

    Keys are canonical-form keys in the target scenario, so membership can be
    tested directly against classify() output.  Useful for splitting a class
    list into lifted classes and genuinely new ones.
    """
    from .symmetry import canonical_form

    out = {}
    for cls in source_classes:
        rep = cls.representative
        for plan in enumerate_lift_plans(rep.scenario, target):
            q = lift_inequality(rep, rep.scenario, target, plan)
            out.setdefault(canonical_form(q).key(), rep.key())
    return out


def slice_vertices(vertices, spec: SliceSpec, require_full_dim: bool = False):
    """Vertices on the A.x >= c side of the cut; errors on vacuous slices,
    and (when require_full_dim) on retained sets that do not span the
    ambient dimension -- a cut at the local bound of a valid inequality
    keeps just its saturating set, which is one dimension short."""
    kept = [
        v for v in vertices if evaluate_int(spec.cut, v) >= spec.bound
    ]
    if not kept or len(kept) == len(vertices):
        raise SliceError(f"vacuous slice: kept {len(kept)} of {len(vertices)}")
    if require_full_dim:
        dim = (
            len(vertices[0].coords)
            if hasattr(vertices[0], "coords")
            else len(vertices[0])
        )
        if affine_rank(kept) != dim:
            raise SliceError("degenerate slice: retained set not full-dimensional")
    return kept


def filter_artificial(candidates, full_vertices, dim: int):
    """Keep the candidates that are facets of the original polytope."""
    return [q for q in candidates if is_facet(q, full_vertices, dim) is not None]


def run_slicing_campaign(
    s: Scenario,
    seed_classes,
    n_slices: int,
    bound_schedule=None,
    vertex_budget: int = 5000,
    time_budget_per_slice: float = None,
    vertices=None,
):
    """Round-robin over (seed class, lifting plan) pairs, slicing at bounds
    from the schedule and harvesting genuine facets of the full polytope.

    bound_schedule: offsets below the seed's local bound to try for each cut
    (default 0, 1, ..., 6); each slice takes the task's first offset that
    yields a usable (non-vacuous, full-dimensional, within-budget)
    subpolytope, and revisits of the same task cut deeper.  Slices over
    budget or failing their time budget are skipped and logged.  Returns
    (classes, CampaignReport).
    """
    from .scenario import enumerate_vertices

    if vertices is None:
        vertices = enumerate_vertices(s)
    dim = s.cg_dim
    offsets = tuple(bound_schedule) if bound_schedule is not None else tuple(range(7))

    tasks = []
    for cls in seed_classes:
        src = cls.representative.scenario
        for plan in enumerate_lift_plans(src, s):
            tasks.append((cls, plan))
    if not tasks:
        raise ValueError("no liftable seeds for this scenario")

    report = CampaignReport()
    found = []
    seen_slices = set()
    next_offset = [0] * len(tasks)  # per-task pointer into the schedule
    task_i = 0
    while report.slices_attempted < n_slices:
        if all(p >= len(offsets) for p in next_offset):
            break  # every task exhausted its schedule
        ti = task_i % len(tasks)
        task_i += 1
        if next_offset[ti] >= len(offsets):
            continue
        cls, plan = tasks[ti]
        report.slices_attempted += 1
        row = {
            "slice": report.slices_attempted,
            "provenance": f"{cls.representative.key()}|{plan.describe()}",
            "bound": None, "vertices": 0, "facets": 0,
            "new_classes": 0, "total_classes": len(found),
            "seconds": 0.0, "status": "skipped: schedule exhausted",
        }
        t0 = time.monotonic()
        lifted = lift_inequality(
            cls.representative, cls.representative.scenario, s, plan
        )
        while next_offset[ti] < len(offsets):
            offset = offsets[next_offset[ti]]
            next_offset[ti] += 1
            spec = SliceSpec(lifted, lifted.bound - offset, plan.describe())
            row["bound"] = spec.bound
            try:
                kept = slice_vertices(vertices, spec, require_full_dim=False)
            except SliceError as exc:
                row["status"] = f"skipped: {exc}"
                continue
            row["vertices"] = len(kept)
            if len(kept) > vertex_budget:
                row["status"] = "skipped: over vertex budget"
                next_offset[ti] = len(offsets)  # deeper cuts only grow
                break
            key = frozenset(
                tuple(v.coords if hasattr(v, "coords") else v) for v in kept
            )
            if key in seen_slices:
                row["status"] = "skipped: duplicate slice"
                continue
            seen_slices.add(key)
            full_dim = affine_rank(kept) == dim
            try:
                if full_dim:
                    sub_facets = facet_enum(
                        kept, time_budget=time_budget_per_slice, scenario=s
                    )
                else:
                    # cut at the seed's local bound: the retained set is the
                    # lifted facet's own saturating set, one dimension short.
                    # Harvest the adjacent facets by ridge rotation instead.
                    sub_facets = [lifted] + facet_neighbors(
                        vertices, lifted, dim,
                        time_budget=time_budget_per_slice, scenario=s,
                    )
            except BudgetExceeded as exc:
                row["status"] = f"skipped: {exc}"
                break
            genuine = filter_artificial(sub_facets, vertices, dim)
            row["facets"] = len(genuine)
            new_classes = classify(genuine, provenance=f"slice {row['slice']}")
            before = len(found)
            found = merge_classes(found, new_classes)
            row["new_classes"] = len(found) - before
            row["status"] = "ok"
            report.slices_kept += 1
            break
        row["seconds"] = round(time.monotonic() - t0, 3)
        row["total_classes"] = len(found)
        report.rows.append(row)
    return found, report


# --- campaign config file --------------------------------------------------

def read_campaign_config(path) -> dict:
    cfg = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            cfg[key.strip()] = val.strip()
    return cfg
