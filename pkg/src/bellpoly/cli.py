"""Command-line front end for the facet-enumeration and analysis pipeline.

Subcommands: vertices, enumerate, slice, classify, lift, analyze, report.
Exit codes: 0 success, 2 budget exceeded (partial output kept and marked),
3 input format error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import quantum
from .exactgeom import (
    BudgetExceeded,
    facet_enum,
    read_inequalities,
    write_inequalities,
)
from .scenario import Scenario, enumerate_vertices, read_vertices, write_vertices
from .slicer import enumerate_lift_plans, lift_inequality, run_slicing_campaign
from .symmetry import classify, read_classes, write_classes

EXIT_OK = 0
EXIT_BUDGET = 2
EXIT_FORMAT = 3


def _tag(s: Scenario) -> str:
    return f"{s.X}{s.Y}{s.A}{s.B}"


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_vertices(args) -> int:
    s = Scenario.parse(args.scenario)
    verts = enumerate_vertices(s)
    path = os.path.join(_outdir(args), f"vertices_{_tag(s)}.txt")
    write_vertices(path, s, verts)
    print(f"wrote {len(verts)} vertices to {path}")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    s = Scenario.parse(args.scenario)
    verts = enumerate_vertices(s)
    seeds = None
    if args.seeds:
        seed_s, seeds = read_inequalities(args.seeds)
        if seed_s != s:
            raise ValueError("seed file scenario differs from --scenario")
    facets = facet_enum(verts, seeds=seeds, time_budget=args.time_budget,
                        scenario=s)
    out = _outdir(args)
    ipath = os.path.join(out, f"inequalities_{_tag(s)}.txt")
    write_inequalities(ipath, s, facets)
    classes = classify(facets)
    cpath = os.path.join(out, f"classes_{_tag(s)}.txt")
    write_classes(cpath, s, classes)
    print(f"{len(facets)} facets, {len(classes)} classes -> {ipath}, {cpath}")
    return EXIT_OK


def cmd_slice(args) -> int:
    s = Scenario.parse(args.scenario)
    _, seed_classes = read_classes(args.seeds)
    classes, report = run_slicing_campaign(
        s, seed_classes, args.slices,
        vertex_budget=args.vertex_budget,
        time_budget_per_slice=args.time_budget,
    )
    out = _outdir(args)
    cpath = os.path.join(out, f"classes_{_tag(s)}.txt")
    write_classes(cpath, s, classes)
    rpath = os.path.join(out, f"campaign_{_tag(s)}.tsv")
    with open(rpath, "w") as fh:
        fh.write(report.to_tsv())
    print(f"{report.slices_kept}/{report.slices_attempted} slices kept, "
          f"{len(classes)} classes -> {cpath}, {rpath}")
    return EXIT_OK


def cmd_classify(args) -> int:
    s, ineqs = read_inequalities(args.input)
    classes = classify(ineqs)
    cpath = os.path.join(_outdir(args), f"classes_{_tag(s)}.txt")
    write_classes(cpath, s, classes)
    print(f"{len(classes)} classes -> {cpath}")
    return EXIT_OK


def cmd_lift(args) -> int:
    target = Scenario.parse(args.scenario)
    source, ineqs = read_inequalities(args.input)
    lifted = []
    for q in ineqs:
        for plan in enumerate_lift_plans(source, target):
            lifted.append(lift_inequality(q, source, target, plan))
    # dedupe, keep deterministic order
    seen, out_list = set(), []
    for q in lifted:
        if q.key() not in seen:
            seen.add(q.key())
            out_list.append(q)
    path = os.path.join(_outdir(args), f"lifted_{_tag(target)}.txt")
    write_inequalities(path, target, out_list)
    print(f"{len(out_list)} lifted inequalities -> {path}")
    return EXIT_OK


def _parse_dims(text):
    dims = tuple(int(t) for t in text.split(","))
    if any(d not in (2, 3, 4) for d in dims):
        raise ValueError("dims must be from {2,3,4}")
    return dims


def cmd_analyze(args) -> int:
    s, classes = read_classes(args.input)
    dims = _parse_dims(args.dims)
    aliases = _read_aliases(args.aliases) if args.aliases else {}
    level = {"1": "1", "1ab": "1+ab", "2": "2"}[args.level]

    def one(item):
        i, cls = item
        rep = cls.representative
        name = aliases.get(rep.key(), f"class{i}")
        return quantum.analyze(rep, dims=dims, level=level,
                               restarts=args.restarts,
                               seed=args.seed + 100 * i, name=name)

    items = list(enumerate(classes, start=1))
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(one, items))
    else:
        rows = [one(it) for it in items]
    path = os.path.join(_outdir(args), f"analysis_{_tag(s)}.tsv")
    with open(path, "w") as fh:
        fh.write(f"# scenario {s}  seed {args.seed}  level {args.level}\n")
        fh.write(quantum.rows_to_tsv(rows, dims=dims))
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK


def cmd_report(args) -> int:
    s, classes = read_classes(args.input)
    aliases = _read_aliases(args.aliases) if args.aliases else {}
    lines = ["class\tname\torbit\tL\tcoefficients"]
    for i, c in enumerate(classes, start=1):
        rep = c.representative
        name = aliases.get(rep.key(), "")
        lines.append(
            f"{i}\t{name}\t{c.orbit_size}\t{rep.bound}\t"
            + " ".join(str(x) for x in rep.coeffs)
        )
    path = os.path.join(_outdir(args), f"report_{_tag(s)}.tsv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"{len(classes)} classes -> {path}")
    return EXIT_OK


def _read_aliases(path) -> dict:
    """Alias table: lines of `name: coefficient ... bound` keying literature
    names to class representatives."""
    table = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, _, rest = line.partition(":")
            nums = tuple(int(t) for t in rest.split())
            table[nums] = name.strip()
    return table


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bellpoly",
        description="Tight Bell inequalities: enumeration, slicing, "
                    "classification and quantum analysis.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scenario=False, inputf=False):
        if scenario:
            p.add_argument("--scenario", required=True, metavar="X,Y,A,B")
        if inputf:
            p.add_argument("--in", dest="input", required=True,
                           help="input file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("vertices", help="write the deterministic vertices")
    common(p, scenario=True)
    p.set_defaults(func=cmd_vertices)

    p = sub.add_parser("enumerate", help="complete facet enumeration")
    common(p, scenario=True)
    p.add_argument("--seeds", help="inequality file steering insertion order")
    p.add_argument("--time-budget", type=float, default=None)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("slice", help="slicing campaign from seed classes")
    common(p, scenario=True)
    p.add_argument("--seeds", required=True, help="seed class file")
    p.add_argument("--slices", type=int, default=20)
    p.add_argument("--vertex-budget", type=int, default=5000)
    p.add_argument("--time-budget", type=float, default=None,
                   help="per-slice enumeration budget in seconds")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("classify", help="classify an inequality file")
    common(p, inputf=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("lift", help="lift inequalities into a larger scenario")
    common(p, scenario=True, inputf=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("analyze", help="quantum figures of merit per class")
    common(p, inputf=True)
    p.add_argument("--dims", default="2,3,4")
    p.add_argument("--level", choices=["1", "1ab", "2"], default="2")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--aliases", help="alias table file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="appendix-style class table")
    common(p, inputf=True)
    p.add_argument("--aliases", help="alias table file")
    p.set_defaults(func=cmd_report)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
