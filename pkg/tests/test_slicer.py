"""Liftings, slice extraction, artifact filtering and the slicing campaign."""

import pytest

from bellpoly.exactgeom import evaluate_int, is_facet
from bellpoly.scenario import Scenario, enumerate_vertices
from bellpoly.slicer import (
    LiftPlan,
    SliceError,
    SliceSpec,
    enumerate_lift_plans,
    filter_artificial,
    lift_inequality,
    read_campaign_config,
    run_slicing_campaign,
    slice_vertices,
)


def test_lifted_chsh_is_facet_of_3322(chsh, s3322, v3322):
    """Input liftings preserve facetness (zero coefficients on new inputs)."""
    for plan in enumerate_lift_plans(chsh.scenario, s3322):
        lifted = lift_inequality(chsh, chsh.scenario, s3322, plan)
        assert is_facet(lifted, v3322, s3322.cg_dim) is not None


def test_lifted_chsh_to_2233_is_facet(chsh):
    """Outcome liftings (duplicating an outcome) also preserve facetness."""
    s = Scenario(2, 2, 3, 3)
    verts = enumerate_vertices(s)
    for plan in enumerate_lift_plans(chsh.scenario, s):
        lifted = lift_inequality(chsh, chsh.scenario, s, plan)
        assert is_facet(lifted, verts, s.cg_dim) is not None


def test_lift_preserves_local_bound(chsh, s3322, v3322):
    plan = next(enumerate_lift_plans(chsh.scenario, s3322))
    lifted = lift_inequality(chsh, chsh.scenario, s3322, plan)
    assert max(evaluate_int(lifted, v) for v in v3322) == lifted.bound


def test_lift_plan_validation(chsh, s3322):
    src = chsh.scenario
    good = next(enumerate_lift_plans(src, s3322))
    bad_inputs = LiftPlan((0, 0), good.bob_inputs,
                          good.alice_outcomes, good.bob_outcomes)
    with pytest.raises(ValueError):
        lift_inequality(chsh, src, s3322, bad_inputs)
    bad_outcomes = LiftPlan(good.alice_inputs, good.bob_inputs,
                            (0, 0), good.bob_outcomes)
    with pytest.raises(ValueError):
        lift_inequality(chsh, src, s3322, bad_outcomes)
    with pytest.raises(ValueError):
        # target does not dominate the source
        lift_inequality(chsh, src, Scenario(1, 2, 2, 2), good)


def test_lift_plan_count_2222_to_3322(chsh, s3322):
    plans = list(enumerate_lift_plans(chsh.scenario, s3322))
    # 3 choose 2 input embeddings per side, identity outcome maps only
    assert len(plans) == 9


def test_slice_vertices_sides(v3322, chsh, s3322):
    plan = next(enumerate_lift_plans(chsh.scenario, s3322))
    lifted = lift_inequality(chsh, chsh.scenario, s3322, plan)
    spec = SliceSpec(lifted, lifted.bound)
    kept = slice_vertices(v3322, spec)
    assert 0 < len(kept) < len(v3322)
    assert all(evaluate_int(lifted, v) >= spec.bound for v in kept)


def test_slice_vertices_vacuous(v3322, chsh, s3322):
    plan = next(enumerate_lift_plans(chsh.scenario, s3322))
    lifted = lift_inequality(chsh, chsh.scenario, s3322, plan)
    with pytest.raises(SliceError):
        slice_vertices(v3322, SliceSpec(lifted, lifted.bound + 99))
    with pytest.raises(SliceError):
        slice_vertices(v3322, SliceSpec(lifted, -99))


def test_slice_at_local_bound_is_degenerate(v3322, chsh, s3322):
    """Cutting exactly at the local bound keeps only the saturating set,
    which is one dimension short."""
    plan = next(enumerate_lift_plans(chsh.scenario, s3322))
    lifted = lift_inequality(chsh, chsh.scenario, s3322, plan)
    with pytest.raises(SliceError):
        slice_vertices(v3322, SliceSpec(lifted, lifted.bound),
                       require_full_dim=True)


def test_filter_artificial(v2222, facets2222, s2222, chsh):
    from bellpoly.exactgeom import Inequality

    fake = Inequality(s2222, (1, 0, 0, 0, 0, 0, 0, 0), 1)  # face, not facet
    out = filter_artificial([chsh, fake], v2222, s2222.cg_dim)
    assert [q.key() for q in out] == [chsh.key()]


def test_campaign_finds_i3322_and_leaks_nothing(
        s3322, v3322, classes2222, i3322, facets3322):
    """Seeded with the (2,2,2,2) classes, the campaign reaches the I3322
    class within 5 slices, and every emitted inequality is a genuine facet."""
    chsh_cls = [c for c in classes2222 if c.orbit_size == 8]
    found, report = run_slicing_campaign(
        s3322, chsh_cls, n_slices=5, vertices=v3322)
    reps = {c.representative.key() for c in found}
    assert i3322.key() in reps
    all_facets = {q.key() for q in facets3322}
    for c in found:
        assert c.representative.key() in all_facets
    assert report.slices_attempted <= 5
    assert any(r["status"] == "ok" for r in report.rows)


def test_campaign_report_tsv(s3322, v3322, classes2222):
    chsh_cls = [c for c in classes2222 if c.orbit_size == 8]
    _, report = run_slicing_campaign(s3322, chsh_cls, n_slices=2,
                                     vertices=v3322)
    tsv = report.to_tsv()
    lines = tsv.strip().split("\n")
    assert lines[0].startswith("slice\t")
    assert len(lines) == 1 + len(report.rows)


def test_campaign_requires_seeds(s3322):
    with pytest.raises(ValueError):
        run_slicing_campaign(s3322, [], n_slices=1)


def test_campaign_vertex_budget(s3322, v3322, classes2222):
    chsh_cls = [c for c in classes2222 if c.orbit_size == 8]
    _, report = run_slicing_campaign(
        s3322, chsh_cls, n_slices=3, vertex_budget=10, vertices=v3322)
    assert all("skipped" in r["status"] for r in report.rows)


def test_read_campaign_config(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nscenario = (3,3,2,2)\nslices=5\n\n")
    cfg = read_campaign_config(path)
    assert cfg == {"scenario": "(3,3,2,2)", "slices": "5"}
