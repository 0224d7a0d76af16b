import json

import numpy as np
import pytest

from massflow.conformal import ConformalFamily, neumann_capped, one
from massflow.fields import LinearField
from massflow.geometry import FULL, HALF, euclidean, schwarzschild_isotropic
from massflow.harmonic import DomainSpec, build_grid
from massflow.inequality import (REPORT_KEYS, InequalityReport, bkks_report, bulk_integrand,
                                 doubled_resolution, solve_and_report, theorem1_report,
                                 trivial_factor_report)


def test_linear_function_has_no_bulk_term_in_flat_space():
    p = np.array([[2.0, 0.0, 1.0], [0.0, -3.0, 0.5]])
    vals = bulk_integrand(ConformalFamily(euclidean(HALF), one(), 0.0), LinearField((0, 0, 1)), p)
    np.testing.assert_array_equal(vals, 0.0)


def test_report_schema():
    rep = InequalityReport(1.0, 1e-6, 0.4, 0.1, 0.0, float("nan"))
    d = json.loads(rep.to_json())
    assert tuple(d) == REPORT_KEYS
    assert d["slack"] == pytest.approx(0.5) and d["hypothesis_min_mean"] is None
    assert rep.hypotheses_hold


def test_kind_guards():
    g_full = build_grid(DomainSpec(FULL, 1.0, 8.0), (16, 12, 24))
    g_half = build_grid(DomainSpec(HALF, 1.0, 8.0), (16, 12, 24))
    w = LinearField((0, 0, 1))
    with pytest.raises(ValueError):
        theorem1_report(euclidean(HALF), w, g_full)
    with pytest.raises(ValueError):
        bkks_report(euclidean(), w, g_half)


def test_doubled_resolution_keeps_spacing():
    g = build_grid(DomainSpec(HALF, 1.0, 64.0), (40, 24, 48))
    n = doubled_resolution(g)
    g2 = build_grid(DomainSpec(HALF, 1.0, 128.0), n)
    assert abs(g2.h_s - g.h_s) < 0.02 * g.h_s and n[1:] == (24, 48)


def test_flat_half_space_equality():
    rep, w, grid = solve_and_report(ConformalFamily(euclidean(), one(), 0.0), HALF,
                                    (16, 12, 24), inner_condition="dirichlet")
    assert rep.lhs_mass == 0.0 and abs(rep.slack) < 1e-12 and not rep.truncation_flag


@pytest.mark.slow
def test_full_space_schwarzschild_slack():
    rep, _, _ = solve_and_report(ConformalFamily(schwarzschild_isotropic(1.0), one(), 0.0), FULL,
                                 (32, 16, 32))
    assert abs(rep.lhs_mass - 1.0) < 1e-4
    assert rep.slack > 0 and rep.rhs_boundary == 0.0 and rep.hypotheses_hold


@pytest.mark.slow
def test_conformal_family_raises_both_sides():
    base = schwarzschild_isotropic(1.0)
    fam = ConformalFamily(base, neumann_capped(1.0, base.inner_radius), 0.5)
    rep, _, _ = solve_and_report(fam, HALF, (32, 16, 32), check_truncation=False)
    assert abs(rep.lhs_mass - 0.75) < 1e-4
    assert rep.slack > 0 and rep.hypotheses_hold
    assert rep.hypothesis_min_mean >= -1e-9


def test_lambda_zero_matches_trivial_factor():
    ch = schwarzschild_isotropic(1.0, HALF)
    grid = build_grid(DomainSpec(HALF, 0.5, 16.0), (16, 12, 24))
    from massflow.harmonic import assemble_operator, solve
    w = solve(assemble_operator(grid, ch))
    a = theorem1_report(ConformalFamily(ch, neumann_capped(1.0, 0.5), 0.0), w, grid)
    b = trivial_factor_report(ch, w, grid)
    assert a.to_dict() == b.to_dict()
