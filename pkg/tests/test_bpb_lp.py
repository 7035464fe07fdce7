import itertools

import numpy as np
import pytest

import finabel as fb
from finabel.bpb_lp import GroupSpace, LpProblem, bpb_search, lp_min_l1, \
    simplex_solve
from finabel.errors import Infeasible, OverLpCap, Unbounded
from oracles import brute_force_min_l1


class TestSimplex:
    def test_basic(self):
        # min x0 + x1 s.t. x0 + x1 = 1
        problem = LpProblem([1.0, 1.0], [[1.0, 1.0]], [1.0])
        result = simplex_solve(problem)
        assert result.optimum == pytest.approx(1.0)
        assert result.feasibility_residual < 1e-9

    def test_prefers_cheap_variable(self):
        problem = LpProblem([3.0, 1.0], [[1.0, 1.0]], [2.0])
        result = simplex_solve(problem)
        assert result.optimum == pytest.approx(2.0)
        assert result.x[1] == pytest.approx(2.0)

    def test_infeasible(self):
        problem = LpProblem([1.0], [[1.0], [1.0]], [1.0, 2.0])
        with pytest.raises(Infeasible):
            simplex_solve(problem)

    def test_unbounded(self):
        problem = LpProblem([-1.0, 0.0], [[0.0, 1.0]], [1.0])
        with pytest.raises(Unbounded):
            simplex_solve(problem)

    def test_redundant_rows(self):
        problem = LpProblem([1.0, 2.0],
                            [[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0])
        result = simplex_solve(problem)
        assert result.optimum == pytest.approx(1.0)

    def test_cap(self):
        cfg = fb.Config(lp_cap=10)
        problem = LpProblem(np.ones(6), np.ones((3, 6)), np.ones(3))
        with pytest.raises(OverLpCap):
            simplex_solve(problem, cfg)

    def test_certificate_numbers(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            m, n = 4, 9
            a = rng.normal(0, 1, (m, n))
            x_feas = np.abs(rng.normal(0, 1, n))
            b = a @ x_feas
            problem = LpProblem(np.abs(rng.normal(0, 1, n)) + 0.1, a, b)
            result = simplex_solve(problem)
            assert result.feasibility_residual < 1e-9
            assert result.min_reduced_cost > -1e-9
            assert result.x.min() > -1e-9


class TestLpMinL1:
    def test_z2_single_character(self):
        sol = lp_min_l1(fb.make_group([2]), [1], [1])
        assert sol.optimum == pytest.approx(1.0)
        assert np.allclose(sol.values, [1.0, -1.0], atol=1e-9)

    def test_z2_full_support(self):
        sol = lp_min_l1(fb.make_group([2]), [0, 1], [0, 1])
        assert sol.optimum == pytest.approx(1.0)
        assert np.allclose(sol.values, [2.0, 0.0], atol=1e-9)

    def test_z4_haar(self):
        sol = lp_min_l1(fb.make_group([4]), [0, 2], [0, 2])
        assert sol.optimum == pytest.approx(1.0)
        assert np.allclose(sol.values, [2.0, 0.0, 2.0, 0.0], atol=1e-9)

    def test_lambda_outside_support(self):
        with pytest.raises(Infeasible):
            lp_min_l1(fb.make_group([4]), [1], [0, 2])

    def test_monotone_in_support(self):
        g = fb.make_group([8])
        chain = [[0, 1], [0, 1, 2], [0, 1, 2, 3], list(range(8))]
        opts = [lp_min_l1(g, [1], allowed).optimum for allowed in chain]
        for a, b in zip(opts, opts[1:]):
            assert b <= a + 1e-9

    @pytest.mark.parametrize("moduli", [[2], [3], [4], [2, 2], [5]])
    def test_oracle_small_groups(self, moduli):
        g = fb.make_group(moduli)
        space = GroupSpace(g)
        freqs = range(g.order)
        for size in range(1, min(4, g.order) + 1):
            for allowed in itertools.combinations(freqs, size):
                for lam_size in range(1, size + 1):
                    for lam in itertools.combinations(allowed, lam_size):
                        sol = lp_min_l1(g, lam, allowed)
                        ref = brute_force_min_l1(space, lam, allowed)
                        assert sol.optimum == pytest.approx(ref, abs=1e-6)


class TestBpbSearch:
    def test_trivial_character(self):
        poly = bpb_search(fb.make_group([4]), [0], 0.5)
        assert np.allclose(poly.values, 1.0, atol=1e-9)
        assert poly.actual_support == (0,)
        assert poly.l1 == pytest.approx(1.0)

    def test_full_dual(self):
        poly = bpb_search(fb.make_group([2]), [0, 1], 1.0)
        assert poly.l1 == pytest.approx(1.0)

    def test_z4_symmetric_pair(self):
        poly = bpb_search(fb.make_group([4]), [1, 3], 1.0)
        assert poly.l1 <= 2.0 + 1e-9
        assert poly.transform[1] == pytest.approx(1.0, abs=1e-8)
        assert poly.transform[3] == pytest.approx(1.0, abs=1e-8)

    def test_invariants_on_search_results(self):
        rng = np.random.default_rng(32)
        for moduli in ([4], [6], [2, 4], [3, 3]):
            g = fb.make_group(moduli)
            for eps in (0.25, 0.5, 1.0):
                lam = sorted(set(
                    int(i) for i in rng.integers(0, g.order, 2)))
                poly = bpb_search(g, lam, eps)
                poly.validate()
                assert poly.l1 <= 1 + eps + 1e-8
                for j in poly.lambda_freqs:
                    assert abs(poly.transform[j] - 1) <= 1e-8
                off = set(range(g.order)) - set(poly.allowed_support)
                for j in off:
                    assert abs(poly.transform[j]) <= 1e-10

    def test_simplex_certificate_on_search(self):
        g = fb.make_group([2, 4])
        sol = lp_min_l1(g, [1, 7], list(range(8)))
        assert sol.simplex.feasibility_residual < 1e-9
        assert sol.simplex.min_reduced_cost > -1e-9

    def test_bound_report(self):
        poly = bpb_search(fb.make_group([4]), [1], 0.5)
        report = poly.bound_report
        assert report.support_size == len(poly.actual_support)
        assert report.c_configured == 32.0
        assert "stand-in" in report.note

    def test_runs_on_quotient_space(self):
        g = fb.make_group([4])
        k = fb.subgroup_span(g, [2])
        iso = fb.quotient_dual_iso(g, k)
        poly = bpb_search(iso, [0], 0.5)
        assert poly.l1 <= 1.5 + 1e-9
        assert poly.transform[0] == pytest.approx(1.0, abs=1e-8)
