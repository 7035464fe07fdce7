"""Acceptance suite: one test per criterion, each printing a pass/fail
line with its runtime against the stated target."""

import itertools
import math
import time

import numpy as np

import finabel as fb
from finabel.bpb_lp import GroupSpace, bpb_search, lp_min_l1
from finabel.catalog import (
    all_abelian_groups_upto,
    catalog_groups_64,
    catalog_groups_256,
    corkey_catalog,
    random_measure_with_near_integer_transform,
    tws_catalog,
)
from finabel.certifier import RiemannFrequency, certify_tws, riemann_a_norm, \
    skn_finite
from finabel.config import DEFAULT_CONFIG
from finabel.fourier import GroupFunction, a_norm, dft, idft, l1_norm, \
    subgroup_haar
from finabel.group_core import annihilator, enumerate_subgroups
from finabel.idempotent import corkey_build
from finabel.pipeline import glow_run, make_sequence, najp_run, \
    synth_measure_detailed
from finabel.rounding import real_reduce, round_int
from finabel.selftest import run_selftest
from oracles import brute_force_min_l1


class _Timer:
    def __init__(self, label, target_seconds):
        self.label = label
        self.target = target_seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        status = "FAIL" if exc_type else "PASS"
        print(f"[acceptance] {self.label}: {status} "
              f"({elapsed:.2f}s, target {self.target}s)")
        if exc_type is None:
            assert elapsed < self.target, \
                f"{self.label} exceeded runtime target: {elapsed:.2f}s"
        return False


def test_criterion_01_duality_identities():
    with _Timer("1 duality identities on every group of order <= 64", 30):
        checked = 0
        for group in all_abelian_groups_upto(64):
            for sub in enumerate_subgroups(group):
                ann = annihilator(group, sub)
                assert ann.order * sub.order == group.order
                hat = dft(subgroup_haar(group, sub)).values
                indicator = np.zeros(group.order)
                indicator[list(ann.key)] = 1.0
                assert np.abs(hat - indicator).max() <= 1e-12
                checked += 1
        assert checked > 5000


def test_criterion_02_parseval_inversion():
    with _Timer("2 Parseval and inversion on the 256-order catalog", 10):
        groups = catalog_groups_256()
        assert len(groups) == 12
        rng = np.random.default_rng(DEFAULT_CONFIG.seed + 2)
        for group in groups:
            for _ in range(50):
                values = rng.normal(0, 1, group.order) \
                    + 1j * rng.normal(0, 1, group.order)
                f = GroupFunction(group, values)
                hat = dft(f)
                lhs = float((np.abs(hat.values) ** 2).sum())
                rhs = float((np.abs(values) ** 2).mean())
                assert abs(lhs - rhs) <= 1e-9 * rhs
                back = idft(hat)
                assert np.abs(back.values - values).max() <= 1e-10


def test_criterion_03_rounding_additivity():
    with _Timer("3 rounding additivity, 10^4 seeded triples", 10):
        rng = np.random.default_rng(DEFAULT_CONFIG.seed + 3)
        groups = catalog_groups_64()
        failures = 0
        cap = 1 / 3 - 1e-9
        for accepted in range(10_000):
            group = groups[accepted % len(groups)]
            n = group.order
            # draw the second fractional part inside the window that
            # keeps all three distances below 1/3
            g_frac = rng.uniform(-cap, cap, n)
            h_frac = rng.uniform(np.maximum(-cap, -cap - g_frac),
                                 np.minimum(cap, cap - g_frac))
            g_vals = rng.integers(-4, 5, n) + g_frac
            h_vals = rng.integers(-4, 5, n) + h_frac
            s_vals = g_vals + h_vals
            assert np.abs(s_vals - np.rint(s_vals)).max() < 1 / 3
            fg = GroupFunction(group, g_vals.astype(complex))
            fh = GroupFunction(group, h_vals.astype(complex))
            fs = GroupFunction(group, s_vals.astype(complex))
            lhs = round_int(fs).integer_values()
            rhs = round_int(fg).integer_values() \
                + round_int(fh).integer_values()
            failures += int(not np.array_equal(lhs, rhs))
        assert failures == 0


def test_criterion_04_lp_oracle():
    with _Timer("4 LP against the brute-force minimizer", 60):
        for group in all_abelian_groups_upto(8):
            space = GroupSpace(group)
            freqs = range(group.order)
            for size in range(1, min(4, group.order) + 1):
                for allowed in itertools.combinations(freqs, size):
                    lams = [lam for lam_size in range(1, size + 1)
                            for lam in itertools.combinations(allowed,
                                                              lam_size)]
                    for lam in lams:
                        sol = lp_min_l1(group, lam, allowed)
                        ref = brute_force_min_l1(space, lam, allowed)
                        assert abs(sol.optimum - ref) <= 1e-6, \
                            (group.spec(), lam, allowed, sol.optimum, ref)
        # every interpolation-search output satisfies its contract
        rng = np.random.default_rng(DEFAULT_CONFIG.seed + 4)
        for group in all_abelian_groups_upto(8):
            for eps in (0.25, 0.5, 1.0):
                lam = sorted(set(int(i) for i in
                                 rng.integers(0, group.order, 2)))
                poly = bpb_search(group, lam, eps)
                for j in poly.lambda_freqs:
                    assert abs(poly.transform[j] - 1.0) <= 1e-8
                assert poly.l1 <= 1 + eps + 1e-8


def test_criterion_05_corkey_suite():
    with _Timer("5 chain selection suite", 120):
        etas = [1 / 4, 1 / 8, 1 / 16, 1 / 32]
        count = 0
        for name, fn in corkey_catalog():
            chains = corkey_build(fn, etas)
            for chain in chains:
                assert chain.all_passed, (name, chain.eta, {
                    k: v for k, v in chain.checks.items() if not v.passed})
                assert chain.checks["dec_identity"].lhs == 0.0
                assert chain.k_group.order >= \
                    chain.checks["lowerk_size"].rhs - 1e-9
            for prev, cur in zip(chains, chains[1:]):
                assert cur.k_group.elements <= prev.k_group.elements
            count += 1
        assert count >= 50


def test_criterion_06_tws_certificates():
    with _Timer("6 certificate catalog with independent confirmation", 300):
        instances = tws_catalog()
        assert len(instances) >= 200
        eps_seen = set()
        for inst in instances:
            eps_seen.add(inst.eps)
            f = inst.function()
            cert = certify_tws(f, inst.eps, inst.eps)
            assert cert.verdict, inst.name
            # independent direct computation against the bound
            direct = a_norm(round_int(f).rounded)
            bound = (1 + inst.eps) * a_norm(f) + inst.eps
            assert direct <= bound + 1e-8, inst.name
            if not inst.perturbed:
                assert cert.rounded_a_norm == cert.f_a_norm, inst.name
        assert eps_seen == {0.25, 0.5, 1.0}


def test_criterion_07_skn_bridge():
    with _Timer("7 measure-norm bridge and verdict agreement", 30):
        for group in catalog_groups_256():
            rng = np.random.default_rng(DEFAULT_CONFIG.seed + 7)
            for i in range(100):
                mu = random_measure_with_near_integer_transform(
                    group, rng, structured=(i % 3 == 0))
                transform = dft(mu)
                bridge_gap = abs(l1_norm(mu)
                                 - a_norm(transform.with_side("primal")))
                assert bridge_gap <= 1e-10
                result = skn_finite(mu, 0.5, 0.5)
                reduced = real_reduce(transform).real.with_side("primal")
                cert = certify_tws(reduced, 0.5, 0.5)
                assert result.certificate.verdict == cert.verdict


def test_criterion_08_riemann_convergence():
    with _Timer("8 Riemann ladder convergence", 20):
        two = riemann_a_norm(
            [1], 1,
            [RiemannFrequency((0,), (0,), 1.0),
             RiemannFrequency((0,), (1,), 1.0)],
            [512, 8192])
        values = dict(two.entries)
        assert abs(values[512] - values[8192]) <= 1e-3
        assert abs(values[8192] - 4 / math.pi) <= 1e-4
        single = riemann_a_norm(
            [1], 1, [RiemannFrequency((0,), (1,), 1.0)],
            [16, 64, 256, 512, 8192])
        for _, value in single.entries:
            assert abs(value - 1.0) <= 1e-12


def test_criterion_09_pipelines():
    with _Timer("9 pipeline drivers over all 2-chains", 120):
        # literal-mode sequence formula
        seq_lit = make_sequence(1.0, 2, "literal_glow")
        assert abs(seq_lit.log_a[1] - (-18 - math.log(9))) <= 1e-9

        # hand-checked instance
        group = fb.make_group([4])
        seq = make_sequence(1.0, 0, "empirical", {"values": [0.5, 0.02]})
        synth = synth_measure_detailed(group, seq, "nested_annihilator", 0)
        assert abs(synth.norm - 0.5) <= 1e-10
        report = glow_run(group, synth.mu, seq)
        assert abs(report.steps[1]["tau_norm"] - 0.02) <= 1e-10
        rho_hat = np.zeros(4, dtype=complex)
        for idx, a in zip(synth.level_sets, (0.5, 0.02)):
            rho_hat[list(idx)] = a * a
        assert np.abs(rho_hat - np.array([0.25, 0, 0.0004, 0])).max() \
            <= 1e-10
        assert report.final["rho_equals_mu_sq"]
        assert report.all_bound_verdicts
        najp = najp_run(group, synth.mu, seq)
        assert najp.all_bound_verdicts

        # every 2-chain of every catalog group of order <= 64
        runs = 0
        for g in catalog_groups_64():
            subs = enumerate_subgroups(g)
            for top in subs:
                for bottom in subs:
                    if not bottom.elements < top.elements:
                        continue
                    synth = synth_measure_detailed(
                        g, seq, "nested_annihilator", 0,
                        chain=[top, bottom])
                    rep = glow_run(g, synth.mu, seq)
                    assert rep.all_bound_verdicts, \
                        (g.spec(), top.key, bottom.key)
                    runs += 1
        assert runs >= 200


def test_criterion_10_determinism(tmp_path):
    with _Timer("10 byte-identical selftest artifact trees", 60):
        first = tmp_path / "run1"
        second = tmp_path / "run2"
        assert run_selftest(first, DEFAULT_CONFIG) == 0
        assert run_selftest(second, DEFAULT_CONFIG) == 0
        names1 = sorted(p.name for p in first.iterdir())
        names2 = sorted(p.name for p in second.iterdir())
        assert names1 == names2 and len(names1) >= 10
        for name in names1:
            assert (first / name).read_bytes() == \
                (second / name).read_bytes(), name
