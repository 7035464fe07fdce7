import math

import numpy as np
import pytest

import finabel as fb
from finabel.certifier import RiemannFrequency, certify_tws, riemann_a_norm, \
    skn_finite
from finabel.errors import NBelowSeparation, PreconditionRounding
from finabel.fourier import DUAL, GroupFunction, a_norm, dft, idft
from finabel.rounding import round_int


def fn(moduli, values):
    return GroupFunction(fb.make_group(moduli),
                         np.asarray(values, dtype=complex))


def direct_rounded_a_norm(f):
    return a_norm(round_int(f).rounded)


class TestCertifyTws:
    def test_exact_integer_input(self):
        cert = certify_tws(fn([2], [1, 1]), 0.5, 0.5)
        assert cert.verdict
        assert cert.rounded_a_norm == cert.f_a_norm == 1.0
        assert cert.rounded_a_norm <= 1.5 * 1 + 0.5

    def test_base_case(self):
        cert = certify_tws(fn([6], [0.2, -0.1, 0.05, 0, 0.15, -0.2]),
                           0.5, 0.5)
        assert cert.verdict and cert.root.kind == "base"
        assert cert.rounded_a_norm == 0.0

    def test_z4_perturbed_haar(self):
        cert = certify_tws(fn([4], [2.02, 0, 1.98, 0]), 0.5, 0.5)
        assert cert.verdict
        root = cert.root
        assert root.k_key is not None and root.h_key is not None
        for name in ("claim_a_pairing", "claim_b_transform_sup",
                     "claim_c_band_support", "claim_d_witness_l1"):
            assert root.claims[name].passed
        direct = direct_rounded_a_norm(fn([4], [2.02, 0, 1.98, 0]))
        assert direct <= (1.5 * cert.f_a_norm + 0.5) + 1e-8
        assert cert.rounded_a_norm == pytest.approx(direct)

    def test_two_step_recursion(self):
        values = np.ones(16)
        values[0] += 1.0
        cert = certify_tws(fn([16], values), 0.25, 0.25)
        assert cert.verdict
        assert cert.root.kind == "step"
        assert cert.root.child is not None

    def test_rejects_far_input(self):
        with pytest.raises(PreconditionRounding):
            certify_tws(fn([4], [1.2, 0, 1.2, 0]), 0.5, 0.5)

    def test_eps_domain(self):
        with pytest.raises(PreconditionRounding):
            certify_tws(fn([2], [1, 1]), 0.0, 0.5)
        with pytest.raises(PreconditionRounding):
            certify_tws(fn([2], [1, 1]), 0.5, 1.5)

    def test_exact_spectral_split_each_step(self):
        cert = certify_tws(fn([4], [2.02, 0, 1.98, 0]), 0.5, 0.5)
        step = cert.root
        while step is not None and step.kind == "step":
            assert step.claims["ju_exact_split"].passed
            assert step.claims["projections_round_alike"].passed
            step = step.child

    def test_certificate_json(self):
        cert = certify_tws(fn([4], [2.02, 0, 1.98, 0]), 0.5, 0.5)
        data = cert.to_json_dict()
        assert data["verdict"] is True
        assert data["root"]["kind"] == "step"
        assert "schedule" in data["root"]
        assert data["root"]["schedule"]["etas"][0] <= 0.25

    def test_schedule_caps(self):
        cert = certify_tws(fn([4], [2.02, 0, 1.98, 0]), 0.5, 0.5)
        sched = cert.root.schedule
        for i, cap in enumerate(sched.f_caps):
            assert sched.etas[i + 1] <= (0.5 / 4) / cap + 1e-15

    @pytest.mark.parametrize("eps", [0.25, 0.5, 1.0])
    def test_verdicts_confirmed_independently(self, eps):
        rng = np.random.default_rng(51)
        for moduli in ([4], [2, 2], [8], [2, 4], [9]):
            g = fb.make_group(moduli)
            base = np.zeros(g.order)
            sub = fb.enumerate_subgroups(g)[1]
            base[list(sub.key)] = 1.0
            base += rng.uniform(-0.015, 0.015, g.order)
            f = GroupFunction(g, base.astype(complex))
            cert = certify_tws(f, eps, eps)
            if cert.verdict:
                assert direct_rounded_a_norm(f) <= \
                    (1 + eps) * a_norm(f) + eps + 1e-8


class TestSknFinite:
    def test_two_point_example(self):
        g = fb.make_group([2])
        mu = idft(GroupFunction(g, [1.0, 0.01], DUAL))
        assert np.allclose(mu.values.real, [1.01, 0.99])
        result = skn_finite(mu, 0.5, 0.5)
        assert result.verdict
        assert result.mu_norm == pytest.approx(1.0)
        assert result.mu_z_norm == pytest.approx(1.0)
        assert np.allclose(dft(result.mu_z).values, [1.0, 0.0], atol=1e-12)

    def test_integer_transform_fixed_point(self):
        g = fb.make_group([4])
        mu = idft(GroupFunction(g, [1.0, 0.0, 1.0, 0.0], DUAL))
        result = skn_finite(mu, 0.5, 0.5)
        assert result.verdict
        assert np.abs(result.mu_z.values - mu.values).max() < 1e-12

    def test_tiny_transform_rounds_to_zero(self):
        g = fb.make_group([4])
        mu = idft(GroupFunction.constant(g, 0.01, DUAL))
        result = skn_finite(mu, 0.5, 0.5)
        assert result.verdict
        assert np.abs(result.mu_z.values).max() == 0.0

    def test_norm_bridge(self):
        rng = np.random.default_rng(52)
        for moduli in ([8], [3, 3], [2, 2, 2], [16]):
            g = fb.make_group(moduli)
            hat = rng.uniform(-0.01, 0.01, g.order)
            neg = np.array([g.neg(i) for i in range(g.order)])
            hat = 0.5 * (hat + hat[neg])
            mu = idft(GroupFunction(g, hat.astype(complex), DUAL))
            result = skn_finite(mu, 0.5, 0.5)
            assert result.bridge_gap <= 1e-10

    def test_verdict_matches_transform_certificate(self):
        g = fb.make_group([4])
        mu = idft(GroupFunction(g, [1.0, 0.01, 1.0, 0.01], DUAL))
        result = skn_finite(mu, 0.5, 0.5)
        transform = dft(mu)
        cert = certify_tws(transform.real_part().with_side("primal"),
                           0.5, 0.5)
        assert result.certificate.verdict == cert.verdict

    def test_rejects_far_transform(self):
        g = fb.make_group([2])
        mu = idft(GroupFunction(g, [1.0, 0.7], DUAL))
        with pytest.raises(PreconditionRounding):
            skn_finite(mu, 0.5, 0.5)


class TestRiemann:
    def test_single_frequency_constant(self):
        table = riemann_a_norm([1], 1, [RiemannFrequency((0,), (1,), 1.0)],
                               [16, 64, 256, 1024])
        for _, value in table.entries:
            assert value == pytest.approx(1.0, abs=1e-12)

    def test_two_frequencies_to_4_over_pi(self):
        freqs = [RiemannFrequency((0,), (0,), 1.0),
                 RiemannFrequency((0,), (1,), 1.0)]
        table = riemann_a_norm([1], 1, freqs, [512, 8192])
        v512 = dict(table.entries)[512]
        v8192 = dict(table.entries)[8192]
        assert abs(v512 - v8192) <= 1e-3
        assert v8192 == pytest.approx(4 / math.pi, abs=1e-6)

    def test_no_free_part_is_exact(self):
        g = fb.make_group([4])
        freqs = [RiemannFrequency((0,), (), 1.0),
                 RiemannFrequency((2,), (), 0.5)]
        table = riemann_a_norm([4], 0, freqs, [1, 7, 100])
        density = np.zeros(4, dtype=complex)
        for fr in freqs:
            density += fr.coeff * np.array(
                [fb.pair(g, g.index(fr.chi), x) for x in range(4)])
        expected = float(np.abs(density).mean())
        for _, value in table.entries:
            assert value == pytest.approx(expected, abs=1e-12)

    def test_separation_point(self):
        freqs = [RiemannFrequency((0,), (0,), 1.0),
                 RiemannFrequency((0,), (4,), 1.0)]
        table = riemann_a_norm([1], 1, freqs, [3, 8])
        assert table.n0 == 3
        with pytest.raises(NBelowSeparation):
            riemann_a_norm([1], 1, freqs, [2, 8])

    def test_duplicate_frequency_rejected(self):
        freqs = [RiemannFrequency((0,), (1,), 1.0),
                 RiemannFrequency((0,), (1,), 0.5)]
        with pytest.raises(NBelowSeparation):
            riemann_a_norm([1], 1, freqs, [4])

    def test_cauchy_ladder(self):
        freqs = [RiemannFrequency((0,), (0,), 1.0),
                 RiemannFrequency((0,), (1,), 1.0),
                 RiemannFrequency((0,), (3,), 0.5)]
        table = riemann_a_norm([1], 1, freqs,
                               [64, 128, 256, 512, 1024, 2048])
        gaps = [g for _, g in table.gaps][:-1]
        for a, b in zip(gaps, gaps[1:]):
            assert b <= a + 1e-12

    def test_finite_times_free_mixture(self):
        freqs = [RiemannFrequency((1,), (1,), 1.0),
                 RiemannFrequency((0,), (0,), 0.5)]
        table = riemann_a_norm([2], 1, freqs, [32, 128])
        assert table.entries[0][1] > 0
