import numpy as np
import pytest

import finabel as fb
from finabel.errors import GroupMismatch, SideMismatch
from finabel.fourier import GroupFunction, l1_norm
from oracles import naive_convolve, naive_dft


def rand_fn(group, rng, side="primal"):
    v = rng.normal(0, 1, group.order) + 1j * rng.normal(0, 1, group.order)
    return GroupFunction(group, v, side)


class TestDft:
    def test_dirac_to_ones(self):
        g = fb.make_group([2])
        assert np.allclose(fb.dft(GroupFunction(g, [2, 0])).values, [1, 1])

    def test_constant_to_point_mass(self):
        g = fb.make_group([2])
        assert np.allclose(fb.dft(GroupFunction(g, [1, 1])).values, [1, 0])

    def test_haar_transform_is_annihilator_indicator(self):
        g = fb.make_group([4])
        assert np.allclose(fb.dft(GroupFunction(g, [2, 0, 2, 0])).values,
                           [1, 0, 1, 0])

    def test_matches_naive_definition(self):
        rng = np.random.default_rng(3)
        for moduli in ([5], [2, 3], [2, 2, 2], [3, 4]):
            g = fb.make_group(moduli)
            f = rand_fn(g, rng)
            assert np.allclose(fb.dft(f).values,
                               naive_dft(g, f.values), atol=1e-12)

    def test_roundtrip(self):
        rng = np.random.default_rng(4)
        for moduli in ([7], [2, 4], [3, 3, 3], [16]):
            g = fb.make_group(moduli)
            f = rand_fn(g, rng)
            back = fb.idft(fb.dft(f))
            assert np.abs(back.values - f.values).max() < 1e-10

    def test_side_tags(self):
        g = fb.make_group([4])
        f = rand_fn(g, np.random.default_rng(0))
        assert fb.dft(f).side == "dual"
        with pytest.raises(SideMismatch):
            fb.dft(fb.dft(f))
        with pytest.raises(SideMismatch):
            fb.idft(f)


class TestConvolve:
    def test_dirac_is_identity(self):
        g = fb.make_group([3, 2])
        f = rand_fn(g, np.random.default_rng(1))
        out = fb.convolve(GroupFunction.dirac_density(g), f)
        assert np.abs(out.values - f.values).max() < 1e-12

    def test_haar_idempotent(self):
        g = fb.make_group([2, 4])
        for sub in fb.enumerate_subgroups(g):
            mk = fb.subgroup_haar(g, sub)
            twice = fb.convolve(mk, mk)
            assert np.abs(twice.values - mk.values).max() < 1e-10

    def test_constants(self):
        g = fb.make_group([2])
        out = fb.convolve(GroupFunction(g, [1, 1]), GroupFunction(g, [1, 1]))
        assert np.allclose(out.values, [1, 1])

    def test_matches_naive_definition(self):
        rng = np.random.default_rng(5)
        for moduli in ([6], [2, 3], [2, 2, 2]):
            g = fb.make_group(moduli)
            f, h = rand_fn(g, rng), rand_fn(g, rng)
            assert np.allclose(fb.convolve(f, h).values,
                               naive_convolve(g, f.values, h.values),
                               atol=1e-12)

    def test_transform_multiplicativity(self):
        rng = np.random.default_rng(6)
        for moduli in ([8], [3, 5], [2, 2, 3]):
            g = fb.make_group(moduli)
            f, h = rand_fn(g, rng), rand_fn(g, rng)
            lhs = fb.dft(fb.convolve(f, h)).values
            rhs = fb.dft(f).values * fb.dft(h).values
            assert np.abs(lhs - rhs).max() < 1e-10

    def test_l1_submultiplicative(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            g = fb.make_group([2, 6])
            f, h = rand_fn(g, rng), rand_fn(g, rng)
            assert l1_norm(fb.convolve(f, h)) <= \
                l1_norm(f) * l1_norm(h) + 1e-10

    def test_group_mismatch(self):
        f = rand_fn(fb.make_group([4]), np.random.default_rng(0))
        h = rand_fn(fb.make_group([2, 2]), np.random.default_rng(0))
        with pytest.raises(GroupMismatch):
            fb.convolve(f, h)


class TestNorms:
    def test_dirac(self):
        g = fb.make_group([2])
        report = fb.norms(GroupFunction(g, [2, 0]))
        assert report.l1 == pytest.approx(1)
        assert report.linf == pytest.approx(2)
        assert report.a_norm == pytest.approx(2)

    def test_single_character(self):
        g = fb.make_group([5])
        values = [fb.pair(g, 2, x) for x in range(5)]
        report = fb.norms(GroupFunction(g, values))
        assert report.l1 == pytest.approx(1)
        assert report.linf == pytest.approx(1)
        assert report.a_norm == pytest.approx(1)

    def test_zero(self):
        report = fb.norms(GroupFunction.zero(fb.make_group([3])))
        assert (report.l1, report.linf, report.a_norm) == (0, 0, 0)

    def test_report_inequalities(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            g = fb.make_group([2, 5])
            report = fb.norms(rand_fn(g, rng))
            assert report.linf <= g.order * report.l1 + 1e-12
            assert report.l1 <= report.a_norm + 1e-12

    def test_parseval(self):
        rng = np.random.default_rng(9)
        for moduli in ([4], [3, 3], [2, 2, 2, 2], [5, 5]):
            g = fb.make_group(moduli)
            f = rand_fn(g, rng)
            lhs = (np.abs(fb.dft(f).values) ** 2).sum()
            rhs = (np.abs(f.values) ** 2).mean()
            assert abs(lhs - rhs) <= 1e-9 * rhs

    def test_algebra_norm_domination(self):
        rng = np.random.default_rng(10)
        g = fb.make_group([3, 4])
        f, h = rand_fn(g, rng), rand_fn(g, rng)
        fh, hh = fb.dft(f).values, fb.dft(h).values
        product_sum = np.abs(fh * hh).sum()
        assert product_sum <= np.abs(fh).sum() * np.abs(hh).max() + 1e-10
        assert product_sum <= np.abs(fh).sum() * np.abs(hh).sum() + 1e-10


class TestBandProject:
    def test_full_group_is_mean(self):
        g = fb.make_group([2, 3])
        f = rand_fn(g, np.random.default_rng(11))
        whole = fb.subgroup_span(g, list(range(g.order)))
        out = fb.band_project(f, whole)
        assert np.allclose(out.values, f.values.mean())

    def test_dirac_projects_to_haar(self):
        g = fb.make_group([4])
        k = fb.subgroup_span(g, [2])
        out = fb.band_project(GroupFunction.dirac_density(g), k)
        assert np.allclose(out.values, fb.subgroup_haar(g, k).values)

    @pytest.mark.parametrize("moduli", [[8], [2, 4], [3, 3], [2, 2, 2]])
    def test_coset_constancy_iff_band_support(self, moduli):
        rng = np.random.default_rng(12)
        g = fb.make_group(moduli)
        for sub in fb.enumerate_subgroups(g):
            f = rand_fn(g, rng)
            projected = fb.band_project(f, sub)
            for rep in range(g.order):
                for k in sub.key:
                    assert abs(projected.values[g.add(rep, k)]
                               - projected.values[rep]) < 1e-10
            ann = set(fb.annihilator(g, sub).key)
            hat = fb.dft(projected).values
            off = [abs(hat[r]) for r in range(g.order) if r not in ann]
            assert max(off, default=0.0) < 1e-10


class TestSpectrum:
    def test_dirac(self):
        g = fb.make_group([2])
        assert fb.spectrum_sigma(GroupFunction(g, [2, 0])) == [1]

    def test_zero_measure(self):
        assert fb.spectrum_sigma(GroupFunction.zero(fb.make_group([4]))) \
            == [0]

    def test_two_level_measure(self):
        a1, a2 = 0.5, 0.02
        g = fb.make_group([4])
        values = [a1 + a2, a1 - a2, a1 + a2, a1 - a2]
        sigma = fb.spectrum_sigma(GroupFunction(g, values))
        assert sorted(z.real for z in sigma) == \
            pytest.approx([0.0, a2, a1])

    def test_natural_spectrum_always_true(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            f = rand_fn(fb.make_group([3, 4]), rng)
            assert fb.natural_spectrum_check(f)


class TestJson:
    def test_roundtrip(self):
        g = fb.make_group([2, 3])
        f = rand_fn(g, np.random.default_rng(14))
        back = GroupFunction.from_json_dict(f.to_json_dict())
        assert back.group == g and back.side == f.side
        assert np.abs(back.values - f.values).max() < 1e-15
