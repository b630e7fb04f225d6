import json

import numpy as np
import pytest

from axidirect import hardy
from axidirect.errors import BadInterval, DegenerateWeight, NonCompactSupport


class TestConstants:
    @pytest.mark.parametrize("p,g,expected", [(2, 0, 2.0), (2, 1, 1.0), (1, 0.5, 2.0)])
    def test_hardy_constant(self, p, g, expected):
        assert hardy.hardy_constant(p, g) == pytest.approx(expected, rel=1e-15)

    def test_degenerate(self):
        with pytest.raises(DegenerateWeight):
            hardy.hardy_constant(2, -1)

    def test_box_values(self):
        assert hardy.box_lower_bound(0.0, 1.0, np.exp(np.pi)) == pytest.approx(1.25 ** -0.5, rel=1e-12)
        assert hardy.box_lower_bound(1.0, 2.0, 2.0 * np.exp(np.pi)) == pytest.approx(2 ** -0.5, rel=1e-12)

    def test_box_limit_and_monotone(self):
        g = 0.4
        vals = [hardy.box_lower_bound(g, 1.0, b) for b in (2.0, 10.0, 1e3, 1e8, 1e300)]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(hardy.hardy_constant(2, g), rel=1e-4)
        assert all(v <= hardy.hardy_constant(2, g) for v in vals)

    def test_bad_interval(self):
        with pytest.raises(BadInterval):
            hardy.box_lower_bound(0.0, 2.0, 1.0)


class TestWeightParams:
    def test_derived(self):
        w = hardy.WeightParams(0.39, 0.6, 0.1, 1.2)
        assert w.beta_plus == pytest.approx(0.495)
        assert w.beta_minus == pytest.approx(-0.105)
        assert 4 * w.delta_plus == pytest.approx((1.39 + 0.6) ** 2 - 1)
        assert 4 * w.delta_minus == pytest.approx((1.39 - 0.6) ** 2 - 1)
        assert 4 * w.delta_zero == pytest.approx(1.39 ** 2 - 0.36 - 1)
        assert w.gamma_tilde == pytest.approx(0.6 / 1.39)
        assert w.admissible()
        assert w.spectral_condition() is True
        assert hardy.WeightParams(0.39, 0.6, 1.0, 1.2).spectral_condition() is False

    def test_not_admissible(self):
        assert not hardy.WeightParams(0.39, 0.2, 0.1, 1.2).admissible()


class TestVerifier:
    def test_simple_box(self):
        f = hardy.Bump((0.0, 1.0, 0.0, 1.0), 1, 1)
        rep = hardy.verify_inequality(f, "hardy_2", gamma=0.0)
        assert rep.converged and rep.holds and rep.ratio < 1

    def test_box_extremal_reaches_bound(self):
        g, a, b = 0.3, 0.2, 3.0
        prof = hardy.box_extremal(g, a, b)
        rep = hardy.verify_inequality(prof, "hardy_2", gamma=g)
        measured = rep.ratio * hardy.hardy_constant(2, g)
        assert measured == pytest.approx(hardy.box_lower_bound(g, a, b), rel=1e-6)

    def test_box_extremal_in_two_dimensions(self):
        g, a, b = 0.0, 0.1, 2.0
        f = hardy.box_extremal(g, a, b, x_range=(0.0, 1.0))
        rep = hardy.verify_inequality(f, "hardy_2", gamma=g)
        measured = rep.ratio * hardy.hardy_constant(2, g)
        assert abs(measured / hardy.box_lower_bound(g, a, b) - 1) < 0.02

    def test_noncompact_rejected(self):
        prof = hardy.Profile(lambda y: y, lambda y: np.ones_like(y), (0.0, 1.0))
        with pytest.raises(NonCompactSupport):
            hardy.verify_inequality(prof, "hardy_2", gamma=0.0)

    def test_report_json(self, tmp_path):
        f = hardy.Bump((0.0, 1.0, 0.0, 1.0), 2, 3)
        rep = hardy.verify_inequality(f, "small_p", p=3.0, beta=0.2, c=1.0)
        d = json.loads(rep.to_json())
        assert set(d) == {"lhs", "rhs", "ratio", "converged"}

    def test_one_dimensional_sup(self):
        prof = hardy.Profile(lambda y: y ** 2 * (2 - y), lambda y: 4 * y - 3 * y ** 2, (0.0, 2.0),
                             vanish_right=False)
        for q, beta in [(2.0, 0.3), (3.0, -0.5), (1.5, 0.9)]:
            rep = hardy.verify_inequality(prof, "sup_1d", q=q, beta=beta)
            assert rep.holds
        rep = hardy.verify_inequality(prof, "sup_1d_l1", beta=0.4)
        assert rep.holds

    def test_one_dimensional_interpolation(self):
        prof = hardy.Profile(lambda y: y ** 3 * np.exp(-y), lambda y: (3 * y ** 2 - y ** 3) * np.exp(-y),
                             (0.0, 3.0), vanish_right=False)
        for p, beta in [(2.0, 0.0), (4.0, 0.5), (np.inf, 0.2)]:
            assert hardy.verify_inequality(prof, "interp_1d", p=p, beta=beta).holds

    def test_large_p_unweighted_gradient(self):
        f = hardy.Bump((-0.5, 0.5, 0.0, 1.0), 3, 3)
        rep = hardy.verify_inequality(f, "large_p", p=4.0, beta=0.5, c=1.0)
        assert rep.converged and rep.holds


def power_ratio(kappa, beta, p, R, shift):
    # closed-form lhs/rhs of the 1D interpolation inequality for f = y^kappa on (0, R)
    delta = (1 + beta) / 2 + 1 / p + shift
    e = p * (kappa - delta) + 1
    if e <= 0:
        return np.inf
    lhs = (R ** e / e) ** (1 / p)
    rhs2 = kappa ** 2 * R ** (2 * kappa - 1 - beta) / (2 * kappa - 1 - beta)
    c = 2 ** (2 / p) * (1 / (1 + beta)) ** ((p + 2) / (2 * p))
    return lhs / (c * np.sqrt(rhs2))


def test_interpolation_exponent_cannot_be_enlarged():
    beta, p, R = 0.2, 3.0, 1.0
    thr = (1 + beta) / 2
    kappas = thr + np.array([1e-1, 1e-2, 1e-3, 1e-4])
    sharp = [power_ratio(k, beta, p, R, 0.0) for k in kappas]
    assert max(sharp) <= 1.0
    enlarged = [power_ratio(k, beta, p, R, 0.05) for k in kappas]
    assert enlarged[-1] > 1.0


def test_random_bump_suite_small():
    res = hardy.random_bump_suite(60, seed=3)
    for name, reps in res.items():
        assert all(r.holds and r.converged for r in reps), name
