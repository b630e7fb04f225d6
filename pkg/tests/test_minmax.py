import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize

from axidirect import minmax as mm
from axidirect.errors import OutOfRange
from axidirect.hardy import WeightParams


def quad_direct(alpha, gamma, B):
    # independent oracle: adaptive quadrature of the direct functional at the extremal pair
    g = gamma / (1 + alpha)
    lam = (1 - B) * (1 + g) / (1 - B ** (1 + g))

    def vp(z):
        return 1 - lam * z ** g

    kw = dict(limit=400, epsabs=1e-14, epsrel=1e-13)
    I1 = quad(lambda z: vp(z) * z ** -g, B, 1, **kw)[0]
    C = -(1 - g) / (1 - B ** (1 - g)) * I1
    num = quad(lambda z: vp(z) * (vp(z) + C) * z ** -g, B, 1, **kw)[0]
    a = quad(lambda z: vp(z) ** 2 * z ** -g, B, 1, **kw)[0]
    b = quad(lambda z: (vp(z) + C) ** 2 * z ** -g, B, 1, **kw)[0]
    return num / np.sqrt(a * b)


class TestMuAnalytic:
    def test_b_zero(self):
        assert mm.mu_analytic(0.39, 0.6, 0.0) == pytest.approx(np.sqrt(1 - (0.6 / 1.39) ** 2), abs=1e-15)
        assert mm.mu_analytic(0.39, 0.6, 0.0) == pytest.approx(0.90204, abs=1e-5)

    def test_gamma_zero(self):
        for B in (0.0, 1e-4, 0.3):
            assert mm.mu_analytic(0.7, 0.0, B) == pytest.approx(1.0, abs=1e-15)

    def test_b_to_one(self):
        assert mm.mu_analytic(0.39, 1.2, 1 - 1e-9) == pytest.approx(1.0, abs=1e-6)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            mm.mu_analytic(0.0, 1.0, 0.0)
        with pytest.raises(OutOfRange):
            mm.mu_analytic(0.0, 0.5, 1.0)

    def test_continuous_through_gamma_tilde_one(self):
        B = 1e-3
        a = mm.mu_analytic(0.0, 1.0, B)
        b = mm.mu_analytic(0.0, 1.0 + 1e-7, B)
        assert a == pytest.approx(b, abs=1e-6)

    def test_monotone(self):
        gs = np.linspace(0, 1.3, 30)
        mu = [mm.mu_analytic(0.39, g, 1e-3) for g in gs]
        assert np.all(np.diff(mu) < 0)
        Bs = np.linspace(0, 0.99, 30)
        mu = [mm.mu_analytic(0.39, 0.8, B) for B in Bs]
        assert np.all(np.diff(mu) > 0)


class TestMuDirect:
    @pytest.mark.parametrize("gamma", [0.2, 0.6, 1.0])
    @pytest.mark.parametrize("B", [0.0, 1e-4, 1e-2])
    def test_matches_analytic(self, gamma, B):
        assert abs(mm.mu_direct(0.39, gamma, B) - mm.mu_analytic(0.39, gamma, B)) <= 1e-6

    def test_quad_oracle(self):
        B = 0.01 ** 1.39
        assert mm.mu_direct(0.39, 0.6, B) == pytest.approx(quad_direct(0.39, 0.6, B), abs=1e-9)

    def test_gamma_zero_exact(self):
        assert mm.mu_direct(0.39, 0.0, 0.01) == pytest.approx(1.0, abs=1e-12)

    def test_extremal_attains_sup_bound(self):
        a, g, B = 0.39, 0.8, 1e-3
        gt = g / (1 + a)
        ratio = mm.direct_quotient(a, g, B)
        bound = (1 - B ** (1 - gt)) / (1 - gt) - (1 - B) ** 2 * (1 + gt) / (1 - B ** (1 + gt))
        assert ratio == pytest.approx(bound, rel=1e-10)

    def test_perturbation_does_not_lower(self):
        a, g, B = 0.39, 0.6, 1e-2
        lam = (1 - B) * (1 + g / 1.39) / (1 - B ** (1 + g / 1.39))
        base = mm.mu_direct(a, g, B)
        for eps in (0.05, -0.1, 0.3):
            def vp(z, eps=eps):
                return 1 - lam * z ** (g / 1.39) + eps * np.cos(2 * np.pi * (z - B) / (1 - B))
            assert mm.mu_direct(a, g, B, v_prime=vp) >= base - 1e-10


class TestCoefficients:
    def test_bounds(self):
        az, ar = mm.coefficient_bounds(0.39)
        assert 0.72 <= az <= 0.73
        assert az == pytest.approx(0.724611, abs=1e-6)
        assert 0.605 <= ar <= 0.61
        assert ar == pytest.approx(0.61, abs=1e-12)

    def test_interior_extremum_smaller(self):
        x = np.linspace(1, 10, 100001)
        assert np.max(np.abs(np.sin(x) / x - 0.39)) < 0.61

    def test_comparison_function(self):
        assert mm.comparison_function(0.39, 0.6) == pytest.approx(2 * np.sqrt(2) * 0.61 / 1.99, rel=1e-12)
        assert mm.comparison_function(0.39, 0.6) == pytest.approx(0.8670, abs=1e-4)
        assert mm.comparison_function(0.39, 0.0) == pytest.approx(1.2412, abs=1e-4)


def brute_lb(w):
    Dp = (w.alpha + 1 + w.gamma) ** 2 - 1
    Dm = (w.alpha + 1 - w.gamma) ** 2 - 1
    D0 = (w.alpha + 1) ** 2 - w.gamma ** 2 - 1

    def f(x):
        s, t = np.exp(x[0]), np.clip(x[1], 0, 1)
        return (1 + s + D0 * t) / np.sqrt((1 + w.d ** 2 * s + Dp * t) * (1 + w.e ** 2 * s + Dm * t))

    s = np.concatenate([[0.0], np.logspace(-5, 5, 2001)])
    t = np.linspace(0, 1, 1001)
    S, T = np.meshgrid(s, t)
    val = (1 + S + D0 * T) / np.sqrt((1 + w.d ** 2 * S + Dp * T) * (1 + w.e ** 2 * S + Dm * T))
    i = np.unravel_index(np.argmin(val), val.shape)
    best = val[i]
    if S[i] > 0:
        res = minimize(f, [np.log(S[i]), T[i]], method="Nelder-Mead",
                       options=dict(xatol=1e-12, fatol=1e-14))
        best = min(best, res.fun)
    return best


class TestLowerBound:
    @pytest.mark.parametrize("params", [(0.39, 0.6, 0.1, 1.2), (0.39, 0.6, 1.0, 1.2),
                                        (0.39, 0.3, 0.5, 1.1), (0.0, 1.2, 0.8, 1.0)])
    def test_against_brute_force(self, params):
        w = WeightParams(*params)
        assert mm.lower_bound(w) == pytest.approx(brute_lb(w), abs=2e-6)
        assert mm.lower_bound(w) <= brute_lb(w) + 1e-12

    def test_value(self):
        assert mm.lower_bound(WeightParams(0.39, 0.6, 0.1, 1.2)) == pytest.approx(0.89292, abs=1e-5)

    def test_gamma_zero(self):
        assert mm.lower_bound(WeightParams(0.39, 0.0, 0.5, 1.1)) == pytest.approx(1.0, abs=1e-14)

    def test_at_most_one(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            a = rng.uniform(0, 1)
            w = WeightParams(a, a + rng.uniform(0, 1), rng.uniform(0.05, 1), rng.uniform(1, 2))
            assert mm.lower_bound(w) <= 1 + 1e-14


class TestWindow:
    def test_solvable(self):
        r = mm.window_check(WeightParams(0.39, 0.6, 0.1, 1.2))
        assert r.solvable and r.delta > 0
        assert r.delta == pytest.approx(r.LB - r.CF)
        assert abs(r.delta - 0.027) < 0.01

    def test_not_solvable(self):
        assert not mm.window_check(WeightParams(0.39, 0.6, 1.0, 1.2)).solvable

    def test_gamma_zero_not_solvable(self):
        assert not mm.window_check(WeightParams(0.39, 0.0, 0.1, 1.2)).solvable

    def test_window_opens_and_closes(self):
        flags = [r.solvable for r in mm.window_sweep(0.39, 0.1, 1.2, np.linspace(0, 1.6, 33))]
        changes = np.flatnonzero(np.diff(np.array(flags, dtype=int)))
        assert not flags[0] and not flags[-1] and len(changes) == 2

    def test_csv(self, tmp_path):
        rows = mm.window_sweep(0.39, 0.1, 1.2, [0.5, 0.6])
        p = mm.write_reports(tmp_path / "w.csv", rows)
        head = p.read_text().splitlines()[0]
        assert head == "alpha,gamma,d,e,B,mu0,LB,CF,delta,solvable"


class TestInfSup:
    def test_identity_case(self):
        assert mm.inf_sup_discrete(WeightParams(0.39, 0.0, 1.0, 1.0), n=12) == pytest.approx(1.0, abs=1e-10)

    def test_one_dimensional_restriction(self):
        for g in (0.3, 0.6, 1.0):
            w = WeightParams(0.39, g, 0.1, 1.2)
            b0 = 0.01
            val = mm.inf_sup_1d(w, b0=b0, b1=1.0, n=400)
            assert val == pytest.approx(mm.mu_analytic(0.39, g, b0 ** 1.39), abs=1e-3)

    def test_above_lower_bound(self):
        w = WeightParams(0.39, 0.6, 0.1, 1.2)
        assert mm.inf_sup_discrete(w, n=32) >= mm.lower_bound(w) - 0.02

    def test_refinement_moves_toward_lower_bound(self):
        # geometric y nodes: refinement moves the value toward LB, not away
        w = WeightParams(0.39, 0.6, 1.0, 1.0)
        a, b = mm.inf_sup_discrete(w, n=16), mm.inf_sup_discrete(w, n=32)
        assert abs(b - mm.lower_bound(w)) < abs(a - mm.lower_bound(w)) + 1e-3
