import numpy as np
import pytest
from scipy.optimize import root
from scipy.special import eval_legendre

from axidirect import geometry as geo
from axidirect.errors import (EmptySpec, NegativeCount, UndersampledField,
                              ZeroVector)


def rotating_field(k, m=720):
    phi = np.linspace(-np.pi, np.pi, m + 1)
    br, bp = np.cos(k * phi), np.sin(k * phi)
    dz = br * np.cos(phi) - bp * np.sin(phi)
    dr = br * np.sin(phi) + bp * np.cos(phi)
    return geo.DirectionField(phi, dz, dr)


def potential(coeffs, delta, r, phi):
    out = 0.0
    for k, c in enumerate(coeffs):
        n = delta - 2 + k
        out = out + c * eval_legendre(n, np.cos(phi)) / r ** (n + 1)
    return out


class TestRotationNumber:
    def test_three_turn_boundary_field(self):
        assert geo.rotation_number(rotating_field(2)) == 3

    def test_constant_field(self):
        phi = np.linspace(-np.pi, np.pi, 101)
        f = geo.DirectionField(phi, np.ones_like(phi), np.zeros_like(phi))
        assert geo.rotation_number(f) == 0

    def test_dipole_trace(self):
        spec = geo.MultipoleSpec(3, [-1.0])
        assert geo.rotation_number(geo.DirectionField.from_multipole(spec, 400)) == 2

    def test_octupole_mixture_has_four_turns(self):
        spec = geo.MultipoleSpec(3, [-1.0, 0.0, -2.0])
        assert geo.rotation_number(geo.DirectionField.from_multipole(spec, 800)) == 4

    def test_sample_count_independent(self):
        spec = geo.MultipoleSpec(3, [-1.0, 0.0, -2.0])
        a = geo.rotation_number(geo.DirectionField.from_multipole(spec, 500))
        b = geo.rotation_number(geo.DirectionField.from_multipole(spec, 1000))
        assert a == b

    def test_positive_amplitude_invariance(self):
        f = rotating_field(2)
        amp = 1.5 + np.cos(3 * f.phi)
        g = geo.DirectionField(f.phi, amp * f.d_zeta, amp * f.d_rho, check_symmetry=False)
        assert geo.rotation_number(g) == geo.rotation_number(f)

    def test_undersampled_rejected(self):
        with pytest.raises(UndersampledField):
            geo.rotation_number(rotating_field(2, m=8))

    def test_zero_sample_rejected(self):
        phi = np.linspace(-np.pi, np.pi, 101)
        dz = np.ones_like(phi)
        dz[50] = 0.0
        with pytest.raises(ZeroVector):
            geo.DirectionField(phi, dz, np.zeros_like(phi))


class TestCounts:
    @pytest.mark.parametrize("args,expected", [
        ((3, 3, "bounded"), 0), ((2, 3, "exterior"), 0), ((5, 3, "exterior"), 3)])
    def test_zero_count(self, args, expected):
        assert geo.zero_count(*args) == expected

    def test_negative_count(self):
        with pytest.raises(NegativeCount):
            geo.zero_count(1, 3, "bounded")

    @pytest.mark.parametrize("rho,delta,expected", [(2, 3, 1), (5, 3, 4), (2, 5, 0)])
    def test_unsigned_dim(self, rho, delta, expected):
        assert geo.unsigned_space_dim(rho, delta) == expected


class TestLegendre:
    def test_against_scipy(self):
        x = np.linspace(-1, 1, 41)
        p, dp = geo.legendre(12, x)
        for n in range(13):
            assert np.allclose(p[n], eval_legendre(n, x), atol=1e-13)
        h = 1e-6
        xi = x[1:-1]
        fd = (eval_legendre(7, xi + h) - eval_legendre(7, xi - h)) / (2 * h)
        assert np.allclose(dp[7][1:-1], fd, atol=1e-6)


class TestMultipoleField:
    def test_dipole_on_axis(self):
        spec = geo.MultipoleSpec(3, [1.0])
        for r in (1.5, 2.0, 7.0):
            br, bp = geo.multipole_field(spec, r, 0.0)
            assert br == pytest.approx(-2 / r ** 3, rel=1e-14)
            assert bp == pytest.approx(0.0, abs=1e-15)

    def test_gradient_of_potential(self):
        spec = geo.MultipoleSpec(3, [1.0])
        r, phi, h = 2.0, np.pi / 3, 1e-5
        br, bp = geo.multipole_field(spec, r, phi)
        fr = (potential([1.0], 3, r + h, phi) - potential([1.0], 3, r - h, phi)) / (2 * h)
        fp = (potential([1.0], 3, r, phi + h) - potential([1.0], 3, r, phi - h)) / (2 * h * r)
        assert abs(br - fr) < 1e-8 and abs(bp - fp) < 1e-8

    def test_mixture_gradient(self):
        coeffs = [0.7, -0.3, 1.1, 0.4]
        spec = geo.MultipoleSpec(3, coeffs)
        r, phi, h = 1.7, 2.1, 1e-5
        br, bp = geo.multipole_field(spec, r, phi)
        fr = (potential(coeffs, 3, r + h, phi) - potential(coeffs, 3, r - h, phi)) / (2 * h)
        fp = (potential(coeffs, 3, r, phi + h) - potential(coeffs, 3, r, phi - h)) / (2 * h * r)
        assert abs(br - fr) < 1e-8 and abs(bp - fp) < 1e-8

    def test_even_mode_parity(self):
        spec = geo.MultipoleSpec(4, [1.0])
        phi = np.linspace(0.1, 1.4, 7)
        _, a = geo.multipole_field(spec, 2.0, phi)
        _, b = geo.multipole_field(spec, 2.0, np.pi - phi)
        assert np.allclose(a, -b)

    def test_empty_spec(self):
        with pytest.raises(EmptySpec):
            geo.MultipoleSpec(3, [])

    def test_harmonic_system_second_order(self):
        spec = geo.MultipoleSpec(3, [1.0, 0.5, -0.8])
        z0, r0 = 1.3, 1.1

        def residual(h):
            def b(z, r):
                return geo.multipole_field_cartesian(spec, z, r)
            bzp, brp = b(z0 + h, r0)
            bzm, brm = b(z0 - h, r0)
            bzu, bru = b(z0, r0 + h)
            bzd, brd = b(z0, r0 - h)
            _, brc = b(z0, r0)
            curl = (brp - brm) / (2 * h) - (bzu - bzd) / (2 * h)
            div = (bzp - bzm) / (2 * h) + (bru - brd) / (2 * h) + brc / r0
            return np.hypot(curl, div)

        e1, e2 = residual(1e-2), residual(5e-3)
        assert e1 / e2 == pytest.approx(4.0, rel=0.05)

    def test_json_round_trip(self, tmp_path):
        spec = geo.MultipoleSpec(3, [-1.0, 0.0, -2.0])
        p = tmp_path / "m.json"
        spec.to_json(p)
        back = geo.MultipoleSpec.from_json(p)
        assert back.delta == 3 and back.coeffs == spec.coeffs


def test_zero_count_matches_root_finder():
    spec = geo.MultipoleSpec(3, [-1.0, 0.0, -2.0])
    rho = geo.rotation_number(geo.DirectionField.from_multipole(spec, 800))
    expected = geo.zero_count(rho, spec.delta, "exterior")

    def f(x):
        return geo.multipole_field_cartesian(spec, x[0], x[1])

    found = set()
    for z0 in np.linspace(-3, 3, 7):
        for r0 in np.linspace(0.3, 3, 7):
            if np.hypot(z0, r0) <= 1.05:
                continue
            sol = root(lambda x: np.array(f(x)), [z0, r0], tol=1e-13)
            z, r = sol.x
            if sol.success and np.hypot(z, r) > 1 and np.hypot(*f(sol.x)) < 1e-10:
                found.add((round(z, 6), round(abs(r), 6)))
    count = sum(1 if r < 1e-8 else 2 for _, r in found)
    assert count == expected == 2
    (z, r), = found
    assert z == pytest.approx(0.0, abs=1e-6) and r == pytest.approx(np.sqrt(3), abs=1e-6)


def test_locate_zeros_helper():
    spec = geo.MultipoleSpec(3, [-1.0, 0.0, -2.0])
    zs = geo.locate_zeros(lambda z, r: geo.multipole_field_cartesian(spec, z, r), r_max=6.0)
    assert len(zs) == 1
    assert abs(zs[0] - 1j * np.sqrt(3)) < 1e-10


class TestGridAndCsv:
    def test_grid_offsets_axis(self):
        g = geo.PolarGrid(1.0, 4.0, 16, 32)
        assert g.phi.min() > 0 and g.phi.max() < np.pi
        assert np.all(g.rho > 0)
        assert g.r[0] > 1.0 and g.r[-1] < 4.0

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            geo.PolarGrid(2.0, 1.0, 4, 4)

    def test_direction_csv_round_trip(self, tmp_path):
        f = rotating_field(2, m=64)
        p = tmp_path / "d.csv"
        f.to_csv(p)
        g = geo.DirectionField.from_csv(p)
        assert np.array_equal(f.phi, g.phi) and np.array_equal(f.d_zeta, g.d_zeta)

    def test_symmetry_enforced(self):
        phi = np.linspace(-np.pi, np.pi, 101)
        with pytest.raises(ValueError):
            geo.DirectionField(phi, np.ones_like(phi), 0.3 * np.ones_like(phi))
